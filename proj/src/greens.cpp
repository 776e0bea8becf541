#include "twistlab/greens.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <map>
#include <stdexcept>

namespace twistlab {

namespace {

Vec solve_spd(const SpMat& M, const Vec& b, double* residual) {
    const std::int64_t N = M.rows();
    if (N <= 90000) {
        Eigen::SimplicialLLT<SpMat> llt(M);
        if (llt.info() == Eigen::Success) {
            Vec x = llt.solve(b);
            *residual = (M * x - b).norm() / b.norm();
            return x;
        }
    }
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>>
        cg(M);
    cg.setTolerance(1e-10);
    cg.setMaxIterations(50000);
    Vec x = cg.solve(b);
    if (cg.info() != Eigen::Success)
        throw std::runtime_error("CG failed in elliptic solve: residual=" +
                                 std::to_string(cg.error()));
    *residual = cg.error();
    return x;
}

} // namespace

SpMat reference_shifted_matrix(const TubeGrid& grid, const TwistProfile& profile,
                               const EigenBasis2D& basis) {
    TwistProfile straight(0.0, profile.R());
    TwistedOperator lap(grid, straight, basis);
    SpMat A = lap.shifted_matrix();
    for (int s = 0; s < grid.n_slices(); ++s) {
        double td = profile.theta_dot(grid.x3_of_slice(s));
        if (td == 0.0) continue;
        for (int c = 0; c < grid.n_cross(); ++c)
            A.coeffRef(grid.flat(c, s), grid.flat(c, s)) += td * td;
    }
    A.makeCompressed();
    return A;
}

GreenColumn green_solve(const SpMat& shifted, const TubeGrid& grid, std::int64_t y,
                        const std::string& tag, bool subcritical) {
    if (!subcritical)
        throw std::runtime_error("Green function diverges with truncation: "
                                 "operator is critical on the infinite tube");
    if (std::abs(grid.x3_of(y)) > 0.75 * grid.L())
        throw std::invalid_argument("source too close to the truncation ends");

    Vec b = Vec::Zero(grid.n_nodes());
    b[y] = 1.0 / grid.cell_volume();
    GreenColumn col;
    col.tag = tag;
    col.source = y;
    col.values = solve_spd(shifted, b, &col.residual);
    double top = col.values.maxCoeff();
    if (col.values.minCoeff() < -1e-10 * top)
        throw std::runtime_error("Green column violates positivity");
    return col;
}

ExperimentReport green_ratio_check(const SpMat& shifted_twisted,
                                   const SpMat& shifted_reference,
                                   const TubeGrid& grid,
                                   const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs) {
    ExperimentReport rep;
    rep.tag = "green_ratio";
    rep.columns = {"x", "y", "G_twisted", "G_reference", "ratio"};

    std::map<std::int64_t, GreenColumn> gt, ga;
    for (auto& [x, y] : pairs) {
        if (!gt.count(y)) {
            gt.emplace(y, green_solve(shifted_twisted, grid, y, "twisted", true));
            ga.emplace(y, green_solve(shifted_reference, grid, y, "reference", true));
        }
    }
    double C = 0.0;
    for (auto& [x, y] : pairs) {
        double a = gt.at(y).at(x), b = ga.at(y).at(x);
        double r = a / b;
        C = std::max(C, std::max(r, 1.0 / r));
        rep.add_row({static_cast<double>(x), static_cast<double>(y), a, b, r});
    }
    rep.envelopes["C_emp"] = C;
    return rep;
}

ExperimentReport harmonic_profile_check(const TwistedOperator& op, const WeightField& wj,
                                        const Vec& end_lo, const Vec& end_hi) {
    const TubeGrid& grid = op.grid();
    const int nc = grid.n_cross();
    const int ns = grid.n_slices();
    const double ih32 = 1.0 / (grid.h3() * grid.h3());
    if (end_lo.size() != nc || end_hi.size() != nc)
        throw std::invalid_argument("end data size mismatch");

    // end-slice data enters through the longitudinal coupling only: the
    // twist rows vanish at |x3| = L for a compactly supported profile
    Vec b = Vec::Zero(grid.n_nodes());
    for (int c = 0; c < nc; ++c) {
        b[grid.flat(c, 0)] += end_lo[c] * ih32;
        b[grid.flat(c, ns - 1)] += end_hi[c] * ih32;
    }

    ExperimentReport rep;
    rep.tag = "harmonic_profile";
    rep.columns = {"node", "v", "w", "ratio"};
    double residual = 0.0;
    Vec v = solve_spd(op.shifted_matrix(), b, &residual);
    if (v.minCoeff() <= 0.0)
        throw std::runtime_error("harmonic profile is not positive");

    double c_emp = 0.0;
    const int axis = grid.cross_section().origin_node();
    for (std::int64_t k = 0; k < grid.n_nodes(); ++k) {
        if (std::abs(grid.x3_of(k)) > 0.5 * grid.L()) continue;
        double r = v[k] / wj.at(k);
        c_emp = std::max(c_emp, std::max(r, 1.0 / r));
        if (grid.cross_of(k) == axis)
            rep.add_row({static_cast<double>(k), v[k], wj.at(k), r});
    }
    rep.envelopes["c_emp"] = c_emp;
    rep.envelopes["residual"] = residual;
    return rep;
}

} // namespace twistlab
