#include "twistlab/twisted.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "twistlab/fit.hpp"

namespace twistlab {

TwistedOperator::TwistedOperator(const TubeGrid& grid, const TwistProfile& profile,
                                 const EigenBasis2D& basis,
                                 const std::optional<Vec>& v_pert)
    : grid_(&grid), profile_(&profile), e1h_(basis.E1()) {
    if (!profile.is_straight() && grid.L() < 4.0 * profile.R())
        throw std::invalid_argument("tube too short: need L >= 4R");

    const CrossSection& cs = grid.cross_section();
    const int nc = cs.n_interior();
    const int ns = grid.n_slices();
    const std::int64_t N = grid.n_nodes();
    const double ih = 1.0 / cs.h();
    const double ih3 = 1.0 / grid.h3();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(N) * 8);
    std::int64_t row = 0;

    // transverse gradients: one row per lattice edge per slice, zero
    // extension outside the mask.  The per-slice pattern is the same, so
    // assemble it once and replicate.
    struct EdgeRow {
        int a, b; // interior indices, -1 if exterior endpoint
    };
    std::vector<EdgeRow> edges;
    for (int dir = 0; dir < 2; ++dir) {
        int di = dir == 0 ? 1 : 0, dj = dir == 0 ? 0 : 1;
        for (int j = 0; j < cs.ny(); ++j)
            for (int i = 0; i < cs.nx(); ++i) {
                int a = cs.index(i, j), b = cs.index(i + di, j + dj);
                if (a < 0 && b < 0) continue;
                edges.push_back({a, b});
            }
    }
    for (int s = 0; s < ns; ++s) {
        std::int64_t off = grid.flat(0, s);
        for (const auto& e : edges) {
            if (e.a >= 0) trip.emplace_back(row, off + e.a, -ih);
            if (e.b >= 0) trip.emplace_back(row, off + e.b, ih);
            ++row;
        }
    }

    // longitudinal + twist rows, one per lattice node that touches an
    // interior unknown (including the lower Dirichlet end slice)
    for (int s = -1; s < ns; ++s) {
        double x3 = -grid.L() + (s + 1) * grid.h3();
        double td = profile.theta_dot(x3);
        std::int64_t off = grid.flat(0, s);      // valid for s >= 0
        std::int64_t offp = grid.flat(0, s + 1); // slice s+1, may be == ns (end)
        bool has_next = (s + 1 < ns);
        for (int j = 0; j < cs.ny(); ++j)
            for (int i = 0; i < cs.nx(); ++i) {
                int c = cs.index(i, j);
                int cup = cs.index(i, j + 1);
                int cright = cs.index(i + 1, j);
                bool any = (s >= 0 && c >= 0) || (has_next && c >= 0) ||
                           (td != 0.0 && s >= 0 && (cup >= 0 || cright >= 0));
                if (!any) continue;
                double x1 = cs.x_of(i), x2 = cs.y_of(j);
                bool emitted = false;
                if (c >= 0) {
                    if (has_next) {
                        trip.emplace_back(row, offp + c, ih3);
                        emitted = true;
                    }
                    if (s >= 0) {
                        double diag = -ih3;
                        if (td != 0.0) diag += td * (-x1 * ih + x2 * ih);
                        trip.emplace_back(row, off + c, diag);
                        emitted = true;
                    }
                }
                if (td != 0.0 && s >= 0) {
                    if (cup >= 0) {
                        trip.emplace_back(row, off + cup, td * x1 * ih);
                        emitted = true;
                    }
                    if (cright >= 0) {
                        trip.emplace_back(row, off + cright, -td * x2 * ih);
                        emitted = true;
                    }
                }
                if (emitted) ++row;
            }
    }

    SpMat G(row, N);
    G.setFromTriplets(trip.begin(), trip.end());
    G.makeCompressed();
    H_ = SpMat(G.transpose() * G);

    if (v_pert) {
        if (v_pert->size() != N) throw std::invalid_argument("v_pert size mismatch");
        for (std::int64_t k = 0; k < N; ++k) {
            double v = (*v_pert)[k];
            if (v < 0.0) throw std::invalid_argument("v_pert must be nonnegative");
            if (v != 0.0) {
                H_.coeffRef(k, k) += v;
                perturbed_ = true;
            }
        }
    }
    H_.makeCompressed();

    SpMat I(N, N);
    I.setIdentity();
    Hs_ = H_ - e1h_ * I;
    Hs_.makeCompressed();
}

int KernelField::time_index(double t) const {
    for (std::size_t k = 0; k < times.size(); ++k)
        if (std::abs(times[k] - t) <= 1e-9 * std::max(1.0, t)) return static_cast<int>(k);
    throw std::out_of_range("time not in kernel field grid");
}

double KernelField::unshifted_mass(double t) const {
    int k = time_index(t);
    return columns[k].sum() * cell_volume * std::exp(-e1h * t);
}

double KernelField::value_at(double t, std::int64_t node) const {
    return columns[time_index(t)][node];
}

std::vector<double> geometric_times(double t0, double t1, double ratio) {
    std::vector<double> ts;
    for (double t = t0; t <= t1 * (1.0 + 1e-9); t *= ratio) ts.push_back(t);
    return ts;
}

KernelField evolve(const TwistedOperator& op, std::int64_t x0,
                   const std::vector<double>& times, const EvolveOptions& opts) {
    const TubeGrid& grid = op.grid();
    const std::int64_t N = grid.n_nodes();
    if (x0 < 0 || x0 >= N) throw std::invalid_argument("source node out of range");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] <= 0.0) throw std::invalid_argument("times must be positive");
        if (k > 0 && times[k] <= times[k - 1])
            throw std::invalid_argument("times must be increasing");
    }

    KernelField field;
    field.source = x0;
    field.cell_volume = grid.cell_volume();
    field.e1h = op.E1h();

    const SpMat& Hs = op.shifted_matrix();
    SpMat I(N, N);
    I.setIdentity();

    Vec u = Vec::Zero(N);
    u[x0] = 1.0 / field.cell_volume;

    using Solver = Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                                            Eigen::IncompleteCholesky<double>>;
    double t_prev = 0.0;
    int startup_left = opts.rannacher_halfsteps;
    for (double tk : times) {
        double span = tk - t_prev;
        double dt_max = std::min(opts.dt_cap, tk * opts.dt_frac);
        int nsub = std::max(1, static_cast<int>(std::ceil(span / dt_max - 1e-12)));
        double dt = span / nsub;

        SpMat M = I + (0.5 * dt) * Hs;
        Solver solver;
        solver.setTolerance(opts.cg_tol);
        solver.setMaxIterations(20000);
        solver.compute(M);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("preconditioner setup failed in evolve");

        for (int step = 0; step < nsub; ++step) {
            Vec rhs;
            if (startup_left > 0) {
                // implicit-Euler start-up pair: two half-steps with the
                // same matrix, damping the delta's high modes before CN
                u = solver.solveWithGuess(u, u);
                if (solver.info() != Eigen::Success)
                    throw std::runtime_error("CG failed in start-up step");
                rhs = u;
                --startup_left;
            } else {
                rhs = u - (0.5 * dt) * (Hs * u);
            }
            u = solver.solveWithGuess(rhs, u);
            if (solver.info() != Eigen::Success)
                throw std::runtime_error("CG failed: iterations=" +
                                         std::to_string(solver.iterations()) +
                                         " residual=" + std::to_string(solver.error()));
            field.max_residual = std::max(field.max_residual, solver.error());
            ++field.total_steps;
        }
        field.times.push_back(tk);
        field.columns.push_back(u);
        t_prev = tk;
    }
    return field;
}

Vec apply_semigroup(const TwistedOperator& op, const Vec& u0, double t,
                    const EvolveOptions& opts) {
    const SpMat& Hs = op.shifted_matrix();
    const std::int64_t N = Hs.rows();
    if (u0.size() != N) throw std::invalid_argument("initial data size mismatch");
    SpMat I(N, N);
    I.setIdentity();

    // geometric segment ladder: [0, t0], then doubling up to t
    std::vector<double> segs;
    double t0 = std::min(t, 0.5);
    for (double s = t0; s < t * (1.0 - 1e-12); s *= 2.0) segs.push_back(s);
    segs.push_back(t);

    using Solver = Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                                            Eigen::IncompleteCholesky<double>>;
    Vec u = u0;
    double t_prev = 0.0;
    // implicit-Euler start-up half-steps, as in evolve: without them the
    // Crank-Nicolson factor is ~ -1 on stiff modes of rough input data and
    // they survive the whole ladder with alternating sign
    int startup_left = opts.rannacher_halfsteps;
    for (double tk : segs) {
        double span = tk - t_prev;
        int nsub = std::max(
            1, static_cast<int>(std::ceil(span / (tk * opts.dt_frac) - 1e-12)));
        double dt = span / nsub;
        SpMat M = I + (0.5 * dt) * Hs;
        Solver solver;
        solver.setTolerance(opts.cg_tol);
        solver.setMaxIterations(20000);
        solver.compute(M);
        for (int step = 0; step < nsub; ++step) {
            Vec rhs;
            if (startup_left > 0) {
                u = solver.solveWithGuess(u, u);
                if (solver.info() != Eigen::Success)
                    throw std::runtime_error("CG failed in start-up step");
                rhs = u;
                --startup_left;
            } else {
                rhs = u - (0.5 * dt) * (Hs * u);
            }
            u = solver.solveWithGuess(rhs, u);
            if (solver.info() != Eigen::Success)
                throw std::runtime_error("CG failed in apply_semigroup");
        }
        t_prev = tk;
    }
    return u;
}

double diag_via_l2(const KernelField& field, double t) {
    int k = field.time_index(t);
    return field.columns[k].squaredNorm() * field.cell_volume;
}

namespace {

double long_time_bound(const TubeGrid& grid, std::int64_t node, double t) {
    double rho = grid.rho(node);
    double x3 = grid.x3_of(node);
    return rho * rho / std::sqrt(t) * std::min((1.0 + x3 * x3) / t, 1.0);
}

} // namespace

ExperimentReport envelope_check_main(const TwistedOperator& op,
                                     const std::vector<std::int64_t>& sources,
                                     const std::vector<double>& times,
                                     const EvolveOptions& opts) {
    ExperimentReport rep;
    rep.tag = "envelope_main";
    rep.columns = {"t", "source", "diag", "envelope", "ratio"};
    const TubeGrid& grid = op.grid();

    std::vector<double> half_times;
    for (double t : times) half_times.push_back(0.5 * t);
    double c_emp = 0.0;
    bool first = true;
    for (std::int64_t src : sources) {
        KernelField f = evolve(op, src, half_times, opts);
        std::vector<std::pair<double, double>> samples;
        for (double t : times) {
            double diag = diag_via_l2(f, 0.5 * t);
            double env = long_time_bound(grid, src, t);
            double ratio = diag / env;
            c_emp = std::max(c_emp, std::max(ratio, 1.0 / ratio));
            rep.add_row({t, static_cast<double>(src), diag, env, ratio});
            if (t >= 4.0) samples.emplace_back(t, diag);
        }
        if (samples.size() >= 5) {
            PowerFit fit = fit_power_law(samples);
            std::string name = "slope_src" + std::to_string(src);
            rep.exponents[name] = fit.slope;
            rep.exponent_cis[name] = fit.ci;
            if (first) {
                rep.exponents["slope"] = fit.slope;
                rep.exponent_cis["slope"] = fit.ci;
                first = false;
            }
        }
    }
    rep.envelopes["c_emp"] = c_emp;
    return rep;
}

ExperimentReport small_time_check(const TwistedOperator& op,
                                  const std::vector<std::int64_t>& sources,
                                  const std::vector<double>& times,
                                  const EvolveOptions& opts) {
    ExperimentReport rep;
    rep.tag = "small_time";
    rep.columns = {"t", "source", "diag", "envelope", "ratio"};
    const TubeGrid& grid = op.grid();
    const double h = grid.cross_section().h();
    const double t_floor = 25.0 * h * h;

    std::vector<double> valid;
    for (double t : times)
        if (t >= t_floor)
            valid.push_back(t);
        else
            rep.flags["dropped_t_below_25h2"] = true;
    if (valid.empty()) {
        rep.flags["no_valid_times"] = false;
        return rep;
    }
    std::vector<double> half_times;
    for (double t : valid) half_times.push_back(0.5 * t);
    double c_emp = 0.0;
    for (std::int64_t src : sources) {
        KernelField f = evolve(op, src, half_times, opts);
        double rho = grid.rho(src);
        for (double t : valid) {
            double diag = diag_via_l2(f, 0.5 * t);
            double env = std::min(rho * rho / t, 1.0) * std::pow(t, -1.5);
            double ratio = diag / env;
            c_emp = std::max(c_emp, std::max(ratio, 1.0 / ratio));
            rep.add_row({t, static_cast<double>(src), diag, env, ratio});
        }
    }
    rep.envelopes["c_emp"] = c_emp;
    return rep;
}

ExperimentReport offdiag_check(const TwistedOperator& op,
                               const std::vector<std::pair<std::int64_t, std::int64_t>>& pairs,
                               const std::vector<double>& times,
                               const EvolveOptions& opts) {
    ExperimentReport rep;
    rep.tag = "offdiag";
    rep.columns = {"t", "x", "y", "k", "bound", "K"};
    const TubeGrid& grid = op.grid();
    const TwistProfile& tw = op.profile();
    const double C = 8.0;

    // evolve once per distinct source
    std::map<std::int64_t, KernelField> fields;
    for (auto& [x, y] : pairs) {
        if (!fields.count(x)) fields.emplace(x, evolve(op, x, times, opts));
        if (!fields.count(y)) fields.emplace(y, evolve(op, y, times, opts));
    }

    auto physical = [&](std::int64_t node) {
        auto [cx, cy] = grid.cross_section().coords(grid.cross_of(node));
        return map_to_twisted(tw, {cx, cy, grid.x3_of(node)});
    };

    double K_min = 0.0;
    bool cs_ok = true;
    for (auto& [x, y] : pairs) {
        Point3 px = physical(x), py = physical(y);
        double d2 = (px.x1 - py.x1) * (px.x1 - py.x1) +
                    (px.x2 - py.x2) * (px.x2 - py.x2) +
                    (px.x3 - py.x3) * (px.x3 - py.x3);
        double rx = grid.rho(x), ry = grid.rho(y);
        double x3 = grid.x3_of(x), y3 = grid.x3_of(y);
        for (double t : times) {
            double k = fields.at(x).value_at(t, y);
            double kxx = fields.at(x).value_at(t, x);
            double kyy = fields.at(y).value_at(t, y);
            double bound = rx * ry *
                           std::min(std::sqrt((1 + x3 * x3) * (1 + y3 * y3)) *
                                        std::pow(t, -1.5),
                                    std::pow(t, -0.5)) *
                           std::exp(-d2 / (C * t));
            double K = std::max(k, 0.0) / bound;
            K_min = std::max(K_min, K);
            rep.add_row({t, static_cast<double>(x), static_cast<double>(y), k, bound, K});
            if (k > std::sqrt(std::max(kxx, 0.0) * std::max(kyy, 0.0)) +
                        1e-8 * std::max(kxx, kyy))
                cs_ok = false;
        }
    }
    rep.envelopes["K"] = K_min;
    rep.flags["cauchy_schwarz"] = cs_ok;
    return rep;
}

ExperimentReport perturbation_mode_check(const TubeGrid& grid, const EigenBasis2D& basis,
                                         const Vec& v_pert,
                                         const std::vector<std::int64_t>& sources,
                                         const std::vector<double>& times,
                                         const EvolveOptions& opts) {
    TwistProfile straight(0.0, 1.0);
    TwistedOperator op(grid, straight, basis, v_pert);
    ExperimentReport rep = envelope_check_main(op, sources, times, opts);
    rep.tag = "perturbation_mode";
    rep.flags["perturbed"] = op.has_perturbation();
    return rep;
}

} // namespace twistlab
