#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "twistlab/eigen2d.hpp"
#include "twistlab/geometry.hpp"
#include "twistlab/longitudinal.hpp"
#include "twistlab/twisted.hpp"

using namespace twistlab;

namespace {

struct Setup {
    ShapeDescriptor shape;
    CrossSection cs;
    TwistProfile tw;
    TubeGrid grid;
    EigenBasis2D basis;
    TwistedOperator op;

    Setup(double beta, double L, double h3, int modes = 6)
        : shape{ShapeKind::Rectangle, 0.5, 0.5},
          cs(shape, 0.05),
          tw(beta, 1.0),
          grid(cs, L, h3),
          basis(eigenpairs_2d(assemble_lap2d(cs), cs, modes)),
          op(grid, tw, basis) {}
};

} // namespace

TEST_SUITE_BEGIN("twisted");

TEST_CASE("form matrix is symmetric and positive semidefinite above E1h") {
    Setup s(3.0, 4.0, 0.25);
    const SpMat& H = s.op.form_matrix();
    SpMat D = SpMat(H - SpMat(H.transpose()));
    double scale = H.coeffs().cwiseAbs().maxCoeff();
    double asym = D.coeffs().size() ? D.coeffs().cwiseAbs().maxCoeff() : 0.0;
    CHECK(asym <= 1e-12 * scale);
    std::mt19937 rng(5);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 5; ++trial) {
        Vec u(s.grid.n_nodes());
        for (std::int64_t k = 0; k < u.size(); ++k) u[k] = gauss(rng);
        double q = s.op.quadratic_form(u), qs = s.op.shifted_form(u);
        CHECK(q >= 0.0);
        CHECK(qs >= -1e-10 * q);
        CHECK(q - qs == doctest::Approx(s.op.E1h() * u.squaredNorm()).epsilon(1e-10));
    }
}

TEST_CASE("tube too short for the twist support is refused") {
    ShapeDescriptor shape{ShapeKind::Rectangle, 0.5, 0.5};
    CrossSection cs(shape, 0.05);
    TubeGrid grid(cs, 3.0, 0.25);
    EigenBasis2D basis = eigenpairs_2d(assemble_lap2d(cs), cs, 2);
    CHECK_THROWS(TwistedOperator(grid, TwistProfile(3.0, 1.0), basis));
    CHECK_NOTHROW(TwistedOperator(grid, TwistProfile(0.0, 1.0), basis));
}

TEST_CASE("straight tube: lowest shifted eigenvalue is the discrete 1D rate") {
    Setup s(0.0, 4.0, 0.25, 2);
    SymEigResult eig = lowest_eigenpairs(s.op.shifted_matrix(), 1, 99);
    double h3 = 0.25, L = 4.0;
    double expect = (2.0 - 2.0 * std::cos(M_PI * h3 / (2.0 * L))) / (h3 * h3);
    CHECK(eig.values[0] == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("twist rows vanish outside the twist support") {
    Setup st(3.0, 4.0, 0.25, 2);
    TwistedOperator op0(st.grid, TwistProfile(0.0, 1.0), st.basis);
    SpMat D = SpMat(st.op.form_matrix() - op0.form_matrix());
    double scale = st.op.form_matrix().coeffs().cwiseAbs().maxCoeff();
    // columns of nodes two slices beyond the support must agree exactly
    for (double x3 : {2.0, -2.0, 3.0}) {
        std::int64_t k = st.grid.node_near(x3, st.cs.origin_node());
        Vec e = Vec::Zero(st.grid.n_nodes());
        e[k] = 1.0;
        CHECK((D * e).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    }
    // inside the support the operators genuinely differ at off-axis nodes
    // (on the axis x1 = x2 = 0 annihilates the twist coefficients)
    int off_axis = -1;
    for (int c = 0; c < st.cs.n_interior(); ++c) {
        auto [x, y] = st.cs.coords(c);
        if (std::abs(x - 0.2) < 1e-9 && std::abs(y - 0.15) < 1e-9) off_axis = c;
    }
    REQUIRE(off_axis >= 0);
    std::int64_t mid = st.grid.node_near(0.0, off_axis);
    Vec e = Vec::Zero(st.grid.n_nodes());
    e[mid] = 1.0;
    CHECK((D * e).cwiseAbs().maxCoeff() > 1e-6 * scale);
}

TEST_CASE("evolution: mass, positivity, monotone diagonal") {
    Setup s(3.0, 4.0, 0.25);
    std::int64_t x0 = s.grid.node_near(0.0, s.cs.origin_node());
    std::vector<double> times{0.25, 0.5, 1.0, 2.0};
    KernelField f = evolve(s.op, x0, times);
    double prev_mass = 1.0 + 1e-9, prev_diag = 1e300;
    for (double t : times) {
        double mass = f.unshifted_mass(t);
        CHECK(mass <= prev_mass + 1e-8);
        CHECK(mass > 0.0);
        prev_mass = mass;
        double diag = f.value_at(t, x0);
        CHECK(diag > 0.0);
        CHECK(diag < prev_diag);
        prev_diag = diag;
        int k = f.time_index(t);
        double vmax = f.columns[k].maxCoeff();
        CHECK(f.columns[k].minCoeff() >= -1e-6 * vmax);
    }
    CHECK(f.max_residual < 1e-8);
    CHECK_THROWS(f.time_index(0.3));
}

TEST_CASE("evolved kernel columns are symmetric in source and target") {
    Setup s(3.0, 4.0, 0.25);
    std::int64_t x = s.grid.node_near(-0.5, s.cs.origin_node());
    std::int64_t y = s.grid.node_near(1.0, s.cs.origin_node());
    std::vector<double> times{0.5, 1.0};
    KernelField fx = evolve(s.op, x, times);
    KernelField fy = evolve(s.op, y, times);
    for (double t : times) {
        double kxy = fx.value_at(t, y), kyx = fy.value_at(t, x);
        double scale = std::max(fx.value_at(t, x), fy.value_at(t, y));
        CHECK(std::abs(kxy - kyx) <= 1e-6 * scale);
    }
}

TEST_CASE("L2 diagonal trick agrees with direct evolution to 2t") {
    Setup s(3.0, 4.0, 0.25);
    std::int64_t x0 = s.grid.node_near(0.0, s.cs.origin_node());
    KernelField f = evolve(s.op, x0, {0.5, 1.0});
    for (double t : {0.5, 1.0}) {
        double via_l2 = diag_via_l2(f, t);
        KernelField g = evolve(s.op, x0, {2.0 * t});
        CHECK(via_l2 == doctest::Approx(g.value_at(2.0 * t, x0)).epsilon(0.03));
    }
}

TEST_CASE("straight tube evolution matches the separable spectral oracle") {
    Setup s(0.0, 4.0, 0.25, 6);
    Kernel1D k1(s.tw, Grid1D(4.0, 0.25));
    int c0 = s.cs.origin_node();
    std::int64_t x0 = s.grid.node_near(0.0, c0);
    int s0 = s.grid.slice_of(x0);
    std::vector<double> times{0.5, 1.0, 2.0};
    KernelField f = evolve(s.op, x0, times);
    for (double t : times) {
        double cross = 0.0;
        for (int j = 0; j < s.basis.m; ++j)
            cross += std::exp(-t * (s.basis.values[j] - s.basis.E1())) *
                     s.basis.psi(j, c0) * s.basis.psi(j, c0);
        double expect = cross * k1.q_nodes(t, s0, s0);
        CHECK(f.value_at(t, x0) == doctest::Approx(expect).epsilon(0.025));
    }
}

TEST_CASE("semigroup action on a separable eigenmode decays exactly") {
    Setup s(0.0, 4.0, 0.25, 2);
    double L = 4.0, h3 = 0.25;
    double lam = (2.0 - 2.0 * std::cos(M_PI * h3 / (2.0 * L))) / (h3 * h3);
    Vec u0(s.grid.n_nodes());
    for (int sl = 0; sl < s.grid.n_slices(); ++sl) {
        double g = std::sin(M_PI * (sl + 1) * h3 / (2.0 * L));
        for (int c = 0; c < s.grid.n_cross(); ++c)
            u0[s.grid.flat(c, sl)] = s.basis.psi(0, c) * g;
    }
    for (double t : {0.5, 2.0}) {
        Vec ut = apply_semigroup(s.op, u0, t);
        CHECK(ut.norm() == doctest::Approx(std::exp(-lam * t) * u0.norm()).epsilon(1e-5));
        CHECK((ut - std::exp(-lam * t) * u0).norm() <= 1e-5 * u0.norm());
    }
}

TEST_CASE("geometric time grids") {
    auto ts = geometric_times(1.0, 16.0, 2.0);
    REQUIRE(ts.size() == 5);
    CHECK(ts.front() == doctest::Approx(1.0));
    CHECK(ts.back() == doctest::Approx(16.0));
}

TEST_CASE("perturbed straight tube is marked subcritical") {
    Setup s(0.0, 4.0, 0.25, 2);
    Vec v = Vec::Zero(s.grid.n_nodes());
    for (std::int64_t k = 0; k < v.size(); ++k)
        if (std::abs(s.grid.x3_of(k)) <= 1.0) v[k] = 2.0;
    TwistedOperator pert(s.grid, s.tw, s.basis, v);
    CHECK(pert.has_perturbation());
    CHECK(pert.subcritical());
    CHECK_FALSE(s.op.subcritical());
    Vec bad = Vec::Constant(s.grid.n_nodes(), -1.0);
    CHECK_THROWS(TwistedOperator(s.grid, s.tw, s.basis, bad));
}

TEST_CASE("small-time check drops unresolved times") {
    Setup s(3.0, 4.0, 0.25);
    std::int64_t x0 = s.grid.node_near(0.0, s.cs.origin_node());
    // h = 0.05 so the resolution floor is 25 h^2 = 0.0625
    ExperimentReport rep = small_time_check(s.op, {x0}, {0.01, 0.25, 0.5});
    CHECK(rep.flags.at("dropped_t_below_25h2"));
    CHECK(rep.envelopes.at("c_emp") > 0.0);
    CHECK(rep.samples.size() == 2);
}

TEST_CASE("off-diagonal Gaussian bound and Cauchy-Schwarz consistency") {
    Setup s(3.0, 4.0, 0.25);
    int c0 = s.cs.origin_node();
    std::vector<std::pair<std::int64_t, std::int64_t>> pairs{
        {s.grid.node_near(0.0, c0), s.grid.node_near(1.5, c0)},
        {s.grid.node_near(-1.0, c0), s.grid.node_near(1.0, c0)}};
    ExperimentReport rep = offdiag_check(s.op, pairs, {0.5, 1.0, 2.0});
    CHECK(rep.flags.at("cauchy_schwarz"));
    CHECK(rep.envelopes.at("K") > 0.0);
    CHECK(rep.envelopes.at("K") < 1e3);
}

TEST_SUITE_END();
