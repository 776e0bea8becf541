#include "twistlab/montecarlo.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "twistlab/fit.hpp"

namespace twistlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d4a9c87915ae98ULL;
    return x ^ (x >> 31);
}

struct BridgeSampler {
    int levels;          // dyadic depth: 2^levels segments
    double t;
    std::vector<double> sigma; // midpoint stddev per level (rate-2 motion)

    BridgeSampler(double t_, double delta) : t(t_) {
        levels = 1;
        while (t / std::pow(2.0, levels) > delta) ++levels;
        for (int l = 1; l <= levels; ++l) {
            double dt = t / std::pow(2.0, l - 1); // parent gap at level l
            sigma.push_back(std::sqrt(2.0 * dt / 4.0));
        }
    }
    int n_points() const { return (1 << levels) + 1; }
};

/// Fill the dyadic bridge samples for `dim` coordinates; draws are stored
/// so the antithetic partner can reuse them with the opposite sign.
template <int dim>
void build_bridge(const BridgeSampler& bs, const double* anchor,
                  std::vector<double>& draws, std::mt19937_64& rng, bool fresh,
                  int sign, std::vector<double>& path) {
    const int np = bs.n_points();
    std::normal_distribution<double> gauss;
    path.assign(static_cast<std::size_t>(np) * dim, 0.0);
    for (int d = 0; d < dim; ++d) {
        path[d] = anchor[d];
        path[static_cast<std::size_t>(np - 1) * dim + d] = anchor[d];
    }
    if (fresh) draws.clear();
    std::size_t dpos = 0;
    for (int l = 1; l <= bs.levels; ++l) {
        int step = (np - 1) >> l;
        double s = bs.sigma[l - 1];
        for (int m = step; m < np - 1; m += 2 * step) {
            for (int d = 0; d < dim; ++d) {
                double z;
                if (fresh) {
                    z = gauss(rng);
                    draws.push_back(z);
                } else {
                    z = draws[dpos++];
                }
                double lo = path[static_cast<std::size_t>(m - step) * dim + d];
                double hi = path[static_cast<std::size_t>(m + step) * dim + d];
                path[static_cast<std::size_t>(m) * dim + d] =
                    0.5 * (lo + hi) + sign * s * z;
            }
        }
    }
}

} // namespace

double BridgeEstimate::khat(double e1) const {
    return std::exp(e1 * t) * std::pow(4.0 * kPi * t, -1.5) * p_hat;
}

double BridgeEstimate::khat_stderr(double e1) const {
    return std::exp(e1 * t) * std::pow(4.0 * kPi * t, -1.5) * stderr_;
}

BridgeEstimate survival_probability(const ShapeDescriptor& shape, const TwistProfile& tw,
                                    const Point3& x, double t, long M, double delta,
                                    unsigned seed) {
    if (!in_twisted_tube(shape, tw, x))
        throw std::invalid_argument("anchor point not inside the tube");
    if (M % 2) ++M; // antithetic pairs

    BridgeSampler bs(t, delta);
    const int np = bs.n_points();
    double anchor[3] = {x.x1, x.x2, x.x3};

    long survived = 0;
    const long block = 4096;
    std::vector<double> draws, path;
    for (long b0 = 0; b0 < M; b0 += block) {
        std::mt19937_64 rng(splitmix64(seed + 0x51ed2700ULL * (b0 / block)));
        long hi = std::min(M, b0 + block);
        for (long i = b0; i < hi; i += 2) {
            for (int sign : {+1, -1}) {
                build_bridge<3>(bs, anchor, draws, rng, sign > 0, sign, path);
                bool alive = true;
                for (int m = 1; m < np - 1 && alive; ++m) {
                    Point3 p{path[3 * static_cast<std::size_t>(m)],
                             path[3 * static_cast<std::size_t>(m) + 1],
                             path[3 * static_cast<std::size_t>(m) + 2]};
                    alive = in_twisted_tube(shape, tw, p);
                }
                if (alive) ++survived;
            }
        }
    }

    BridgeEstimate est;
    est.x = x;
    est.t = t;
    est.delta = t / (np - 1);
    est.paths = M;
    est.p_hat = static_cast<double>(survived) / M;
    est.stderr_ = std::sqrt(est.p_hat * (1.0 - est.p_hat) / M);
    if (survived == 0) {
        est.zero_survivors = true;
        est.stderr_ = 3.0 / M; // upper confidence bound only
    }
    return est;
}

BridgeEstimate halfspace_survival(double d, double t, long M, double delta,
                                  unsigned seed) {
    if (M % 2) ++M;
    BridgeSampler bs(t, delta);
    const int np = bs.n_points();
    double anchor[1] = {0.0};

    long survived = 0;
    const long block = 4096;
    std::vector<double> draws, path;
    for (long b0 = 0; b0 < M; b0 += block) {
        std::mt19937_64 rng(splitmix64(seed + 0x9e0cd11ULL * (b0 / block)));
        long hi = std::min(M, b0 + block);
        for (long i = b0; i < hi; i += 2) {
            for (int sign : {+1, -1}) {
                build_bridge<1>(bs, anchor, draws, rng, sign > 0, sign, path);
                bool alive = true;
                for (int m = 1; m < np - 1 && alive; ++m) alive = path[m] < d;
                if (alive) ++survived;
            }
        }
    }
    BridgeEstimate est;
    est.t = t;
    est.delta = t / (np - 1);
    est.paths = M;
    est.p_hat = static_cast<double>(survived) / M;
    est.stderr_ = std::sqrt(est.p_hat * (1.0 - est.p_hat) / M);
    if (survived == 0) est.zero_survivors = true, est.stderr_ = 3.0 / M;
    return est;
}

double halfspace_exact(double d, double t) { return 1.0 - std::exp(-d * d / t); }

ExperimentReport exponent_probe(const ShapeDescriptor& shape, const TwistProfile& tw,
                                double e1, const Point3& x,
                                const std::vector<double>& times, long M,
                                double delta, unsigned seed) {
    ExperimentReport rep;
    rep.tag = "mc_exponent";
    rep.columns = {"t", "p_hat", "stderr", "khat", "used"};
    std::vector<std::pair<double, double>> samples;
    for (std::size_t k = 0; k < times.size(); ++k) {
        double t = times[k];
        BridgeEstimate est = survival_probability(
            shape, tw, x, t, M, delta, seed + static_cast<unsigned>(1000 * k));
        bool used = !est.zero_survivors && est.stderr_ <= 0.2 * est.p_hat;
        if (used) samples.emplace_back(t, est.khat(e1));
        rep.add_row({t, est.p_hat, est.stderr_, est.khat(e1), used ? 1.0 : 0.0});
    }
    PowerFit fit = fit_power_law(samples);
    rep.exponents["slope"] = fit.slope;
    rep.exponent_cis["slope"] = fit.ci;
    return rep;
}

} // namespace twistlab
