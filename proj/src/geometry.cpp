#include "twistlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace twistlab {

namespace {

// Distance from an interior point to an axis-aligned ellipse, by robust
// root bracketing of the projection equation
//   F(t) = (a*x/(t+a^2))^2 + (b*y/(t+b^2))^2 - 1 = 0,  t in (-min(a,b)^2, inf).
// For interior points the root lies in (-min(a,b)^2, 0].
double ellipse_distance(double a, double b, double px, double py) {
    double x = std::abs(px), y = std::abs(py);
    if (x == 0.0 && y == 0.0) return std::min(a, b);
    // orient so the major semi-axis is a: the pole handling below assumes
    // the unstable projection coordinate is the minor one
    if (b > a) {
        std::swap(a, b);
        std::swap(x, y);
    }
    const double lo0 = -std::min(a, b) * std::min(a, b);
    auto F = [&](double t) {
        double u = a * x / (t + a * a);
        double v = b * y / (t + b * b);
        return u * u + v * v - 1.0;
    };
    // F is decreasing in t; bracket the root.
    double lo = lo0 + 1e-300, hi = std::max(a, b) * std::hypot(x, y) + 1.0;
    // ensure F(lo) > 0: approach the pole until positive
    for (double eps = 1e-3 * std::abs(lo0);; eps *= 0.1) {
        lo = lo0 + eps;
        if (F(lo) > 0.0 || eps < 1e-18) break;
    }
    if (F(lo) <= 0.0) lo = lo0 * (1 - 1e-15);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (F(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14 * (1.0 + std::abs(hi))) break;
    }
    double t = 0.5 * (lo + hi);
    // Recover the projection point from the x-component of the root and the
    // ellipse constraint.  The direct formula b^2 y / (t + b^2) is unstable
    // when the root sits at the pole t = -b^2, which is the correct
    // generalized root for near-axis points inside the evolute (there the
    // nearest boundary point is off-axis even for y = 0).
    double qx = std::min(a, a * a * x / (t + a * a));
    double qy = b * std::sqrt(std::max(0.0, 1.0 - (qx / a) * (qx / a)));
    return std::hypot(x - qx, y - qy);
}

} // namespace

bool ShapeDescriptor::contains(double x, double y) const {
    double u = x - cx, v = y - cy;
    switch (kind) {
    case ShapeKind::Ellipse: {
        double s = (u / a) * (u / a) + (v / b) * (v / b);
        return s < 1.0;
    }
    case ShapeKind::Disc:
        return u * u + v * v < a * a;
    case ShapeKind::Rectangle:
        return std::abs(u) < a && std::abs(v) < b;
    }
    return false;
}

double ShapeDescriptor::boundary_distance(double x, double y) const {
    double u = x - cx, v = y - cy;
    switch (kind) {
    case ShapeKind::Ellipse:
        return ellipse_distance(a, b, u, v);
    case ShapeKind::Disc:
        return a - std::hypot(u, v);
    case ShapeKind::Rectangle:
        return std::min(std::min(a - std::abs(u), b - std::abs(v)), std::min(a, b));
    }
    return 0.0;
}

CrossSection::CrossSection(const ShapeDescriptor& shape, double h, bool twisted_mode)
    : shape_(shape), h_(h) {
    if (h <= 0) throw std::invalid_argument("grid spacing must be positive");
    if (twisted_mode && shape.rotation_invariant())
        throw std::invalid_argument("rotationally invariant cross-section: twisting "
                                    "is a gauge transformation, twisted mode refused");
    if (!shape.contains(0.0, 0.0))
        throw std::invalid_argument("cross-section must contain the origin");
    double min_halfwidth = std::min(shape.a, shape.b);
    if (min_halfwidth / h < 10.0)
        throw std::invalid_argument("grid too coarse: need >= 10 nodes per semi-axis");

    // lattice aligned so that (0,0) is a lattice point
    double xmin = shape.cx - shape.a - 2 * h, xmax = shape.cx + shape.a + 2 * h;
    double ymin = shape.cy - shape.b - 2 * h, ymax = shape.cy + shape.b + 2 * h;
    int imin = static_cast<int>(std::floor(xmin / h)) - 1;
    int imax = static_cast<int>(std::ceil(xmax / h)) + 1;
    int jmin = static_cast<int>(std::floor(ymin / h)) - 1;
    int jmax = static_cast<int>(std::ceil(ymax / h)) + 1;
    x0_ = imin * h;
    y0_ = jmin * h;
    nx_ = imax - imin + 1;
    ny_ = jmax - jmin + 1;
    flat_.assign(static_cast<std::size_t>(nx_) * ny_, -1);

    double best = 1e300;
    for (int j = 0; j < ny_; ++j) {
        for (int i = 0; i < nx_; ++i) {
            double x = x_of(i), y = y_of(j);
            if (!shape_.contains(x, y)) continue;
            flat_[static_cast<std::size_t>(j) * nx_ + i] = static_cast<int>(nodes_.size());
            nodes_.emplace_back(i, j);
            rho2_.push_back(shape_.boundary_distance(x, y));
            double d = x * x + y * y;
            if (d < best) {
                best = d;
                origin_node_ = static_cast<int>(nodes_.size()) - 1;
            }
        }
    }
    if (nodes_.empty()) throw std::runtime_error("empty cross-section mask");
}

TwistProfile::TwistProfile(double beta, double R) : beta_(beta), R_(R) {
    if (R <= 0) throw std::invalid_argument("twist support radius must be positive");
    // cumulative primitive tabulated once (per-interval Simpson); theta()
    // then interpolates instead of re-integrating on every call
    const int n = 4096;
    step_ = 2.0 * R / n;
    table_.assign(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        double a = -R + i * step_;
        table_[i + 1] = table_[i] + (theta_dot(a) + 4.0 * theta_dot(a + 0.5 * step_) +
                                     theta_dot(a + step_)) * step_ / 6.0;
    }
    total_ = table_.back();
}

double TwistProfile::theta_dot(double s) const {
    double u = s / R_;
    if (std::abs(u) >= 1.0) return 0.0;
    return beta_ * std::exp(1.0 / (u * u - 1.0));
}

double TwistProfile::theta(double s) const {
    if (s <= -R_) return 0.0;
    if (s >= R_) return total_;
    // cubic Hermite between table nodes (exact slopes from theta_dot);
    // step^4 truncation keeps the 1e-10 quadrature target
    double u = (s + R_) / step_;
    int i = std::min(static_cast<int>(u), static_cast<int>(table_.size()) - 2);
    double x = u - i;
    double a = -R_ + i * step_;
    double f0 = table_[i], f1 = table_[i + 1];
    double d0 = theta_dot(a) * step_, d1 = theta_dot(a + step_) * step_;
    double h00 = (1 + 2 * x) * (1 - x) * (1 - x), h10 = x * (1 - x) * (1 - x);
    double h01 = x * x * (3 - 2 * x), h11 = x * x * (x - 1);
    return h00 * f0 + h10 * d0 + h01 * f1 + h11 * d1;
}

TubeGrid::TubeGrid(const CrossSection& cs, double L, double h3)
    : cs_(&cs), L_(L), h3_(h3) {
    if (h3 <= 0 || L <= 0) throw std::invalid_argument("bad tube dimensions");
    double n = 2.0 * L / h3;
    int ntot = static_cast<int>(std::llround(n));
    if (std::abs(n - ntot) > 1e-9)
        throw std::invalid_argument("h3 must divide 2L");
    n_slices_ = ntot - 1;
    if (n_slices_ < 3) throw std::invalid_argument("tube too short for spacing h3");
}

std::int64_t TubeGrid::node_near(double x3, int cross_k) const {
    if (cross_k < 0) cross_k = cs_->origin_node();
    int s = static_cast<int>(std::llround((x3 + L_) / h3_)) - 1;
    s = std::clamp(s, 0, n_slices_ - 1);
    return flat(cross_k, s);
}

Point3 map_to_straight(const TwistProfile& tw, const Point3& p) {
    double th = tw.theta(p.x3);
    double c = std::cos(th), s = std::sin(th);
    return {c * p.x1 + s * p.x2, -s * p.x1 + c * p.x2, p.x3};
}

Point3 map_to_twisted(const TwistProfile& tw, const Point3& p) {
    double th = tw.theta(p.x3);
    double c = std::cos(th), s = std::sin(th);
    return {c * p.x1 - s * p.x2, s * p.x1 + c * p.x2, p.x3};
}

bool in_twisted_tube(const ShapeDescriptor& shape, const TwistProfile& tw, const Point3& p) {
    Point3 q = map_to_straight(tw, p);
    return shape.contains(q.x1, q.x2);
}

} // namespace twistlab
