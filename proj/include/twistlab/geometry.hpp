#ifndef TWISTLAB_GEOMETRY_HPP
#define TWISTLAB_GEOMETRY_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace twistlab {

enum class ShapeKind { Ellipse, Rectangle, Disc };

/// Analytic descriptor of the planar cross-section.  The ellipse is the
/// default working shape; rectangles are kept for separable oracles only
/// and discs are allowed only in oracle mode (a twisted disc is gauge
/// equivalent to a straight tube).
struct ShapeDescriptor {
    ShapeKind kind = ShapeKind::Ellipse;
    double a = 0.7;  // semi-axis / half-width along x1
    double b = 0.5;  // semi-axis / half-height along x2
    double cx = 0.0; // center offset
    double cy = 0.0;

    bool contains(double x, double y) const;
    /// Exact Euclidean distance from an interior point to the boundary curve.
    double boundary_distance(double x, double y) const;
    /// True if the shape is rotationally symmetric about the origin.
    bool rotation_invariant() const { return kind == ShapeKind::Disc; }
};

/// Discretized bounded planar domain: lattice of spacing h aligned so the
/// origin is a lattice point, interior mask and per-node exact distance to
/// the analytic boundary.
class CrossSection {
public:
    CrossSection(const ShapeDescriptor& shape, double h, bool twisted_mode = false);

    double h() const { return h_; }
    const ShapeDescriptor& shape() const { return shape_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int n_interior() const { return static_cast<int>(nodes_.size()); }

    /// Lattice index of interior node k.
    std::pair<int, int> node(int k) const { return nodes_[k]; }
    /// Flat interior index of lattice node (i,j), or -1 if exterior.
    int index(int i, int j) const {
        if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
        return flat_[static_cast<std::size_t>(j) * nx_ + i];
    }
    double x_of(int i) const { return x0_ + i * h_; }
    double y_of(int j) const { return y0_ + j * h_; }
    std::pair<double, double> coords(int k) const {
        auto [i, j] = nodes_[k];
        return {x_of(i), y_of(j)};
    }
    /// Exact distance to the analytic boundary at interior node k.
    double rho2(int k) const { return rho2_[k]; }
    const std::vector<double>& rho2_field() const { return rho2_; }

    /// Interior node nearest to the origin (used for the sign convention).
    int origin_node() const { return origin_node_; }

private:
    ShapeDescriptor shape_;
    double h_;
    double x0_, y0_;
    int nx_, ny_;
    std::vector<std::pair<int, int>> nodes_;
    std::vector<int> flat_;
    std::vector<double> rho2_;
    int origin_node_ = -1;
};

/// Compactly supported twist: theta_dot(s) = beta * exp(1/((s/R)^2 - 1))
/// for |s| < R, zero otherwise, and theta(s) its primitive with
/// theta(-R) = 0.
class TwistProfile {
public:
    TwistProfile(double beta, double R);

    double beta() const { return beta_; }
    double R() const { return R_; }
    bool is_straight() const { return beta_ == 0.0; }

    double theta_dot(double s) const;
    double theta(double s) const;
    double total_twist() const { return total_; }

private:
    double beta_, R_, total_, step_;
    std::vector<double> table_; // theta at uniform nodes on [-R, R]
};

/// Straightened tube grid: cross-section lattice x longitudinal Dirichlet
/// interval (-L, L) with spacing h3.  Interior nodes are indexed
/// slice-major; the two end slices carry zero (Dirichlet) data.
class TubeGrid {
public:
    TubeGrid(const CrossSection& cs, double L, double h3);

    const CrossSection& cross_section() const { return *cs_; }
    double L() const { return L_; }
    double h3() const { return h3_; }
    int n_slices() const { return n_slices_; }
    int n_cross() const { return cs_->n_interior(); }
    std::int64_t n_nodes() const { return static_cast<std::int64_t>(n_slices_) * n_cross(); }
    double cell_volume() const { return cs_->h() * cs_->h() * h3_; }

    double x3_of_slice(int s) const { return -L_ + (s + 1) * h3_; }
    std::int64_t flat(int cross_k, int slice) const {
        return static_cast<std::int64_t>(slice) * n_cross() + cross_k;
    }
    int slice_of(std::int64_t flat_idx) const { return static_cast<int>(flat_idx / n_cross()); }
    int cross_of(std::int64_t flat_idx) const { return static_cast<int>(flat_idx % n_cross()); }
    double x3_of(std::int64_t flat_idx) const { return x3_of_slice(slice_of(flat_idx)); }
    /// Cross-sectional boundary distance (the rho-tilde surrogate of the
    /// full distance; exact for the infinite tube away from the ends).
    double rho(std::int64_t flat_idx) const { return cs_->rho2(cross_of(flat_idx)); }

    /// Node on the tube axis family (cross node nearest origin) at the
    /// slice closest to longitudinal coordinate x3.
    std::int64_t node_near(double x3, int cross_k = -1) const;

private:
    const CrossSection* cs_;
    double L_, h3_;
    int n_slices_;
};

struct Point3 {
    double x1, x2, x3;
};

/// Rotation by theta(x3) mapping the twisted tube onto the straight one;
/// the planar block of r_theta.
Point3 map_to_straight(const TwistProfile& tw, const Point3& p);
Point3 map_to_twisted(const TwistProfile& tw, const Point3& p);

/// True iff the physical point lies in the twisted tube (membership via
/// the straightening map).
bool in_twisted_tube(const ShapeDescriptor& shape, const TwistProfile& tw, const Point3& p);

} // namespace twistlab

#endif
