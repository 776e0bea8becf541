#ifndef TWISTLAB_EIGEN2D_HPP
#define TWISTLAB_EIGEN2D_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "twistlab/geometry.hpp"

namespace twistlab {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

/// Symmetric positive-definite 5-point Dirichlet Laplacian on the
/// cross-section mask (zero extension outside).  Throws if the mask is
/// disconnected.
SpMat assemble_lap2d(const CrossSection& cs);

/// Lowest m Dirichlet eigenpairs of the cross-section.  Eigenvectors are
/// normalized in the h^2-weighted discrete L^2 inner product and the
/// ground state is fixed positive at the node nearest the origin.
struct EigenBasis2D {
    int m = 0;
    Vec values;            // ascending
    Eigen::MatrixXd vectors; // columns, L^2(omega)-normalized
    bool ground_simple = false;

    double E1() const { return values[0]; }
    double psi(int j, int node) const { return vectors(node, j); }
};

EigenBasis2D eigenpairs_2d(const SpMat& op, const CrossSection& cs, int m,
                           unsigned seed = 12345);

/// Empirical Hopf comparability constant: after scaling so the median of
/// psi/rho is one, the largest of max(psi/rho, rho/psi) over interior
/// nodes with rho >= h (closer nodes are unresolved by the mask).
/// Returns +inf if the supplied mode changes sign.
double hopf_ratio_check(const Vec& psi, const CrossSection& cs);

/// Lowest m eigenpairs of a general symmetric positive-definite sparse
/// matrix by shift-invert Lanczos with full reorthogonalization (dense
/// solve for small problems).
struct SymEigResult {
    Vec values;
    Eigen::MatrixXd vectors; // unit Euclidean norm columns
};
SymEigResult lowest_eigenpairs(const SpMat& A, int m, unsigned seed = 12345,
                               double residual_tol = 1e-8);

} // namespace twistlab

#endif
