#include "twistlab/eigen2d.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <stdexcept>

namespace twistlab {

SpMat assemble_lap2d(const CrossSection& cs) {
    const int n = cs.n_interior();
    const double ih2 = 1.0 / (cs.h() * cs.h());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(5) * n);
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    for (int k = 0; k < n; ++k) {
        auto [i, j] = cs.node(k);
        trip.emplace_back(k, k, 4.0 * ih2);
        for (int d = 0; d < 4; ++d) {
            int kk = cs.index(i + di[d], j + dj[d]);
            if (kk >= 0) trip.emplace_back(k, kk, -ih2);
        }
    }
    // connectivity check (zero-extension Dirichlet assumes one component)
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
        int k = q.front();
        q.pop();
        auto [i, j] = cs.node(k);
        for (int d = 0; d < 4; ++d) {
            int kk = cs.index(i + di[d], j + dj[d]);
            if (kk >= 0 && !seen[kk]) {
                seen[kk] = 1;
                ++count;
                q.push(kk);
            }
        }
    }
    if (count != n) throw std::runtime_error("cross-section mask is disconnected");

    SpMat A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    return A;
}

SymEigResult lowest_eigenpairs(const SpMat& A, int m, unsigned seed, double residual_tol) {
    const int n = static_cast<int>(A.rows());
    if (m > n) throw std::invalid_argument("requested more eigenpairs than matrix size");
    SymEigResult out;

    if (n <= 2000) {
        Eigen::MatrixXd dense(A);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
        out.values = es.eigenvalues().head(m);
        out.vectors = es.eigenvectors().leftCols(m);
        return out;
    }

    // shift-invert Lanczos on A^{-1} with full reorthogonalization
    Eigen::SimplicialLLT<SpMat> llt(A);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("Cholesky factorization failed in Lanczos");

    const int cap = std::min(n, std::max(50 * m, m + 30));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd V(n, cap + 1);
    std::vector<double> alpha, beta;
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    v.normalize();
    V.col(0) = v;

    int k = 0;
    Vec w;
    for (; k < cap; ++k) {
        w = llt.solve(V.col(k));
        double a = V.col(k).dot(w);
        alpha.push_back(a);
        w -= a * V.col(k);
        if (k > 0) w -= beta.back() * V.col(k - 1);
        // full reorthogonalization, twice
        for (int pass = 0; pass < 2; ++pass)
            w -= V.leftCols(k + 1) * (V.leftCols(k + 1).transpose() * w);
        double b = w.norm();
        if (b < 1e-14) { // invariant subspace found
            beta.push_back(0.0);
            break;
        }
        beta.push_back(b);
        V.col(k + 1) = w / b;

        // convergence test every few steps once enough vectors exist
        if (k + 1 >= m + 2 && (k % 5 == 4 || k + 1 == cap)) {
            int kk = k + 1;
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(kk, kk);
            for (int i = 0; i < kk; ++i) {
                T(i, i) = alpha[i];
                if (i + 1 < kk) T(i, i + 1) = T(i + 1, i) = beta[i];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
            bool ok = true;
            for (int j = 0; j < m; ++j) {
                // largest Ritz values of A^{-1} -> smallest of A
                int idx = kk - 1 - j;
                Vec y = V.leftCols(kk) * es.eigenvectors().col(idx);
                double lam = 1.0 / es.eigenvalues()[idx];
                double res = (A * y - lam * y).norm();
                if (res > residual_tol * std::abs(lam)) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                out.values.resize(m);
                out.vectors.resize(n, m);
                for (int j = 0; j < m; ++j) {
                    int idx = kk - 1 - j;
                    out.values[j] = 1.0 / es.eigenvalues()[idx];
                    out.vectors.col(j) = V.leftCols(kk) * es.eigenvectors().col(idx);
                    out.vectors.col(j).normalize();
                }
                // ascending order of the eigenvalues of A
                for (int j = 0; j + 1 < m; ++j)
                    if (out.values[j] > out.values[j + 1])
                        throw std::runtime_error("Lanczos ordering failure");
                return out;
            }
        }
    }
    throw std::runtime_error("Lanczos did not converge within the iteration cap");
}

EigenBasis2D eigenpairs_2d(const SpMat& op, const CrossSection& cs, int m, unsigned seed) {
    SymEigResult r = lowest_eigenpairs(op, m, seed);
    EigenBasis2D basis;
    basis.m = m;
    basis.values = r.values;
    basis.vectors = r.vectors;
    // L^2(omega) normalization under the h^2-weighted inner product
    const double h = cs.h();
    for (int j = 0; j < m; ++j) basis.vectors.col(j) /= h;
    // sign convention: ground state positive near the origin; higher modes
    // get a deterministic sign fix at their largest-magnitude entry
    for (int j = 0; j < m; ++j) {
        double ref = (j == 0) ? basis.vectors(cs.origin_node(), 0) : 0.0;
        if (j > 0) {
            int imax;
            basis.vectors.col(j).cwiseAbs().maxCoeff(&imax);
            ref = basis.vectors(imax, j);
        }
        if (ref < 0) basis.vectors.col(j) *= -1.0;
    }
    if (m >= 2)
        basis.ground_simple = (basis.values[1] - basis.values[0]) >
                              1e-6 * std::abs(basis.values[0]);
    else
        basis.ground_simple = true;
    return basis;
}

double hopf_ratio_check(const Vec& psi, const CrossSection& cs) {
    const int n = cs.n_interior();
    // Nodes closer to the analytic boundary than one grid spacing are not
    // resolved by the mask: the discrete value there is O(h) instead of
    // O(rho), so they are excluded from the comparability sample.
    std::vector<double> ratios;
    ratios.reserve(n);
    for (int k = 0; k < n; ++k) {
        if (psi[k] <= 0.0) return std::numeric_limits<double>::infinity();
        if (cs.rho2(k) < cs.h()) continue;
        ratios.push_back(psi[k] / cs.rho2(k));
    }
    if (ratios.empty()) return std::numeric_limits<double>::infinity();
    std::vector<double> sorted = ratios;
    std::size_t mid = sorted.size() / 2;
    std::nth_element(sorted.begin(), sorted.begin() + mid, sorted.end());
    double med = sorted[mid];
    double c = 1.0;
    for (double r : ratios) {
        double s = r / med;
        c = std::max(c, std::max(s, 1.0 / s));
    }
    return c;
}

} // namespace twistlab
