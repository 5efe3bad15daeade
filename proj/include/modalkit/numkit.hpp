#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include "modalkit/errors.hpp"

namespace modalkit {

using Complex = std::complex<double>;

//-----------------------------------------------------------------------------
// Truncated SVD
//-----------------------------------------------------------------------------

/// Singular-value retention rule used when factoring a snapshot matrix.
struct TruncationPolicy {
    enum class Kind {
        full_rank,          ///< keep everything above the numerical-rank cutoff
        fixed_rank,         ///< keep the leading k values (clamped to numerical rank)
        relative_threshold, ///< keep values with sigma_i / sigma_1 > tau
    };

    Kind kind = Kind::full_rank;
    int rank = 0;
    double threshold = 0.0;

    static TruncationPolicy full_rank() { return {Kind::full_rank, 0, 0.0}; }

    static TruncationPolicy fixed_rank(int k) {
        if (k < 1) throw Error(errc::invalid_input, "fixed-rank truncation requires k >= 1");
        return {Kind::fixed_rank, k, 0.0};
    }

    static TruncationPolicy relative_threshold(double tau) {
        if (!(tau > 0.0 && tau < 1.0))
            throw Error(errc::invalid_input, "relative threshold must lie in (0, 1)");
        return {Kind::relative_threshold, 0, tau};
    }
};

/// Rank-truncated factorization X = U * diag(sigma) * V^H.
///
/// Columns of `left_vectors` are the retained left singular vectors (the
/// proper orthogonal modes of a snapshot matrix), `singular_values` is
/// descending and strictly positive, and `discarded_energy` is the ratio of
/// discarded to total squared singular values.
template <typename Scalar>
struct TruncatedSvd {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> left_vectors;
    Eigen::VectorXd singular_values;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> right_vectors;
    double discarded_energy = 0.0;
    bool rank_clamped = false; ///< fixed-rank request exceeded the numerical rank

    int rank() const { return static_cast<int>(singular_values.size()); }
};

namespace detail {

template <typename Scalar>
TruncatedSvd<Scalar> svd_truncate_impl(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& matrix,
    const TruncationPolicy& policy) {
    if (matrix.rows() == 0 || matrix.cols() == 0)
        throw Error(errc::invalid_input, "svd_truncate: empty matrix");
    if (!matrix.allFinite())
        throw Error(errc::invalid_input, "svd_truncate: matrix has non-finite entries");

    Eigen::BDCSVD<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(
        matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();

    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    if (sigma_max <= 0.0)
        throw Error(errc::no_signal, "svd_truncate: all-zero matrix carries no signal");

    // Numerical rank: sigma_i above machine-epsilon * max(m, n) * sigma_1.
    const double eps = std::numeric_limits<double>::epsilon();
    const double rank_cutoff =
        eps * static_cast<double>(std::max(matrix.rows(), matrix.cols())) * sigma_max;
    int numerical_rank = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        if (sigma(i) > rank_cutoff) ++numerical_rank;

    int keep = numerical_rank;
    bool clamped = false;
    switch (policy.kind) {
        case TruncationPolicy::Kind::full_rank:
            break;
        case TruncationPolicy::Kind::fixed_rank:
            if (policy.rank > numerical_rank) {
                keep = numerical_rank;
                clamped = true;
            } else {
                keep = policy.rank;
            }
            break;
        case TruncationPolicy::Kind::relative_threshold:
            keep = 0;
            for (Eigen::Index i = 0; i < sigma.size(); ++i)
                if (sigma(i) / sigma_max > policy.threshold) ++keep;
            keep = std::min(keep, numerical_rank);
            break;
    }
    if (keep < 1)
        throw Error(errc::over_truncation, "svd_truncate: policy removed every singular value");

    double total = sigma.squaredNorm();
    double kept = sigma.head(keep).squaredNorm();

    TruncatedSvd<Scalar> out;
    out.left_vectors = svd.matrixU().leftCols(keep);
    out.singular_values = sigma.head(keep);
    out.right_vectors = svd.matrixV().leftCols(keep);
    out.discarded_energy = std::clamp(1.0 - kept / total, 0.0, 1.0);
    out.rank_clamped = clamped;
    return out;
}

} // namespace detail

inline TruncatedSvd<double> svd_truncate(const Eigen::MatrixXd& matrix,
                                         const TruncationPolicy& policy) {
    return detail::svd_truncate_impl<double>(matrix, policy);
}

inline TruncatedSvd<Complex> svd_truncate(const Eigen::MatrixXcd& matrix,
                                          const TruncationPolicy& policy) {
    return detail::svd_truncate_impl<Complex>(matrix, policy);
}

/// Moore-Penrose pseudo-inverse assembled from a truncated SVD,
/// X^+ = V * diag(1/sigma) * U^H.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> pseudo_inverse(
    const TruncatedSvd<Scalar>& svd) {
    return svd.right_vectors * svd.singular_values.cwiseInverse().asDiagonal() *
           svd.left_vectors.adjoint();
}

//-----------------------------------------------------------------------------
// General eigendecomposition
//-----------------------------------------------------------------------------

/// Eigenvalues with matching unit-norm eigenvector columns.
struct EigenPairs {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;

    int size() const { return static_cast<int>(values.size()); }
};

namespace detail {

/// Unit norm with the largest-magnitude component rotated to be real
/// positive, so repeated runs produce identical vectors.
inline Eigen::VectorXcd normalize_phase(const Eigen::VectorXcd& v) {
    double nrm = v.norm();
    if (nrm == 0.0) return v;
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    Complex pivot = v(imax);
    Complex rot = std::abs(pivot) > 0.0 ? std::conj(pivot) / std::abs(pivot) : Complex(1.0, 0.0);
    return v * (rot / nrm);
}

/// Deterministic ordering: descending |lambda|, ties by ascending argument.
inline void sort_pairs(EigenPairs& pairs) {
    const int p = pairs.size();
    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        double ma = std::abs(pairs.values(a));
        double mb = std::abs(pairs.values(b));
        if (ma != mb) return ma > mb;
        return std::arg(pairs.values(a)) < std::arg(pairs.values(b));
    });
    Eigen::VectorXcd values(p);
    Eigen::MatrixXcd vectors(pairs.vectors.rows(), p);
    for (int i = 0; i < p; ++i) {
        values(i) = pairs.values(order[i]);
        vectors.col(i) = pairs.vectors.col(order[i]);
    }
    pairs.values.swap(values);
    pairs.vectors.swap(vectors);
}

/// Pair nonreal eigenvalues of a real matrix into exact conjugates. The
/// solver already returns conjugate values; this enforces bit-exact
/// conjugacy of both values and vectors after phase normalization.
inline void enforce_conjugate_closure(EigenPairs& pairs) {
    const int p = pairs.size();
    std::vector<bool> done(p, false);
    for (int i = 0; i < p; ++i) {
        if (done[i] || pairs.values(i).imag() == 0.0) continue;
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int j = 0; j < p; ++j) {
            if (j == i || done[j]) continue;
            double d = std::abs(pairs.values(j) - std::conj(pairs.values(i)));
            if (d < best_dist) {
                best_dist = d;
                best = j;
            }
        }
        if (best < 0) continue;
        double scale = std::abs(pairs.values(i));
        if (best_dist > 1e-8 * std::max(1.0, scale)) continue;
        // keep the +Im member as the master copy
        int master = pairs.values(i).imag() > 0.0 ? i : best;
        int mirror = master == i ? best : i;
        pairs.values(mirror) = std::conj(pairs.values(master));
        pairs.vectors.col(mirror) = pairs.vectors.col(master).conjugate();
        done[i] = done[best] = true;
    }
}

} // namespace detail

/// Full eigendecomposition of a general square matrix. Real input goes
/// through the real Schur path and gets exact conjugate pairing.
inline EigenPairs eig_general(const Eigen::MatrixXd& matrix) {
    if (matrix.rows() != matrix.cols())
        throw Error(errc::invalid_input, "eig_general: matrix must be square");
    if (!matrix.allFinite())
        throw Error(errc::invalid_input, "eig_general: matrix has non-finite entries");

    Eigen::EigenSolver<Eigen::MatrixXd> solver(matrix, true);
    if (solver.info() != Eigen::Success)
        throw Error(errc::invalid_input, "eig_general: eigensolver failed to converge");

    EigenPairs pairs;
    pairs.values = solver.eigenvalues();
    pairs.vectors = solver.eigenvectors();
    for (int i = 0; i < pairs.size(); ++i)
        pairs.vectors.col(i) = detail::normalize_phase(pairs.vectors.col(i));
    detail::enforce_conjugate_closure(pairs);
    detail::sort_pairs(pairs);
    return pairs;
}

inline EigenPairs eig_general(const Eigen::MatrixXcd& matrix) {
    if (matrix.rows() != matrix.cols())
        throw Error(errc::invalid_input, "eig_general: matrix must be square");
    if (!matrix.allFinite())
        throw Error(errc::invalid_input, "eig_general: matrix has non-finite entries");

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(matrix, true);
    if (solver.info() != Eigen::Success)
        throw Error(errc::invalid_input, "eig_general: eigensolver failed to converge");

    EigenPairs pairs;
    pairs.values = solver.eigenvalues();
    pairs.vectors = solver.eigenvectors();
    for (int i = 0; i < pairs.size(); ++i)
        pairs.vectors.col(i) = detail::normalize_phase(pairs.vectors.col(i));
    detail::sort_pairs(pairs);
    return pairs;
}

} // namespace modalkit
