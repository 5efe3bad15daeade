#pragma once

#include <Eigen/Dense>
#include <numeric>
#include <vector>

#include "modalkit/dmd.hpp"
#include "modalkit/errors.hpp"
#include "modalkit/numkit.hpp"
#include "modalkit/snapshots.hpp"

namespace modalkit {

/// Result of the Ibrahim time-domain eigenproblem. `eigenvectors` holds the
/// raw stacked vectors; the physical mode of each pole is their first-m-rows
/// block, stored unit-norm and phase-fixed in `modes`.
struct ItdResult {
    Eigen::VectorXcd discrete_eigs;
    Eigen::MatrixXcd eigenvectors;
    Eigen::MatrixXcd modes;
    Eigen::VectorXd frequencies_hz;
    Eigen::VectorXd damping_ratios;
    double dt = 0.0;

    int mode_count() const { return static_cast<int>(discrete_eigs.size()); }
};

/// Ibrahim time-domain extraction from free-response snapshots.
///
/// Three one-step-shifted blocks U, U', U'' are stacked into
/// X = [U; U'] and X' = [U'; U''], and the poles are the eigenvalues of
/// X' X^+ with the pseudo-inverse formed from the normal equations,
/// X^+ = X^T (X X^T)^{-1}. The normal-equations route is kept as written:
/// its conditioning versus the SVD route used by dmd_decompose is exactly
/// the behavior this method is compared against.
inline ItdResult itd_extract(const SnapshotMatrix& snap) {
    const Eigen::Index n = snap.samples();
    const Eigen::Index m = snap.channels();
    if (n < 4)
        throw Error(errc::insufficient_data, "itd_extract needs at least 4 samples");

    const Eigen::Index q = n - 2;
    Eigen::MatrixXd stacked(2 * m, q);
    Eigen::MatrixXd shifted(2 * m, q);
    stacked.topRows(m) = snap.data.middleCols(0, q);
    stacked.bottomRows(m) = snap.data.middleCols(1, q);
    shifted.topRows(m) = snap.data.middleCols(1, q);
    shifted.bottomRows(m) = snap.data.middleCols(2, q);

    const Eigen::MatrixXd gram = stacked * stacked.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gram_eig(gram);
    if (gram_eig.info() != Eigen::Success)
        throw Error(errc::rank_deficient, "itd_extract: Gram eigendecomposition failed");
    const Eigen::VectorXd& lambda = gram_eig.eigenvalues(); // ascending
    const double lambda_max = lambda(lambda.size() - 1);
    if (lambda_max <= 0.0)
        throw Error(errc::no_signal, "itd_extract: zero snapshot matrix carries no signal");
    const double cutoff = std::numeric_limits<double>::epsilon() *
                          static_cast<double>(stacked.rows()) * lambda_max;
    Eigen::VectorXd inv_lambda = Eigen::VectorXd::Zero(lambda.size());
    int rank = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda(i) > cutoff) {
            inv_lambda(i) = 1.0 / lambda(i);
            ++rank;
        }
    }
    const Eigen::MatrixXd gram_inv =
        gram_eig.eigenvectors() * inv_lambda.asDiagonal() * gram_eig.eigenvectors().transpose();

    // system matrix T = X' X^T (X X^T)^{-1}
    const Eigen::MatrixXd system = shifted * stacked.transpose() * gram_inv;

    // With a rank-deficient Gram the normal equations only remain meaningful
    // when the shifted block is representable in the retained row space;
    // anything else has genuinely lost information.
    if (rank < stacked.rows()) {
        const double residual = (system * stacked - shifted).norm();
        if (residual > 1e-6 * shifted.norm())
            throw Error(errc::rank_deficient,
                        "itd_extract: snapshot Gram matrix is numerically singular; "
                        "use dmd_decompose with singular-value truncation instead");
    }

    const EigenPairs eig = eig_general(system);

    // Exactly-zero eigenvalues (possible when the Gram was rank deficient)
    // have no finite continuous pole and are dropped.
    std::vector<int> keep;
    for (int i = 0; i < eig.size(); ++i)
        if (eig.values(i) != Complex(0.0, 0.0)) keep.push_back(i);
    const int p = static_cast<int>(keep.size());

    ItdResult result;
    result.discrete_eigs.resize(p);
    result.eigenvectors.resize(eig.vectors.rows(), p);
    result.modes.resize(m, p);
    result.frequencies_hz.resize(p);
    result.damping_ratios.resize(p);
    result.dt = snap.dt;

    for (int i = 0; i < p; ++i) {
        const int src = keep[static_cast<std::size_t>(i)];
        result.discrete_eigs(i) = eig.values(src);
        result.eigenvectors.col(i) = eig.vectors.col(src);
        const ContinuousPole pole = discrete_to_continuous(eig.values(src), snap.dt);
        result.frequencies_hz(i) = pole.frequency_hz;
        result.damping_ratios(i) = pole.damping_ratio;
        result.modes.col(i) = detail::normalize_phase(eig.vectors.col(src).head(m));
    }

    // ascending frequency, conjugate partners adjacent
    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (result.frequencies_hz(a) != result.frequencies_hz(b))
            return result.frequencies_hz(a) < result.frequencies_hz(b);
        return result.discrete_eigs(a).imag() > result.discrete_eigs(b).imag();
    });
    ItdResult sorted = result;
    for (int i = 0; i < p; ++i) {
        const int src = order[static_cast<std::size_t>(i)];
        sorted.discrete_eigs(i) = result.discrete_eigs(src);
        sorted.eigenvectors.col(i) = result.eigenvectors.col(src);
        sorted.modes.col(i) = result.modes.col(src);
        sorted.frequencies_hz(i) = result.frequencies_hz(src);
        sorted.damping_ratios(i) = result.damping_ratios(src);
    }
    return sorted;
}

} // namespace modalkit
