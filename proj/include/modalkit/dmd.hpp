#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include "modalkit/errors.hpp"
#include "modalkit/numkit.hpp"
#include "modalkit/snapshots.hpp"

namespace modalkit {

inline constexpr double two_pi = 6.283185307179586476925286766559;

//-----------------------------------------------------------------------------
// Discrete -> continuous eigenvalue conversion
//-----------------------------------------------------------------------------

/// Continuous-time pole derived from a discrete eigenvalue.
/// damping_ratio is NaN when the pole sits at s = 0 (no decay, no frequency).
struct ContinuousPole {
    Complex s;               ///< log(mu) / dt, principal branch
    double frequency_hz;     ///< |s| / 2 pi
    double damping_ratio;    ///< -Re(s) / |s|, NaN when |s| = 0
    bool nyquist_ambiguous;  ///< mu on the negative real axis: sign of Im(s) is arbitrary
};

inline ContinuousPole discrete_to_continuous(Complex mu, double dt) {
    if (dt <= 0.0) throw Error(errc::invalid_input, "discrete_to_continuous: dt must be > 0");
    if (mu == Complex(0.0, 0.0))
        throw Error(errc::singular_eigenvalue,
                    "discrete_to_continuous: zero eigenvalue has no finite continuous pole");
    ContinuousPole pole;
    pole.nyquist_ambiguous = mu.imag() == 0.0 && mu.real() < 0.0;
    pole.s = std::log(mu) / dt;
    const double mag = std::abs(pole.s);
    pole.frequency_hz = mag / two_pi;
    pole.damping_ratio =
        mag > 0.0 ? -pole.s.real() / mag : std::numeric_limits<double>::quiet_NaN();
    return pole;
}

//-----------------------------------------------------------------------------
// Decomposition
//-----------------------------------------------------------------------------

struct DmdOptions {
    enum class Sort { by_frequency, by_amplitude };

    TruncationPolicy truncation = TruncationPolicy::full_rank();
    bool augment = false;
    Sort sort = Sort::by_frequency;
};

/// Modal content of the best-fit one-step propagator: discrete and continuous
/// eigenvalues, frequencies, damping ratios, unit-norm phase-fixed mode
/// columns (one per channel row), and initial modal amplitudes.
struct DmdResult {
    Eigen::VectorXcd discrete_eigs;
    Eigen::VectorXcd continuous_eigs;
    Eigen::VectorXd frequencies_hz;
    Eigen::VectorXd damping_ratios;
    Eigen::MatrixXcd modes;
    Eigen::VectorXcd initial_amplitudes;
    std::vector<bool> nyquist_flags;
    int retained_rank = 0;
    double dt = 0.0;
    double discarded_energy = 0.0;
    bool rank_clamped = false;
    DmdOptions options;

    int mode_count() const { return static_cast<int>(discrete_eigs.size()); }
};

/// Fits the one-step linear propagator to a snapshot pair through a rank-
/// truncated SVD, then eigendecomposes the projected operator:
///
///   X = U S V^T,   A_proj = U^T Y V S^{-1},   A_proj w = mu w,   phi = U w.
///
/// Modal amplitudes solve min || Phi q - x_first || in the least-squares
/// sense; for augmented pairs the stored modes are the physical upper block.
inline DmdResult dmd_decompose(const SnapshotPair& pair, const DmdOptions& options = {}) {
    if (pair.x.rows() == 0 || pair.x.cols() < 2)
        throw Error(errc::insufficient_data, "dmd_decompose needs at least 2 snapshot columns");
    if (pair.x.rows() != pair.y.rows() || pair.x.cols() != pair.y.cols())
        throw Error(errc::invalid_input, "dmd_decompose: pair matrices must match in shape");

    const TruncatedSvd<double> svd = svd_truncate(pair.x, options.truncation);
    const int r = svd.rank();

    const Eigen::MatrixXd projected = svd.left_vectors.transpose() * pair.y *
                                      svd.right_vectors *
                                      svd.singular_values.cwiseInverse().asDiagonal();
    const EigenPairs eig = eig_general(projected);

    // Full-state modes; unit norm is inherited from w since U is orthonormal.
    Eigen::MatrixXcd full_modes = svd.left_vectors * eig.vectors;

    // Amplitudes of the first snapshot column in the mode basis.
    Eigen::VectorXcd first = pair.x.col(0).cast<Complex>();
    Eigen::VectorXcd amplitudes = full_modes.colPivHouseholderQr().solve(first);

    const Eigen::Index m = pair.channels();
    DmdResult result;
    result.discrete_eigs = eig.values;
    result.continuous_eigs.resize(r);
    result.frequencies_hz.resize(r);
    result.damping_ratios.resize(r);
    result.nyquist_flags.assign(static_cast<std::size_t>(r), false);
    result.modes.resize(m, r);
    result.initial_amplitudes.resize(r);
    result.retained_rank = r;
    result.dt = pair.dt;
    result.discarded_energy = svd.discarded_energy;
    result.rank_clamped = svd.rank_clamped;
    result.options = options;

    for (int i = 0; i < r; ++i) {
        const ContinuousPole pole = discrete_to_continuous(eig.values(i), pair.dt);
        result.continuous_eigs(i) = pole.s;
        result.frequencies_hz(i) = pole.frequency_hz;
        result.damping_ratios(i) = pole.damping_ratio;
        result.nyquist_flags[static_cast<std::size_t>(i)] = pole.nyquist_ambiguous;

        // Physical block (upper half when augmented), renormalized with the
        // scale folded into the amplitude so mode * amplitude is preserved.
        Eigen::VectorXcd physical = full_modes.col(i).head(m);
        const double nrm = physical.norm();
        if (nrm > 0.0) {
            Eigen::Index imax = 0;
            physical.cwiseAbs().maxCoeff(&imax);
            const Complex pivot = physical(imax);
            const Complex rot = std::conj(pivot) / std::abs(pivot);
            result.modes.col(i) = physical * (rot / nrm);
            result.initial_amplitudes(i) = amplitudes(i) * nrm * std::conj(rot);
        } else {
            result.modes.col(i) = physical;
            result.initial_amplitudes(i) = Complex(0.0, 0.0);
        }
    }

    // Deterministic presentation order.
    std::vector<int> order(static_cast<std::size_t>(r));
    std::iota(order.begin(), order.end(), 0);
    if (options.sort == DmdOptions::Sort::by_frequency) {
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            if (result.frequencies_hz(a) != result.frequencies_hz(b))
                return result.frequencies_hz(a) < result.frequencies_hz(b);
            return result.discrete_eigs(a).imag() > result.discrete_eigs(b).imag();
        });
    } else {
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return std::abs(result.initial_amplitudes(a)) >
                   std::abs(result.initial_amplitudes(b));
        });
    }

    DmdResult sorted = result;
    for (int i = 0; i < r; ++i) {
        const int src = order[static_cast<std::size_t>(i)];
        sorted.discrete_eigs(i) = result.discrete_eigs(src);
        sorted.continuous_eigs(i) = result.continuous_eigs(src);
        sorted.frequencies_hz(i) = result.frequencies_hz(src);
        sorted.damping_ratios(i) = result.damping_ratios(src);
        sorted.nyquist_flags[static_cast<std::size_t>(i)] =
            result.nyquist_flags[static_cast<std::size_t>(src)];
        sorted.modes.col(i) = result.modes.col(src);
        sorted.initial_amplitudes(i) = result.initial_amplitudes(src);
    }
    return sorted;
}

/// Convenience entry point: builds the pair and decomposes in one call.
inline DmdResult dmd_decompose(const SnapshotMatrix& snap, const DmdOptions& options = {}) {
    return dmd_decompose(build_pair(snap, options.augment), options);
}

//-----------------------------------------------------------------------------
// Reconstruction
//-----------------------------------------------------------------------------

struct Reconstruction {
    Eigen::VectorXd values;    ///< real part of the modal sum
    double imag_residual = 0.0; ///< norm of the discarded imaginary part
};

/// Evaluates sum_i mu_i^k * phi_i * q0_i at sample index k.
inline Reconstruction reconstruct(const DmdResult& result, long k) {
    if (k < 0) throw Error(errc::invalid_input, "reconstruct: sample index must be >= 0");
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(result.modes.rows());
    for (int i = 0; i < result.mode_count(); ++i) {
        const Complex weight =
            std::pow(result.discrete_eigs(i), static_cast<double>(k)) *
            result.initial_amplitudes(i);
        acc += result.modes.col(i) * weight;
    }
    Reconstruction rec;
    rec.values = acc.real();
    rec.imag_residual = acc.imag().norm();
    return rec;
}

} // namespace modalkit
