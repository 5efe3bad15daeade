#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "modalkit/dmd.hpp"
#include "modalkit/errors.hpp"
#include "modalkit/fft.hpp"
#include "modalkit/snapshots.hpp"
#include "modalkit/stability.hpp"

namespace modalkit {

//-----------------------------------------------------------------------------
// Frequency response functions
//-----------------------------------------------------------------------------

/// Complex frequency response per output channel on an ascending frequency
/// grid, with per-line weights in [0, 1] (coherence when averaging was used).
struct FrfSet {
    Eigen::VectorXd frequencies_hz;
    Eigen::MatrixXcd responses; ///< one row per output channel
    Eigen::MatrixXd weights;
    double sampling_period = 0.0;

    Eigen::Index channels() const { return responses.rows(); }
    Eigen::Index lines() const { return frequencies_hz.size(); }

    void validate() const {
        if (lines() < 2) throw Error(errc::invalid_input, "frf needs at least 2 lines");
        for (Eigen::Index k = 1; k < lines(); ++k)
            if (!(frequencies_hz(k) > frequencies_hz(k - 1)))
                throw Error(errc::invalid_input, "frf frequencies must be strictly ascending");
        if (responses.cols() != lines() || weights.rows() != responses.rows() ||
            weights.cols() != lines())
            throw Error(errc::invalid_input, "frf field shapes disagree");
        if (!weights.allFinite())
            throw Error(errc::invalid_input, "frf weights must be finite");
        if (sampling_period <= 0.0)
            throw Error(errc::invalid_input, "frf sampling period must be > 0");
    }
};

/// Segment averaging plan for spectral estimation. segment_length 0 means
/// one segment covering the whole record.
struct SegmentSpec {
    enum class Window { rectangular, hann };

    Eigen::Index segment_length = 0;
    double overlap = 0.5;
    Window window = Window::hann;

    static SegmentSpec whole_record() { return {0, 0.0, Window::rectangular}; }
};

/// H1 estimate H_o = S_fx / S_ff with cross/auto spectra averaged over
/// windowed segments. With two or more segments the weights are the
/// coherence function; with a single segment they are 1.
inline FrfSet estimate_frf(const SnapshotMatrix& force, const SnapshotMatrix& response,
                           const SegmentSpec& spec = SegmentSpec::whole_record()) {
    if (force.channels() != 1)
        throw Error(errc::invalid_input, "estimate_frf expects a single force channel");
    if (std::abs(force.dt - response.dt) > 1e-12 * response.dt)
        throw Error(errc::incompatible_records, "force and response sampling intervals differ");
    if (force.samples() != response.samples())
        throw Error(errc::incompatible_records, "force and response lengths differ");

    const Eigen::Index n = force.samples();
    const Eigen::Index seg_len = spec.segment_length > 0 ? spec.segment_length : n;
    if (seg_len > n)
        throw Error(errc::segmentation, "segment length exceeds record length");
    if (seg_len < 4) throw Error(errc::segmentation, "segment length must be at least 4");
    if (!(spec.overlap >= 0.0 && spec.overlap < 1.0))
        throw Error(errc::segmentation, "overlap must lie in [0, 1)");

    const Eigen::Index hop =
        std::max<Eigen::Index>(1, static_cast<Eigen::Index>(
                                      std::llround((1.0 - spec.overlap) * seg_len)));
    const Eigen::Index segments = 1 + (n - seg_len) / hop;

    std::vector<double> window(static_cast<std::size_t>(seg_len), 1.0);
    if (spec.window == SegmentSpec::Window::hann) {
        const double pi = 3.14159265358979323846264338327950288;
        for (Eigen::Index i = 0; i < seg_len; ++i)
            window[static_cast<std::size_t>(i)] =
                0.5 - 0.5 * std::cos(2.0 * pi * i / static_cast<double>(seg_len - 1));
    }

    const std::size_t nfft = detail::next_pow2(static_cast<std::size_t>(seg_len));
    const std::size_t bins = nfft / 2 + 1;
    const Eigen::Index m = response.channels();

    Eigen::VectorXd s_ff = Eigen::VectorXd::Zero(bins);
    Eigen::MatrixXcd s_fx = Eigen::MatrixXcd::Zero(m, bins);
    Eigen::MatrixXd s_xx = Eigen::MatrixXd::Zero(m, bins);

    std::vector<double> fseg(static_cast<std::size_t>(seg_len));
    std::vector<double> xseg(static_cast<std::size_t>(seg_len));
    for (Eigen::Index s = 0; s < segments; ++s) {
        const Eigen::Index start = s * hop;
        for (Eigen::Index i = 0; i < seg_len; ++i)
            fseg[static_cast<std::size_t>(i)] =
                force.data(0, start + i) * window[static_cast<std::size_t>(i)];
        const auto F = detail::real_spectrum(fseg, nfft);
        for (std::size_t k = 0; k < bins; ++k) s_ff(static_cast<Eigen::Index>(k)) += std::norm(F[k]);
        for (Eigen::Index o = 0; o < m; ++o) {
            for (Eigen::Index i = 0; i < seg_len; ++i)
                xseg[static_cast<std::size_t>(i)] =
                    response.data(o, start + i) * window[static_cast<std::size_t>(i)];
            const auto X = detail::real_spectrum(xseg, nfft);
            for (std::size_t k = 0; k < bins; ++k) {
                s_fx(o, static_cast<Eigen::Index>(k)) += std::conj(F[k]) * X[k];
                s_xx(o, static_cast<Eigen::Index>(k)) += std::norm(X[k]);
            }
        }
    }

    FrfSet frf;
    frf.sampling_period = response.dt;
    frf.frequencies_hz.resize(static_cast<Eigen::Index>(bins));
    const double df = 1.0 / (response.dt * static_cast<double>(nfft));
    for (std::size_t k = 0; k < bins; ++k)
        frf.frequencies_hz(static_cast<Eigen::Index>(k)) = df * static_cast<double>(k);
    frf.responses.resize(m, static_cast<Eigen::Index>(bins));
    frf.weights.resize(m, static_cast<Eigen::Index>(bins));

    const double ff_floor = s_ff.maxCoeff() * 1e-300;
    if (s_ff.maxCoeff() <= 0.0)
        throw Error(errc::no_signal, "estimate_frf: force record carries no signal");
    for (Eigen::Index o = 0; o < m; ++o) {
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(bins); ++k) {
            if (s_ff(k) <= ff_floor) {
                frf.responses(o, k) = Complex(0.0, 0.0);
                frf.weights(o, k) = 0.0;
                continue;
            }
            frf.responses(o, k) = s_fx(o, k) / s_ff(k);
            if (segments >= 2) {
                const double denom = s_ff(k) * s_xx(o, k);
                frf.weights(o, k) =
                    denom > 0.0 ? std::clamp(std::norm(s_fx(o, k)) / denom, 0.0, 1.0) : 0.0;
            } else {
                frf.weights(o, k) = 1.0;
            }
        }
    }
    return frf;
}

//-----------------------------------------------------------------------------
// Least-squares complex frequency-domain fit
//-----------------------------------------------------------------------------

struct LscfPole {
    Complex s;             ///< continuous pole, 1/s
    double frequency_hz;
    double damping_ratio;
    bool stable;           ///< Re(s) <= 0
};

struct LscfPoleSet {
    int order = 0;
    std::vector<LscfPole> poles;
};

namespace detail {

/// Reduced weighted normal equations of the common-denominator model with
/// the highest denominator coefficient pinned to one. Returns the
/// denominator coefficients a_0 .. a_Np (a_Np = 1).
inline Eigen::VectorXd lscf_denominator(const FrfSet& frf, int order) {
    const int ncoef = order + 1;
    const Eigen::Index nf = frf.lines();
    const Eigen::Index m = frf.channels();

    Eigen::MatrixXd merged = Eigen::MatrixXd::Zero(ncoef, ncoef);
    Eigen::MatrixXcd basis(nf, ncoef);
    for (Eigen::Index k = 0; k < nf; ++k) {
        const double theta = two_pi * frf.frequencies_hz(k) * frf.sampling_period;
        for (int p = 0; p < ncoef; ++p)
            basis(k, p) = std::polar(1.0, -theta * static_cast<double>(p));
    }

    for (Eigen::Index o = 0; o < m; ++o) {
        Eigen::MatrixXcd numer(nf, ncoef);
        Eigen::MatrixXcd denom(nf, ncoef);
        for (Eigen::Index k = 0; k < nf; ++k) {
            const double w = frf.weights(o, k);
            numer.row(k) = w * basis.row(k);
            denom.row(k) = (-w * frf.responses(o, k)) * basis.row(k);
        }
        const Eigen::MatrixXd r = (numer.adjoint() * numer).real();
        const Eigen::MatrixXd s = (numer.adjoint() * denom).real();
        const Eigen::MatrixXd t = (denom.adjoint() * denom).real();
        // The normal matrix is near-singular by construction at over-order:
        // the surplus directions place the mathematical poles that the
        // stabilization diagram later discards. The minimum-norm solve keeps
        // those directions deterministic.
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> r_cod(r);
        if (r_cod.rank() == 0)
            throw Error(errc::ill_conditioned_fit,
                        "lscf_fit: numerator normal equations are rank deficient; "
                        "lower the order or restrict the frequency band");
        merged += t - s.transpose() * r_cod.solve(s);
    }

    // minimize a^T M a subject to a_order = 1
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> head_cod(
        merged.topLeftCorner(order, order));
    Eigen::VectorXd coeffs(ncoef);
    coeffs.head(order) = head_cod.solve(-merged.topRightCorner(order, 1));
    coeffs(order) = 1.0;
    if (head_cod.rank() == 0 || !coeffs.allFinite())
        throw Error(errc::ill_conditioned_fit,
                    "lscf_fit: denominator normal equations are rank deficient; "
                    "lower the order or restrict the frequency band");
    return coeffs;
}

} // namespace detail

/// Fits the common-denominator rational-fraction model and extracts the
/// physical poles from the roots of the denominator polynomial.
///
/// Roots are found as companion-matrix eigenvalues, mapped through
/// s = log(z) / T_s, and filtered: z must lie in the annulus
/// 1e-8 < |z| <= 1 + 1e-6 and the damping ratio must not exceed 0.5. The
/// surviving conjugate pairs are collapsed to their positive-frequency
/// member; marginally divergent poles are kept but flagged unstable.
inline LscfPoleSet lscf_fit(const FrfSet& frf, int order) {
    frf.validate();
    if (order < 1) throw Error(errc::invalid_input, "lscf_fit: order must be >= 1");
    if (frf.lines() <= 2 * (order + 1))
        throw Error(errc::insufficient_data,
                    "lscf_fit: need more than 2*(order+1) frequency lines");

    const Eigen::VectorXd coeffs = detail::lscf_denominator(frf, order);

    // companion matrix of the monic polynomial sum_p a_p u^p
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(order, order);
    companion.bottomLeftCorner(order - 1, order - 1) =
        Eigen::MatrixXd::Identity(order - 1, order - 1);
    for (int p = 0; p < order; ++p) companion(p, order - 1) = -coeffs(p);

    const EigenPairs roots = eig_general(companion);

    const double band_max = frf.frequencies_hz(frf.lines() - 1);
    LscfPoleSet set;
    set.order = order;
    for (int i = 0; i < roots.size(); ++i) {
        const Complex u = roots.values(i);
        if (std::abs(u) < 1e-12) continue; // maps to an infinitely fast pole
        const Complex z = 1.0 / u;
        const double mag = std::abs(z);
        if (mag <= 1e-8 || mag > 1.0 + 1e-6) continue;
        if (z.imag() < 0.0) continue; // conjugate partner carries the same pole
        const ContinuousPole pole = discrete_to_continuous(z, frf.sampling_period);
        if (!std::isfinite(pole.damping_ratio) || pole.damping_ratio > 0.5) continue;
        if (pole.frequency_hz > band_max * (1.0 + 1e-9)) continue; // outside fitted band
        set.poles.push_back({pole.s, pole.frequency_hz, pole.damping_ratio,
                             pole.s.real() <= 0.0});
    }
    std::sort(set.poles.begin(), set.poles.end(),
              [](const LscfPole& a, const LscfPole& b) { return a.frequency_hz < b.frequency_hz; });
    return set;
}

/// Repeats lscf_fit for orders 1..max_order and tags each pole stable when
/// the previous order produced a pole within the relative frequency
/// threshold. Stable poles are clustered across orders; a cluster is kept
/// as stable when it spans at least `min_cluster_members` orders.
inline StabilitySweep stabilization_diagram(const FrfSet& frf, int max_order, double threshold,
                                            int min_cluster_members = 5) {
    if (max_order < 2)
        throw Error(errc::invalid_input, "stabilization_diagram: max_order must be >= 2");
    if (!(threshold > 0.0))
        throw Error(errc::invalid_input, "stabilization_diagram: threshold must be > 0");

    StabilitySweep sweep;
    sweep.axis_name = "polynomial_order";
    std::vector<LscfPoleSet> fits;
    for (int order = 1; order <= max_order; ++order) {
        fits.push_back(lscf_fit(frf, order));
        sweep.axis_values.push_back(static_cast<double>(order));
    }
    for (std::size_t i = 0; i < fits.size(); ++i) {
        SweepStep step;
        step.axis_value = sweep.axis_values[i];
        for (const LscfPole& pole : fits[i].poles) {
            SweptPole sp;
            sp.frequency_hz = pole.frequency_hz;
            sp.damping_ratio = pole.damping_ratio;
            sp.source = "lscf";
            sp.pole_stable = pole.stable;
            sp.recurrent = false;
            if (i > 0) {
                for (const LscfPole& prev : fits[i - 1].poles) {
                    if (std::abs(pole.frequency_hz - prev.frequency_hz) <=
                        threshold * prev.frequency_hz) {
                        sp.recurrent = true;
                        break;
                    }
                }
            }
            step.poles.push_back(std::move(sp));
        }
        sweep.steps.push_back(std::move(step));
    }

    // cluster only the poles that recurred between consecutive orders
    std::vector<SweepStep> recurrent_steps(sweep.steps.size());
    std::vector<std::vector<int>> recurrent_index(sweep.steps.size());
    for (std::size_t i = 0; i < sweep.steps.size(); ++i) {
        recurrent_steps[i].axis_value = sweep.steps[i].axis_value;
        for (int pi = 0; pi < static_cast<int>(sweep.steps[i].poles.size()); ++pi) {
            if (sweep.steps[i].poles[pi].recurrent) {
                recurrent_steps[i].poles.push_back(sweep.steps[i].poles[pi]);
                recurrent_index[i].push_back(pi);
            }
        }
    }
    sweep.clusters = detail::cluster_poles(recurrent_steps, threshold);
    for (PoleCluster& cluster : sweep.clusters) {
        for (auto& [si, pi] : cluster.members) pi = recurrent_index[si][pi];
        cluster.stable = cluster.member_count >= min_cluster_members;
    }
    return sweep;
}

} // namespace modalkit
