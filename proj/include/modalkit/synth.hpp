#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "modalkit/errors.hpp"
#include "modalkit/lscf.hpp"
#include "modalkit/snapshots.hpp"

namespace modalkit {

//-----------------------------------------------------------------------------
// Single degree of freedom
//-----------------------------------------------------------------------------

/// Mass-damper-spring oscillator with initial displacement and velocity.
struct SdofParams {
    double mass = 1.0;        // kg
    double damping = 0.0;     // N s/m
    double stiffness = 1.0;   // N/m
    double x0 = 0.0;          // m
    double v0 = 0.0;          // m/s

    double natural_frequency_rad() const { return std::sqrt(stiffness / mass); }
    double natural_frequency_hz() const { return natural_frequency_rad() / two_pi; }
    double damping_ratio() const { return damping / (2.0 * std::sqrt(mass * stiffness)); }
    double damped_frequency_rad() const {
        const double zeta = damping_ratio();
        return natural_frequency_rad() * std::sqrt(1.0 - zeta * zeta);
    }

    void validate() const {
        if (mass <= 0.0 || stiffness <= 0.0 || damping < 0.0)
            throw Error(errc::invalid_input, "sdof parameters must satisfy m > 0, k > 0, c >= 0");
        if (damping_ratio() >= 1.0)
            throw Error(errc::not_underdamped,
                        "sdof closed form requires an underdamped oscillator (zeta < 1)");
    }
};

/// Free decay of the underdamped oscillator:
///   x(t) = e^{-zeta wn t} ( x0 cos(wd t) + (v0 + zeta wn x0)/wd sin(wd t) )
inline Eigen::VectorXd sdof_response(const SdofParams& params, const Eigen::VectorXd& times) {
    params.validate();
    const double wn = params.natural_frequency_rad();
    const double zeta = params.damping_ratio();
    const double wd = params.damped_frequency_rad();
    const double b = (params.v0 + zeta * wn * params.x0) / wd;
    Eigen::VectorXd x(times.size());
    for (Eigen::Index i = 0; i < times.size(); ++i) {
        const double t = times(i);
        if (t < 0.0) throw Error(errc::invalid_input, "sdof_response requires t >= 0");
        x(i) = std::exp(-zeta * wn * t) * (params.x0 * std::cos(wd * t) + b * std::sin(wd * t));
    }
    return x;
}

//-----------------------------------------------------------------------------
// Multi degree of freedom
//-----------------------------------------------------------------------------

/// Benchmark structure defined by its mass, damping and stiffness matrices
/// plus the spatial pattern of the applied force.
struct MdofSystem {
    Eigen::MatrixXd mass;
    Eigen::MatrixXd damping;
    Eigen::MatrixXd stiffness;
    Eigen::VectorXd force_pattern;

    Eigen::Index size() const { return mass.rows(); }

    /// Stiffness-proportionality coefficient alpha with C = alpha K, or an
    /// unsupported-damping error when no such alpha exists.
    double proportional_damping_coefficient() const {
        if (damping.norm() == 0.0) return 0.0;
        const double denom = stiffness.squaredNorm();
        if (denom == 0.0)
            throw Error(errc::unsupported_damping, "zero stiffness with nonzero damping");
        const double alpha = (damping.cwiseProduct(stiffness)).sum() / denom;
        if ((damping - alpha * stiffness).norm() > 1e-10 * damping.norm())
            throw Error(errc::unsupported_damping,
                        "damping matrix is not stiffness-proportional (C = alpha K)");
        return alpha;
    }

    void validate() const {
        const Eigen::Index n = mass.rows();
        if (n == 0 || mass.cols() != n || damping.rows() != n || damping.cols() != n ||
            stiffness.rows() != n || stiffness.cols() != n || force_pattern.size() != n)
            throw Error(errc::invalid_input, "system matrices must be square and consistent");
        if ((mass - mass.transpose()).norm() > 1e-10 * mass.norm())
            throw Error(errc::invalid_input, "mass matrix must be symmetric");
        if ((stiffness - stiffness.transpose()).norm() > 1e-10 * stiffness.norm())
            throw Error(errc::invalid_input, "stiffness matrix must be symmetric");
        Eigen::LLT<Eigen::MatrixXd> llt(mass);
        if (llt.info() != Eigen::Success)
            throw Error(errc::invalid_input, "mass matrix must be positive definite");
    }
};

/// Real normal modes and modal parameters from the undamped generalized
/// eigenproblem K phi = w^2 M phi, with mass-normalized mode columns and
/// zeta_i = alpha w_i / 2 for stiffness-proportional damping.
struct ModalGroundTruth {
    Eigen::VectorXd frequencies_hz;
    Eigen::VectorXd damping_ratios;
    Eigen::MatrixXd mode_matrix; ///< mass-normalized, columns ascending in frequency
};

inline ModalGroundTruth modal_ground_truth(const MdofSystem& system) {
    system.validate();
    const double alpha = system.proportional_damping_coefficient();

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(system.stiffness,
                                                                     system.mass);
    if (solver.info() != Eigen::Success)
        throw Error(errc::invalid_input, "generalized eigensolver failed");

    const Eigen::Index n = system.size();
    ModalGroundTruth truth;
    truth.frequencies_hz.resize(n);
    truth.damping_ratios.resize(n);
    truth.mode_matrix.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lambda = solver.eigenvalues()(i);
        if (lambda < -1e-10 * solver.eigenvalues().cwiseAbs().maxCoeff())
            throw Error(errc::invalid_input, "stiffness matrix must be positive semidefinite");
        const double omega = std::sqrt(std::max(lambda, 0.0));
        truth.frequencies_hz(i) = omega / two_pi;
        truth.damping_ratios(i) = alpha * omega / 2.0;
        Eigen::VectorXd mode = solver.eigenvectors().col(i);
        Eigen::Index imax = 0;
        mode.cwiseAbs().maxCoeff(&imax);
        if (mode(imax) < 0.0) mode = -mode;
        truth.mode_matrix.col(i) = mode;
    }
    return truth;
}

/// Step response by modal superposition. For a unit step through the force
/// pattern, each modal coordinate follows
///   z_i(t) = g_i / w_i^2 [ 1 - e^{-zeta_i w_i t}(cos wd_i t
///            + zeta_i / sqrt(1 - zeta_i^2) sin wd_i t) ]
/// and the physical response is x(t) = Phi z(t).
inline Eigen::MatrixXd mdof_step_response(const MdofSystem& system,
                                          const ModalGroundTruth& truth,
                                          const Eigen::VectorXd& times) {
    const Eigen::Index n = system.size();
    const Eigen::VectorXd modal_force = truth.mode_matrix.transpose() * system.force_pattern;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (truth.damping_ratios(i) >= 1.0)
            throw Error(errc::not_underdamped, "step-response closed form requires zeta < 1");
        if (truth.frequencies_hz(i) <= 0.0)
            throw Error(errc::invalid_input,
                        "step-response closed form requires strictly positive frequencies");
    }
    Eigen::MatrixXd modal(n, times.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double omega = truth.frequencies_hz(i) * two_pi;
        const double zeta = truth.damping_ratios(i);
        const double wd = omega * std::sqrt(1.0 - zeta * zeta);
        const double tan_term = zeta / std::sqrt(1.0 - zeta * zeta);
        const double scale = modal_force(i) / (omega * omega);
        for (Eigen::Index j = 0; j < times.size(); ++j) {
            const double t = times(j);
            if (t < 0.0) throw Error(errc::invalid_input, "step response requires t >= 0");
            modal(i, j) = scale * (1.0 - std::exp(-zeta * omega * t) *
                                             (std::cos(wd * t) + tan_term * std::sin(wd * t)));
        }
    }
    return truth.mode_matrix * modal;
}

/// Exact receptance of the proportionally damped system on a frequency grid,
///   H_o(w) = sum_i Phi_oi g_i / (w_i^2 - w^2 + 2 j zeta_i w_i w).
inline FrfSet modal_frf(const MdofSystem& system, const ModalGroundTruth& truth,
                        const Eigen::VectorXd& frequencies_hz, double sampling_period) {
    const Eigen::Index n = system.size();
    const Eigen::VectorXd modal_force = truth.mode_matrix.transpose() * system.force_pattern;
    FrfSet frf;
    frf.frequencies_hz = frequencies_hz;
    frf.responses = Eigen::MatrixXcd::Zero(n, frequencies_hz.size());
    frf.weights = Eigen::MatrixXd::Ones(n, frequencies_hz.size());
    frf.sampling_period = sampling_period;
    for (Eigen::Index k = 0; k < frequencies_hz.size(); ++k) {
        const double w = frequencies_hz(k) * two_pi;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double wi = truth.frequencies_hz(i) * two_pi;
            const Complex denom(wi * wi - w * w, 2.0 * truth.damping_ratios(i) * wi * w);
            frf.responses.col(k) += truth.mode_matrix.col(i) * (modal_force(i) / denom);
        }
    }
    frf.validate();
    return frf;
}

//-----------------------------------------------------------------------------
// Measurement noise
//-----------------------------------------------------------------------------

/// Multiplicative measurement noise x~ = (1 + sigma d) x with d drawn i.i.d.
/// uniform on [-sqrt(3), sqrt(3)] (zero mean, unit standard deviation).
/// Deterministic for a given seed; sigma = 0 returns the input unchanged.
inline SnapshotMatrix inject_noise(const SnapshotMatrix& snap, double sigma,
                                   std::uint64_t seed) {
    if (sigma < 0.0) throw Error(errc::invalid_input, "noise level must be >= 0");
    if (sigma == 0.0) return snap;
    std::mt19937_64 rng(seed);
    const double half_width = std::sqrt(3.0);
    std::uniform_real_distribution<double> uniform(-half_width, half_width);
    Eigen::MatrixXd noisy = snap.data;
    for (Eigen::Index j = 0; j < noisy.cols(); ++j)
        for (Eigen::Index i = 0; i < noisy.rows(); ++i)
            noisy(i, j) *= 1.0 + sigma * uniform(rng);
    return SnapshotMatrix(std::move(noisy), snap.dt, snap.channel_labels, snap.origin_time);
}

//-----------------------------------------------------------------------------
// Named benchmark presets
//-----------------------------------------------------------------------------

/// 50 Hz oscillator with 1% damping released from unit displacement.
/// The stiffness is (100 pi)^2 and the damping 2 pi, so the natural
/// frequency and damping ratio are exactly 50 Hz and 0.01 (the constants
/// print as 9.8696e4 N/m and 6.2832 N s/m).
inline SdofParams sdof_benchmark_params() {
    const double pi = 3.14159265358979323846264338327950288;
    return {1.0, 2.0 * pi, 1e4 * pi * pi, 1.0, 0.0};
}

/// Six-mass fixed-free chain, unit masses and springs, stiffness-
/// proportional damping, unit step force on the free-end mass.
inline MdofSystem chain6_benchmark_system() {
    MdofSystem system;
    const Eigen::Index n = 6;
    system.mass = Eigen::MatrixXd::Identity(n, n);
    system.stiffness = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        system.stiffness(i, i) = i + 1 < n ? 2.0 : 1.0;
        if (i + 1 < n) {
            system.stiffness(i, i + 1) = -1.0;
            system.stiffness(i + 1, i) = -1.0;
        }
    }
    system.damping = 0.01 * system.stiffness;
    system.force_pattern = Eigen::VectorXd::Zero(n);
    system.force_pattern(n - 1) = 1.0;
    return system;
}

/// Snapshot record plus the modal truth it was generated from.
struct BenchmarkData {
    SnapshotMatrix snapshots;
    Eigen::VectorXd frequencies_hz;
    Eigen::VectorXd damping_ratios;
    Eigen::MatrixXd mode_matrix;
};

/// Builds a named preset: "sdof-paper" is the 50 Hz free decay sampled at
/// 1024 Hz for 1024 samples; "chain6-paper" is the six-mass step response
/// sampled at 2 Hz on 0..1000 s.
inline BenchmarkData make_benchmark(const std::string& name) {
    if (name == "sdof-paper") {
        const SdofParams params = sdof_benchmark_params();
        const Eigen::Index n = 1024;
        const double dt = 1.0 / 1024.0;
        Eigen::VectorXd times(n);
        for (Eigen::Index j = 0; j < n; ++j) times(j) = static_cast<double>(j) * dt;
        Eigen::MatrixXd data(1, n);
        data.row(0) = sdof_response(params, times).transpose();
        BenchmarkData bench{SnapshotMatrix(std::move(data), dt, {"x1"}),
                            Eigen::VectorXd::Constant(1, params.natural_frequency_hz()),
                            Eigen::VectorXd::Constant(1, params.damping_ratio()),
                            Eigen::MatrixXd::Ones(1, 1)};
        return bench;
    }
    if (name == "chain6-paper") {
        const MdofSystem system = chain6_benchmark_system();
        const ModalGroundTruth truth = modal_ground_truth(system);
        const double dt = 0.5;
        const Eigen::Index n = 2001; // 0..1000 s inclusive at 2 Hz
        Eigen::VectorXd times(n);
        for (Eigen::Index j = 0; j < n; ++j) times(j) = static_cast<double>(j) * dt;
        Eigen::MatrixXd data = mdof_step_response(system, truth, times);
        std::vector<std::string> labels;
        for (Eigen::Index i = 0; i < system.size(); ++i)
            labels.push_back("x" + std::to_string(i + 1));
        return BenchmarkData{SnapshotMatrix(std::move(data), dt, labels),
                             truth.frequencies_hz, truth.damping_ratios, truth.mode_matrix};
    }
    throw Error(errc::usage, "unknown preset '" + name + "' (try sdof-paper or chain6-paper)");
}

} // namespace modalkit
