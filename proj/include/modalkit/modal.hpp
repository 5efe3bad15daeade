#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "modalkit/dmd.hpp"
#include "modalkit/errors.hpp"
#include "modalkit/itd.hpp"
#include "modalkit/snapshots.hpp"
#include "modalkit/stability.hpp"

namespace modalkit {

//-----------------------------------------------------------------------------
// Modal assurance criterion
//-----------------------------------------------------------------------------

/// mac(a, b) = |a^H b|^2 / ((a^H a)(b^H b)); invariant to complex scaling of
/// either argument.
inline double mac(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    if (a.size() != b.size())
        throw Error(errc::incompatible_modes, "mac: vectors must have equal length");
    const double na = a.squaredNorm();
    const double nb = b.squaredNorm();
    if (na == 0.0 || nb == 0.0)
        throw Error(errc::undefined_mac, "mac: zero vector has no defined direction");
    return std::norm(a.dot(b)) / (na * nb);
}

struct MacMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> row_labels;
    std::vector<std::string> column_labels;
};

/// Pairwise MAC of two mode sets given as matrix columns.
inline MacMatrix mac_matrix(const Eigen::MatrixXcd& rows, const Eigen::MatrixXcd& cols,
                            std::vector<std::string> row_labels = {},
                            std::vector<std::string> column_labels = {}) {
    if (rows.rows() != cols.rows())
        throw Error(errc::incompatible_modes, "mac_matrix: channel counts differ");
    MacMatrix out;
    out.values.resize(rows.cols(), cols.cols());
    for (Eigen::Index i = 0; i < rows.cols(); ++i)
        for (Eigen::Index j = 0; j < cols.cols(); ++j)
            out.values(i, j) = mac(rows.col(i), cols.col(j));
    if (row_labels.empty())
        for (Eigen::Index i = 0; i < rows.cols(); ++i)
            row_labels.push_back("mode" + std::to_string(i + 1));
    if (column_labels.empty())
        for (Eigen::Index j = 0; j < cols.cols(); ++j)
            column_labels.push_back("mode" + std::to_string(j + 1));
    out.row_labels = std::move(row_labels);
    out.column_labels = std::move(column_labels);
    return out;
}

//-----------------------------------------------------------------------------
// Pseudo-stability sweep over sampling frequency
//-----------------------------------------------------------------------------

enum class IdentificationMethod { dmd, itd };

struct SweepOptions {
    double cluster_tolerance = 0.01;   ///< relative frequency tolerance
    double stability_fraction = 0.8;   ///< required presence among eligible steps
};

/// Decimates the master record to every requested sampling frequency, runs
/// the chosen identification method, and clusters the positive-frequency
/// poles across the sweep. A cluster counts as stable when it appears in at
/// least `stability_fraction` of the steps whose sampling frequency exceeds
/// twice the cluster frequency.
inline StabilitySweep pseudo_stability_sweep(const SnapshotMatrix& master,
                                             const std::vector<double>& fs_grid,
                                             IdentificationMethod method,
                                             const DmdOptions& options = {},
                                             const SweepOptions& sweep_options = {}) {
    if (fs_grid.empty())
        throw Error(errc::invalid_sweep, "pseudo_stability_sweep: empty sampling grid");
    for (std::size_t i = 1; i < fs_grid.size(); ++i)
        if (!(fs_grid[i] > fs_grid[i - 1]))
            throw Error(errc::invalid_sweep, "pseudo_stability_sweep: grid must ascend");

    const double master_fs = master.sampling_rate_hz();
    std::vector<int> factors;
    for (double fs : fs_grid) {
        if (fs <= 0.0) throw Error(errc::invalid_sweep, "sampling frequencies must be > 0");
        const double ratio = master_fs / fs;
        const int factor = static_cast<int>(std::llround(ratio));
        if (factor < 1 || std::abs(ratio - factor) > 1e-9 * ratio)
            throw Error(errc::decimation,
                        "sampling frequency " + std::to_string(fs) +
                            " Hz is not an integer decimation of the master rate " +
                            std::to_string(master_fs) + " Hz");
        factors.push_back(factor);
    }

    StabilitySweep sweep;
    sweep.axis_name = "sampling_frequency_hz";
    sweep.axis_values = fs_grid;
    for (std::size_t step_idx = 0; step_idx < fs_grid.size(); ++step_idx) {
        const SnapshotMatrix snap = decimate(master, factors[step_idx]);
        SweepStep step;
        step.axis_value = fs_grid[step_idx];
        if (method == IdentificationMethod::dmd) {
            const DmdResult result = dmd_decompose(snap, options);
            for (int i = 0; i < result.mode_count(); ++i) {
                if (!(result.continuous_eigs(i).imag() > 0.0)) continue;
                SweptPole pole;
                pole.frequency_hz = result.frequencies_hz(i);
                pole.damping_ratio = result.damping_ratios(i);
                pole.amplitude = std::abs(result.initial_amplitudes(i));
                pole.source = "dmd";
                pole.mode = result.modes.col(i);
                pole.pole_stable = result.continuous_eigs(i).real() <= 0.0;
                step.poles.push_back(std::move(pole));
            }
        } else {
            const ItdResult result = itd_extract(snap);
            for (int i = 0; i < result.mode_count(); ++i) {
                const ContinuousPole pole = discrete_to_continuous(result.discrete_eigs(i),
                                                                   result.dt);
                if (!(pole.s.imag() > 0.0)) continue;
                SweptPole sp;
                sp.frequency_hz = result.frequencies_hz(i);
                sp.damping_ratio = result.damping_ratios(i);
                sp.amplitude = 0.0;
                sp.source = "itd";
                sp.mode = result.modes.col(i);
                sp.pole_stable = pole.s.real() <= 0.0;
                step.poles.push_back(std::move(sp));
            }
        }
        if (step_idx > 0) {
            for (SweptPole& pole : step.poles) {
                for (const SweptPole& prev : sweep.steps.back().poles) {
                    if (std::abs(pole.frequency_hz - prev.frequency_hz) <=
                        sweep_options.cluster_tolerance * prev.frequency_hz) {
                        pole.recurrent = true;
                        break;
                    }
                }
            }
        }
        sweep.steps.push_back(std::move(step));
    }

    sweep.clusters = detail::cluster_poles(sweep.steps, sweep_options.cluster_tolerance);
    for (PoleCluster& cluster : sweep.clusters) {
        std::vector<int> eligible;
        for (int si = 0; si < static_cast<int>(fs_grid.size()); ++si)
            if (fs_grid[static_cast<std::size_t>(si)] > 2.0 * cluster.mean_frequency_hz)
                eligible.push_back(si);
        cluster.stable = !eligible.empty() &&
                         detail::appears_in_fraction(cluster, eligible,
                                                     sweep_options.stability_fraction);
    }
    return sweep;
}

//-----------------------------------------------------------------------------
// Stable-pole selection
//-----------------------------------------------------------------------------

struct SelectedPole {
    double frequency_hz = 0.0;
    double damping_ratio = 0.0;
    double axis_value = 0.0;
    Eigen::VectorXcd mode;
};

enum class SelectionPolicy { nearest_to_mean };

/// One representative pole per stable cluster: the member whose frequency is
/// closest to the cluster mean, ties resolved toward the lower axis value.
inline std::vector<SelectedPole> select_stable_poles(
    const StabilitySweep& sweep, SelectionPolicy policy = SelectionPolicy::nearest_to_mean) {
    (void)policy; // single policy today
    if (sweep.steps.empty())
        throw Error(errc::invalid_sweep, "select_stable_poles: sweep has no steps");
    std::vector<SelectedPole> selected;
    for (const PoleCluster& cluster : sweep.clusters) {
        if (!cluster.stable) continue;
        int best_si = -1;
        int best_pi = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (const auto& [si, pi] : cluster.members) {
            const SweptPole& pole = sweep.steps[static_cast<std::size_t>(si)]
                                        .poles[static_cast<std::size_t>(pi)];
            const double dist = std::abs(pole.frequency_hz - cluster.mean_frequency_hz);
            const bool better =
                dist < best_dist ||
                (dist == best_dist && best_si >= 0 &&
                 sweep.steps[static_cast<std::size_t>(si)].axis_value <
                     sweep.steps[static_cast<std::size_t>(best_si)].axis_value);
            if (better) {
                best_dist = dist;
                best_si = si;
                best_pi = pi;
            }
        }
        if (best_si < 0) continue;
        const SweptPole& pole = sweep.steps[static_cast<std::size_t>(best_si)]
                                    .poles[static_cast<std::size_t>(best_pi)];
        selected.push_back({pole.frequency_hz, pole.damping_ratio,
                            sweep.steps[static_cast<std::size_t>(best_si)].axis_value,
                            pole.mode});
    }
    std::sort(selected.begin(), selected.end(),
              [](const SelectedPole& a, const SelectedPole& b) {
                  return a.frequency_hz < b.frequency_hz;
              });
    return selected;
}

//-----------------------------------------------------------------------------
// Eigenvalue sensitivity
//-----------------------------------------------------------------------------

/// Transmission of a discrete-eigenvalue perturbation into the continuous
/// pole: ds = fs log(1 + dmu/mu). For small perturbations
/// |ds| ~ fs |dmu/mu|, so the continuous pole grows more sensitive as the
/// sampling frequency rises.
inline Complex eigenvalue_sensitivity(Complex mu, Complex delta_mu, double fs) {
    if (mu == Complex(0.0, 0.0))
        throw Error(errc::singular_eigenvalue, "eigenvalue_sensitivity: mu must be nonzero");
    if (fs <= 0.0)
        throw Error(errc::invalid_input, "eigenvalue_sensitivity: fs must be > 0");
    const Complex ratio = delta_mu / mu;
    if (std::abs(ratio) >= 1.0)
        throw Error(errc::perturbation_too_large,
                    "eigenvalue_sensitivity: |delta_mu / mu| must be < 1");
    return fs * std::log(1.0 + ratio);
}

} // namespace modalkit
