#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "modalkit/errors.hpp"
#include "modalkit/numkit.hpp"

namespace modalkit {

/// One identified pole inside a sweep step.
struct SweptPole {
    double frequency_hz = 0.0;
    double damping_ratio = 0.0;
    double amplitude = 0.0;     ///< contribution magnitude, used for ranking
    std::string source;         ///< method tag, e.g. "dmd", "itd", "lscf"
    Eigen::VectorXcd mode;      ///< physical mode shape, may be empty
    bool pole_stable = true;    ///< Re(s) <= 0
    bool recurrent = false;     ///< matched a pole of the previous sweep step
};

/// Poles identified at one sweep position (sampling frequency or order).
struct SweepStep {
    double axis_value = 0.0;
    std::vector<SweptPole> poles;
};

/// Group of poles that recur across the sweep axis within a frequency
/// tolerance. `members` holds (step index, pole index) pairs.
struct PoleCluster {
    double mean_frequency_hz = 0.0;
    double mean_damping_ratio = 0.0;
    int member_count = 0;
    double frequency_spread = 0.0;
    bool stable = false;
    std::vector<std::pair<int, int>> members;
};

/// Poles collected across a sweep axis together with their clustering.
struct StabilitySweep {
    std::string axis_name; ///< "sampling_frequency_hz" or "polynomial_order"
    std::vector<double> axis_values;
    std::vector<SweepStep> steps;
    std::vector<PoleCluster> clusters;
};

namespace detail {

/// Greedy frequency clustering: poles are visited in (step, pole) order and
/// attached to the first cluster whose running mean frequency lies within
/// the relative tolerance; otherwise they seed a new cluster. Clusters are
/// returned sorted by mean frequency.
inline std::vector<PoleCluster> cluster_poles(const std::vector<SweepStep>& steps,
                                              double relative_tolerance) {
    struct Accum {
        double freq_sum = 0.0;
        double zeta_sum = 0.0;
        double fmin = 0.0;
        double fmax = 0.0;
        std::vector<std::pair<int, int>> members;
    };
    std::vector<Accum> accums;
    for (int si = 0; si < static_cast<int>(steps.size()); ++si) {
        for (int pi = 0; pi < static_cast<int>(steps[si].poles.size()); ++pi) {
            const double f = steps[si].poles[pi].frequency_hz;
            int best = -1;
            double best_dist = std::numeric_limits<double>::infinity();
            for (int c = 0; c < static_cast<int>(accums.size()); ++c) {
                const double mean = accums[c].freq_sum / accums[c].members.size();
                const double dist = std::abs(f - mean);
                if (dist <= relative_tolerance * mean && dist < best_dist) {
                    best = c;
                    best_dist = dist;
                }
            }
            if (best < 0) {
                Accum a;
                a.fmin = a.fmax = f;
                accums.push_back(a);
                best = static_cast<int>(accums.size()) - 1;
            }
            Accum& a = accums[best];
            a.freq_sum += f;
            a.zeta_sum += steps[si].poles[pi].damping_ratio;
            a.fmin = a.members.empty() ? f : std::min(a.fmin, f);
            a.fmax = a.members.empty() ? f : std::max(a.fmax, f);
            a.members.emplace_back(si, pi);
        }
    }
    std::vector<PoleCluster> clusters;
    clusters.reserve(accums.size());
    for (const Accum& a : accums) {
        PoleCluster c;
        c.member_count = static_cast<int>(a.members.size());
        c.mean_frequency_hz = a.freq_sum / c.member_count;
        c.mean_damping_ratio = a.zeta_sum / c.member_count;
        c.frequency_spread = a.fmax - a.fmin;
        c.members = a.members;
        clusters.push_back(std::move(c));
    }
    std::sort(clusters.begin(), clusters.end(), [](const PoleCluster& a, const PoleCluster& b) {
        return a.mean_frequency_hz < b.mean_frequency_hz;
    });
    return clusters;
}

/// True when the cluster has a member in at least `fraction` of the listed
/// step indices.
inline bool appears_in_fraction(const PoleCluster& cluster, const std::vector<int>& eligible,
                                double fraction) {
    if (eligible.empty()) return false;
    int hit = 0;
    for (int step : eligible) {
        bool found = false;
        for (const auto& [si, pi] : cluster.members)
            if (si == step) found = true;
        if (found) ++hit;
    }
    return static_cast<double>(hit) >= fraction * static_cast<double>(eligible.size());
}

} // namespace detail

} // namespace modalkit
