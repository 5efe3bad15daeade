#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "modalkit/dmd.hpp"
#include "modalkit/errors.hpp"
#include "modalkit/itd.hpp"
#include "modalkit/lscf.hpp"
#include "modalkit/modal.hpp"
#include "modalkit/snapshots.hpp"
#include "modalkit/stability.hpp"

namespace modalkit {

using json = nlohmann::json;

namespace detail {

/// Shortest representation that round-trips a double exactly.
inline std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

} // namespace detail

/// Writes a file atomically: the content lands under a temporary name and is
/// renamed into place, so readers never observe a partial file.
inline void atomic_write_text(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(errc::io_failure, "cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw Error(errc::io_failure, "write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) throw Error(errc::io_failure, "rename failed for " + path + ": " + ec.message());
}

//-----------------------------------------------------------------------------
// Snapshot CSV
//-----------------------------------------------------------------------------

/// Wide layout: time column "t" followed by one column per channel.
inline std::string snapshot_csv(const SnapshotMatrix& snap) {
    std::string out = "t";
    for (const std::string& label : snap.channel_labels) out += "," + label;
    out += "\n";
    for (Eigen::Index j = 0; j < snap.samples(); ++j) {
        out += detail::format_double(snap.origin_time + static_cast<double>(j) * snap.dt);
        for (Eigen::Index i = 0; i < snap.channels(); ++i)
            out += "," + detail::format_double(snap.data(i, j));
        out += "\n";
    }
    return out;
}

inline void write_snapshot_csv(const SnapshotMatrix& snap, const std::string& path) {
    atomic_write_text(path, snapshot_csv(snap));
}

//-----------------------------------------------------------------------------
// FRF CSV
//-----------------------------------------------------------------------------

/// Columns: freq_hz then re:<ch>, im:<ch>, w:<ch> triples per channel.
inline std::string frf_csv(const FrfSet& frf, const std::vector<std::string>& labels = {}) {
    std::vector<std::string> names = labels;
    if (names.empty())
        for (Eigen::Index o = 0; o < frf.channels(); ++o)
            names.push_back("ch" + std::to_string(o + 1));
    std::string out = "freq_hz";
    for (const std::string& name : names)
        out += ",re:" + name + ",im:" + name + ",w:" + name;
    out += "\n";
    for (Eigen::Index k = 0; k < frf.lines(); ++k) {
        out += detail::format_double(frf.frequencies_hz(k));
        for (Eigen::Index o = 0; o < frf.channels(); ++o) {
            out += "," + detail::format_double(frf.responses(o, k).real());
            out += "," + detail::format_double(frf.responses(o, k).imag());
            out += "," + detail::format_double(frf.weights(o, k));
        }
        out += "\n";
    }
    return out;
}

inline void write_frf_csv(const FrfSet& frf, const std::string& path,
                          const std::vector<std::string>& labels = {}) {
    atomic_write_text(path, frf_csv(frf, labels));
}

inline FrfSet read_frf_csv(const std::string& path, double sampling_period) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io_failure, "cannot open frf csv: " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(errc::invalid_data, "frf csv is empty");
    const auto header = detail::split_csv_line(line);
    if (header.size() < 4 || (header.size() - 1) % 3 != 0)
        throw Error(errc::invalid_data, "frf csv header must be freq_hz plus re/im/w triples");
    const Eigen::Index channels = static_cast<Eigen::Index>((header.size() - 1) / 3);

    std::vector<double> freqs;
    std::vector<std::vector<double>> cells;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto row = detail::split_csv_line(line);
        if (row.size() != header.size())
            throw Error(errc::invalid_data, "frf csv row width mismatch");
        std::vector<double> values;
        for (const std::string& cell : row) values.push_back(std::stod(cell));
        freqs.push_back(values[0]);
        values.erase(values.begin());
        cells.push_back(std::move(values));
    }
    FrfSet frf;
    frf.sampling_period = sampling_period;
    frf.frequencies_hz = Eigen::Map<Eigen::VectorXd>(freqs.data(),
                                                     static_cast<Eigen::Index>(freqs.size()));
    frf.responses.resize(channels, frf.frequencies_hz.size());
    frf.weights.resize(channels, frf.frequencies_hz.size());
    for (Eigen::Index k = 0; k < frf.frequencies_hz.size(); ++k) {
        for (Eigen::Index o = 0; o < channels; ++o) {
            const std::size_t base = static_cast<std::size_t>(3 * o);
            frf.responses(o, k) = Complex(cells[static_cast<std::size_t>(k)][base],
                                          cells[static_cast<std::size_t>(k)][base + 1]);
            frf.weights(o, k) = cells[static_cast<std::size_t>(k)][base + 2];
        }
    }
    frf.validate();
    return frf;
}

//-----------------------------------------------------------------------------
// Sweep CSV
//-----------------------------------------------------------------------------

/// One row per identified pole. The stable flag is the per-pole recurrence
/// tag on an order sweep and the containing cluster's stability on a
/// sampling-frequency sweep; cluster_id is -1 for unclustered poles.
inline std::string sweep_csv(const StabilitySweep& sweep) {
    const bool order_axis = sweep.axis_name == "polynomial_order";
    std::string out = order_axis ? "order" : "sampling_frequency_hz";
    out += ",frequency_hz,zeta,stable_flag,cluster_id\n";

    // pole -> cluster lookup
    std::vector<std::vector<int>> cluster_of(sweep.steps.size());
    for (std::size_t si = 0; si < sweep.steps.size(); ++si)
        cluster_of[si].assign(sweep.steps[si].poles.size(), -1);
    for (int ci = 0; ci < static_cast<int>(sweep.clusters.size()); ++ci)
        for (const auto& [si, pi] : sweep.clusters[static_cast<std::size_t>(ci)].members)
            cluster_of[static_cast<std::size_t>(si)][static_cast<std::size_t>(pi)] = ci;

    for (std::size_t si = 0; si < sweep.steps.size(); ++si) {
        for (std::size_t pi = 0; pi < sweep.steps[si].poles.size(); ++pi) {
            const SweptPole& pole = sweep.steps[si].poles[pi];
            const int cid = cluster_of[si][pi];
            bool stable_flag = pole.recurrent;
            if (!order_axis)
                stable_flag = cid >= 0 &&
                              sweep.clusters[static_cast<std::size_t>(cid)].stable;
            out += detail::format_double(sweep.steps[si].axis_value);
            out += "," + detail::format_double(pole.frequency_hz);
            out += "," + detail::format_double(pole.damping_ratio);
            out += stable_flag ? ",1" : ",0";
            out += "," + std::to_string(cid) + "\n";
        }
    }
    return out;
}

inline void write_sweep_csv(const StabilitySweep& sweep, const std::string& path) {
    atomic_write_text(path, sweep_csv(sweep));
}

//-----------------------------------------------------------------------------
// Result JSON
//-----------------------------------------------------------------------------

inline json complex_to_json(const Complex& z) {
    return json{{"re", z.real()}, {"im", z.imag()}};
}

inline json options_to_json(const DmdOptions& options) {
    json truncation;
    switch (options.truncation.kind) {
        case TruncationPolicy::Kind::full_rank:
            truncation = {{"kind", "full"}};
            break;
        case TruncationPolicy::Kind::fixed_rank:
            truncation = {{"kind", "rank"}, {"rank", options.truncation.rank}};
            break;
        case TruncationPolicy::Kind::relative_threshold:
            truncation = {{"kind", "rel"}, {"threshold", options.truncation.threshold}};
            break;
    }
    return json{{"truncation", truncation},
                {"augment", options.augment},
                {"sort", options.sort == DmdOptions::Sort::by_frequency ? "by-frequency"
                                                                        : "by-amplitude"}};
}

inline json result_to_json(const DmdResult& result,
                           const std::vector<std::string>& channel_labels = {}) {
    json j;
    j["method"] = "dmd";
    j["dt"] = result.dt;
    j["retained_rank"] = result.retained_rank;
    j["discarded_energy"] = result.discarded_energy;
    j["rank_clamped"] = result.rank_clamped;
    j["options"] = options_to_json(result.options);
    j["eigenvalues"] = json::array();
    j["continuous_eigenvalues"] = json::array();
    j["frequencies_hz"] = json::array();
    j["damping_ratios"] = json::array();
    j["initial_amplitudes"] = json::array();
    j["modes"] = json::array();
    for (int i = 0; i < result.mode_count(); ++i) {
        j["eigenvalues"].push_back(complex_to_json(result.discrete_eigs(i)));
        j["continuous_eigenvalues"].push_back(complex_to_json(result.continuous_eigs(i)));
        j["frequencies_hz"].push_back(result.frequencies_hz(i));
        if (std::isfinite(result.damping_ratios(i)))
            j["damping_ratios"].push_back(result.damping_ratios(i));
        else
            j["damping_ratios"].push_back(nullptr);
        j["initial_amplitudes"].push_back(complex_to_json(result.initial_amplitudes(i)));
        json mode = json::array();
        for (Eigen::Index c = 0; c < result.modes.rows(); ++c)
            mode.push_back(complex_to_json(result.modes(c, i)));
        j["modes"].push_back(mode);
    }
    if (!channel_labels.empty()) j["channel_labels"] = channel_labels;
    return j;
}

inline json result_to_json(const ItdResult& result,
                           const std::vector<std::string>& channel_labels = {}) {
    json j;
    j["method"] = "itd";
    j["dt"] = result.dt;
    j["eigenvalues"] = json::array();
    j["frequencies_hz"] = json::array();
    j["damping_ratios"] = json::array();
    j["modes"] = json::array();
    for (int i = 0; i < result.mode_count(); ++i) {
        j["eigenvalues"].push_back(complex_to_json(result.discrete_eigs(i)));
        j["frequencies_hz"].push_back(result.frequencies_hz(i));
        if (std::isfinite(result.damping_ratios(i)))
            j["damping_ratios"].push_back(result.damping_ratios(i));
        else
            j["damping_ratios"].push_back(nullptr);
        json mode = json::array();
        for (Eigen::Index c = 0; c < result.modes.rows(); ++c)
            mode.push_back(complex_to_json(result.modes(c, i)));
        j["modes"].push_back(mode);
    }
    if (!channel_labels.empty()) j["channel_labels"] = channel_labels;
    return j;
}

inline json ground_truth_to_json(const Eigen::VectorXd& frequencies_hz,
                                 const Eigen::VectorXd& damping_ratios,
                                 const Eigen::MatrixXd& mode_matrix,
                                 const std::vector<std::string>& channel_labels = {}) {
    json j;
    j["method"] = "ground-truth";
    j["frequencies_hz"] = json::array();
    j["damping_ratios"] = json::array();
    j["modes"] = json::array();
    for (Eigen::Index i = 0; i < frequencies_hz.size(); ++i) {
        j["frequencies_hz"].push_back(frequencies_hz(i));
        j["damping_ratios"].push_back(damping_ratios(i));
        json mode = json::array();
        for (Eigen::Index c = 0; c < mode_matrix.rows(); ++c)
            mode.push_back(complex_to_json(Complex(mode_matrix(c, i), 0.0)));
        j["modes"].push_back(mode);
    }
    if (!channel_labels.empty()) j["channel_labels"] = channel_labels;
    return j;
}

//-----------------------------------------------------------------------------
// Mode sets for comparison
//-----------------------------------------------------------------------------

/// Uniform view of a result or ground-truth file: oscillatory modes sorted
/// ascending in frequency, conjugate pairs collapsed to one entry.
struct ModeSet {
    std::string method;
    Eigen::VectorXd frequencies_hz;
    Eigen::VectorXd damping_ratios;
    Eigen::MatrixXcd modes;

    int count() const { return static_cast<int>(frequencies_hz.size()); }
};

inline ModeSet mode_set_from_json(const json& j) {
    if (!j.contains("frequencies_hz") || !j.contains("modes"))
        throw Error(errc::invalid_data, "result json lacks frequencies_hz/modes");
    const bool is_truth = j.value("method", "") == "ground-truth";

    std::vector<int> keep;
    const auto& freqs = j["frequencies_hz"];
    for (int i = 0; i < static_cast<int>(freqs.size()); ++i) {
        if (is_truth) {
            keep.push_back(i);
            continue;
        }
        // keep the positive-imaginary member of each conjugate pair
        const auto& eig = j.contains("continuous_eigenvalues") ? j["continuous_eigenvalues"][i]
                                                               : j["eigenvalues"][i];
        if (eig["im"].get<double>() > 0.0) keep.push_back(i);
    }
    if (keep.empty()) throw Error(errc::invalid_data, "result json has no oscillatory modes");

    const Eigen::Index channels =
        static_cast<Eigen::Index>(j["modes"][static_cast<std::size_t>(keep[0])].size());
    ModeSet set;
    set.method = j.value("method", "unknown");
    set.frequencies_hz.resize(static_cast<Eigen::Index>(keep.size()));
    set.damping_ratios.resize(static_cast<Eigen::Index>(keep.size()));
    set.modes.resize(channels, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t out = 0; out < keep.size(); ++out) {
        const int i = keep[out];
        set.frequencies_hz(static_cast<Eigen::Index>(out)) = freqs[i].get<double>();
        const auto& zeta = j["damping_ratios"][i];
        set.damping_ratios(static_cast<Eigen::Index>(out)) =
            zeta.is_null() ? std::numeric_limits<double>::quiet_NaN() : zeta.get<double>();
        const auto& mode = j["modes"][i];
        for (Eigen::Index c = 0; c < channels; ++c)
            set.modes(c, static_cast<Eigen::Index>(out)) =
                Complex(mode[static_cast<std::size_t>(c)]["re"].get<double>(),
                        mode[static_cast<std::size_t>(c)]["im"].get<double>());
    }

    // ascending frequency
    std::vector<int> order(keep.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return set.frequencies_hz(a) < set.frequencies_hz(b);
    });
    ModeSet sorted = set;
    for (std::size_t i = 0; i < order.size(); ++i) {
        sorted.frequencies_hz(static_cast<Eigen::Index>(i)) = set.frequencies_hz(order[i]);
        sorted.damping_ratios(static_cast<Eigen::Index>(i)) = set.damping_ratios(order[i]);
        sorted.modes.col(static_cast<Eigen::Index>(i)) = set.modes.col(order[i]);
    }
    return sorted;
}

inline ModeSet load_mode_set(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io_failure, "cannot open result json: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(errc::invalid_data, "cannot parse json " + path + ": " + e.what());
    }
    return mode_set_from_json(j);
}

//-----------------------------------------------------------------------------
// MAC and error tables
//-----------------------------------------------------------------------------

inline std::string mac_csv(const MacMatrix& mac) {
    std::string out = "mac_pct";
    for (const std::string& label : mac.column_labels) out += "," + label;
    out += "\n";
    for (Eigen::Index i = 0; i < mac.values.rows(); ++i) {
        out += mac.row_labels[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < mac.values.cols(); ++j) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), ",%.4f", 100.0 * mac.values(i, j));
            out += buf;
        }
        out += "\n";
    }
    return out;
}

/// Percentage error table between an estimated mode set and a reference,
/// paired index by index after the ascending-frequency sort.
inline std::string error_table_csv(const ModeSet& estimate, const ModeSet& reference) {
    std::string out = "mode,f_ref_hz,f_est_hz,f_error_pct,zeta_ref,zeta_est,zeta_error_pct\n";
    const int n = std::min(estimate.count(), reference.count());
    for (int i = 0; i < n; ++i) {
        const double f_ref = reference.frequencies_hz(i);
        const double f_est = estimate.frequencies_hz(i);
        const double z_ref = reference.damping_ratios(i);
        const double z_est = estimate.damping_ratios(i);
        out += std::to_string(i + 1);
        out += "," + detail::format_double(f_ref);
        out += "," + detail::format_double(f_est);
        out += "," + detail::format_double(100.0 * std::abs(f_est - f_ref) / std::abs(f_ref));
        out += "," + detail::format_double(z_ref);
        out += "," + detail::format_double(z_est);
        out += "," + detail::format_double(100.0 * std::abs(z_est - z_ref) / std::abs(z_ref));
        out += "\n";
    }
    return out;
}

} // namespace modalkit
