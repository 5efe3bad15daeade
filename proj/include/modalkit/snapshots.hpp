#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "modalkit/errors.hpp"

namespace modalkit {

/// Uniformly sampled multichannel time history. Column j holds the state at
/// t = origin_time + j * dt; rows are channels.
struct SnapshotMatrix {
    Eigen::MatrixXd data;
    double dt = 0.0;
    std::vector<std::string> channel_labels;
    double origin_time = 0.0;

    SnapshotMatrix() = default;

    SnapshotMatrix(Eigen::MatrixXd data_, double dt_, std::vector<std::string> labels = {},
                   double origin_time_ = 0.0)
        : data(std::move(data_)), dt(dt_), channel_labels(std::move(labels)),
          origin_time(origin_time_) {
        if (dt <= 0.0) throw Error(errc::invalid_input, "snapshot matrix requires dt > 0");
        if (data.cols() < 2)
            throw Error(errc::insufficient_data, "snapshot matrix requires at least 2 samples");
        if (!data.allFinite())
            throw Error(errc::invalid_data, "snapshot matrix has non-finite entries");
        if (channel_labels.empty()) {
            channel_labels.reserve(static_cast<std::size_t>(data.rows()));
            for (Eigen::Index i = 0; i < data.rows(); ++i)
                channel_labels.push_back("ch" + std::to_string(i + 1));
        }
        if (static_cast<Eigen::Index>(channel_labels.size()) != data.rows())
            throw Error(errc::invalid_input, "channel label count does not match rows");
    }

    Eigen::Index channels() const { return data.rows(); }
    Eigen::Index samples() const { return data.cols(); }
    double sampling_rate_hz() const { return 1.0 / dt; }
};

/// One-step-shifted matrices (X, Y) feeding the propagator fit. With
/// augmentation the rows are doubled by stacking a shifted copy so that
/// real-valued standing-wave data spans a complex-pair subspace.
struct SnapshotPair {
    Eigen::MatrixXd x;
    Eigen::MatrixXd y;
    double dt = 0.0;
    bool augmented = false;

    Eigen::Index channels() const { return augmented ? x.rows() / 2 : x.rows(); }
};

/// Builds the shifted pair from a time history.
///
/// Plain:      X = [x_1 ... x_{n-1}],  Y = [x_2 ... x_n]
/// Augmented:  X = [x_1 ... x_{n-2}; x_2 ... x_{n-1}],
///             Y = [x_2 ... x_{n-1}; x_3 ... x_n]
inline SnapshotPair build_pair(const SnapshotMatrix& snap, bool augment) {
    const Eigen::Index n = snap.samples();
    const Eigen::Index m = snap.channels();
    SnapshotPair pair;
    pair.dt = snap.dt;
    pair.augmented = augment;
    if (!augment) {
        if (n < 3)
            throw Error(errc::insufficient_data, "build_pair needs at least 3 samples");
        pair.x = snap.data.leftCols(n - 1);
        pair.y = snap.data.rightCols(n - 1);
    } else {
        if (n < 4)
            throw Error(errc::insufficient_data, "augmented build_pair needs at least 4 samples");
        const Eigen::Index q = n - 2;
        pair.x.resize(2 * m, q);
        pair.y.resize(2 * m, q);
        pair.x.topRows(m) = snap.data.middleCols(0, q);
        pair.x.bottomRows(m) = snap.data.middleCols(1, q);
        pair.y.topRows(m) = snap.data.middleCols(1, q);
        pair.y.bottomRows(m) = snap.data.middleCols(2, q);
    }
    return pair;
}

/// Keeps every factor-th column starting at the first; dt scales by factor.
inline SnapshotMatrix decimate(const SnapshotMatrix& snap, int factor) {
    if (factor < 1) throw Error(errc::invalid_input, "decimation factor must be >= 1");
    if (factor == 1) return snap;
    const Eigen::Index n_out = (snap.samples() + factor - 1) / factor;
    if (n_out < 4)
        throw Error(errc::insufficient_data, "decimation leaves fewer than 4 samples");
    Eigen::MatrixXd out(snap.channels(), n_out);
    for (Eigen::Index j = 0; j < n_out; ++j) out.col(j) = snap.data.col(j * factor);
    return SnapshotMatrix(std::move(out), snap.dt * factor, snap.channel_labels,
                          snap.origin_time);
}

/// Subtracts the per-channel temporal mean. Step responses oscillate about a
/// nonzero offset that would otherwise surface as a unit eigenvalue.
inline SnapshotMatrix remove_mean(const SnapshotMatrix& snap) {
    Eigen::MatrixXd centered = snap.data.colwise() - snap.data.rowwise().mean();
    return SnapshotMatrix(std::move(centered), snap.dt, snap.channel_labels, snap.origin_time);
}

/// Selects the samples in [start_time, start_time + duration], both relative
/// to the record origin. duration <= 0 means "to the end of the record".
inline SnapshotMatrix slice_window(const SnapshotMatrix& snap, double start_time,
                                   double duration = -1.0) {
    const Eigen::Index n = snap.samples();
    Eigen::Index first = static_cast<Eigen::Index>(std::ceil(start_time / snap.dt - 1e-9));
    first = std::max<Eigen::Index>(first, 0);
    Eigen::Index last = n - 1;
    if (duration > 0.0) {
        last = static_cast<Eigen::Index>(std::floor((start_time + duration) / snap.dt + 1e-9));
        last = std::min(last, n - 1);
    }
    if (first > last || last - first + 1 < 2)
        throw Error(errc::insufficient_data, "window selects fewer than 2 samples");
    Eigen::MatrixXd out = snap.data.middleCols(first, last - first + 1);
    return SnapshotMatrix(std::move(out), snap.dt, snap.channel_labels,
                          snap.origin_time + static_cast<double>(first) * snap.dt);
}

//-----------------------------------------------------------------------------
// CSV ingestion
//-----------------------------------------------------------------------------

/// How to interpret the CSV: either name the time column, or declare dt and
/// treat every column as a channel.
struct CsvSchema {
    std::optional<std::string> time_column;
    std::optional<double> dt;

    static CsvSchema with_time_column(std::string name) {
        CsvSchema s;
        s.time_column = std::move(name);
        return s;
    }

    static CsvSchema with_dt(double dt) {
        CsvSchema s;
        s.dt = dt;
        return s;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

} // namespace detail

/// Reads a wide-layout CSV (header row, comma separator, '.' decimal point).
/// With a time column the spacing must be uniform within 1e-6 relative
/// jitter; dt is then the mean spacing.
inline SnapshotMatrix ingest_csv(const std::string& path, const CsvSchema& schema) {
    if (!schema.time_column && !schema.dt)
        throw Error(errc::invalid_input, "csv schema needs a time column or an explicit dt");
    if (schema.dt && *schema.dt <= 0.0)
        throw Error(errc::invalid_input, "csv schema dt must be > 0");

    std::ifstream in(path);
    if (!in) throw Error(errc::io_failure, "cannot open csv file: " + path);

    std::string line;
    if (!std::getline(in, line))
        throw Error(errc::invalid_data, "csv file is empty: " + path);
    const std::vector<std::string> header = detail::split_csv_line(line);
    if (header.empty()) throw Error(errc::invalid_data, "csv header row is empty");

    int time_col = -1;
    if (schema.time_column) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == *schema.time_column) time_col = static_cast<int>(i);
        if (time_col < 0)
            throw Error(errc::invalid_input,
                        "time column '" + *schema.time_column + "' not found in header");
    }

    std::vector<std::string> labels;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (static_cast<int>(i) != time_col) labels.push_back(header[i]);
    if (labels.empty()) throw Error(errc::invalid_data, "csv has no channel columns");

    std::vector<double> times;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw Error(errc::invalid_data, "csv row " + std::to_string(line_no) + " has " +
                                                std::to_string(cells.size()) + " cells, expected " +
                                                std::to_string(header.size()));
        std::vector<double> row;
        row.reserve(labels.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            double value = 0.0;
            try {
                std::size_t consumed = 0;
                value = std::stod(cells[i], &consumed);
                if (consumed != cells[i].size()) throw std::invalid_argument("trailing junk");
            } catch (const std::exception&) {
                throw Error(errc::invalid_data, "csv cell at row " + std::to_string(line_no) +
                                                    ", column " + std::to_string(i + 1) +
                                                    " is not a number: '" + cells[i] + "'");
            }
            if (!std::isfinite(value))
                throw Error(errc::invalid_data, "csv cell at row " + std::to_string(line_no) +
                                                    ", column " + std::to_string(i + 1) +
                                                    " is not finite");
            if (static_cast<int>(i) == time_col)
                times.push_back(value);
            else
                row.push_back(value);
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2)
        throw Error(errc::insufficient_data, "csv needs at least 2 data rows");

    double dt = 0.0;
    double origin = 0.0;
    if (time_col >= 0) {
        double mean_step = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
        if (mean_step <= 0.0)
            throw Error(errc::non_uniform_sampling, "csv time column is not increasing");
        for (std::size_t j = 1; j < times.size(); ++j) {
            double step = times[j] - times[j - 1];
            if (std::abs(step - mean_step) > 1e-6 * std::abs(mean_step))
                throw Error(errc::non_uniform_sampling,
                            "csv time column spacing deviates at row " + std::to_string(j + 2) +
                                " (step " + std::to_string(step) + " vs mean " +
                                std::to_string(mean_step) + ")");
        }
        dt = mean_step;
        origin = times.front();
    } else {
        dt = *schema.dt;
    }

    Eigen::MatrixXd data(labels.size(), rows.size());
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t i = 0; i < labels.size(); ++i) data(i, j) = rows[j][i];
    return SnapshotMatrix(std::move(data), dt, labels, origin);
}

} // namespace modalkit
