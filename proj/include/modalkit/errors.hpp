#pragma once

#include <stdexcept>
#include <string>

namespace modalkit {

/// Error classes raised by the library. Each class maps to a distinct
/// process exit code so scripted runs can tell failure modes apart.
enum class errc {
    invalid_input,
    no_signal,
    over_truncation,
    insufficient_data,
    non_uniform_sampling,
    invalid_data,
    not_underdamped,
    unsupported_damping,
    rank_deficient,
    singular_eigenvalue,
    incompatible_records,
    segmentation,
    ill_conditioned_fit,
    undefined_mac,
    invalid_sweep,
    perturbation_too_large,
    decimation,
    incompatible_modes,
    io_failure,
    usage,
};

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    errc code() const { return code_; }

private:
    errc code_;
};

/// Stable nonzero exit code for an error class. 0 is reserved for success.
inline int exit_code(errc code) {
    switch (code) {
        case errc::usage: return 2;
        case errc::io_failure: return 3;
        case errc::invalid_input: return 10;
        case errc::no_signal: return 11;
        case errc::over_truncation: return 12;
        case errc::insufficient_data: return 13;
        case errc::non_uniform_sampling: return 14;
        case errc::invalid_data: return 15;
        case errc::not_underdamped: return 16;
        case errc::unsupported_damping: return 17;
        case errc::rank_deficient: return 18;
        case errc::singular_eigenvalue: return 19;
        case errc::incompatible_records: return 20;
        case errc::segmentation: return 21;
        case errc::ill_conditioned_fit: return 22;
        case errc::undefined_mac: return 23;
        case errc::invalid_sweep: return 24;
        case errc::perturbation_too_large: return 25;
        case errc::decimation: return 26;
        case errc::incompatible_modes: return 27;
    }
    return 1;
}

} // namespace modalkit
