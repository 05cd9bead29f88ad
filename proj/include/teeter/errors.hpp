#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace teeter {

/// Base class of every error raised by the library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Unknown knob/outcome label, or arguments outside an operation's domain.
struct domain_error : error {
    using error::error;
};

/// Operator dimensions don't fit together.
struct structural_error : error {
    using error::error;
};

/// An input violates a type invariant (e.g. a non-PSD density operator).
struct validation_error : error {
    using error::error;
};

/// The requested case has no implementation on this path.
struct unsupported_case : error {
    using error::error;
};

struct accuracy_error : error {
    accuracy_error(const std::string& what, double achieved)
        : error(what), achieved_tolerance(achieved) {}
    double achieved_tolerance;
};

/// The wavepacket reached the edge of the simulation box.
struct domain_exhausted : error {
    domain_exhausted(const std::string& what, double last_valid)
        : error(what), last_valid_time(last_valid) {}
    double last_valid_time;
};

struct null_event_error : error {
    using error::error;
};

struct degenerate_state_error : error {
    using error::error;
};

struct symmetry_precondition_error : error {
    using error::error;
};

struct no_data_error : error {
    using error::error;
};

struct calibration_error : error {
    calibration_error(const std::string& what, std::vector<std::string> trace_lines)
        : error(what), trace(std::move(trace_lines)) {}
    std::vector<std::string> trace;
};

/// Bad configuration; `field` names the offending JSON path.
struct config_error : error {
    config_error(std::string field_path, const std::string& what)
        : error(field_path.empty() ? what : field_path + ": " + what), field(std::move(field_path)) {}
    std::string field;
};

}  // namespace teeter
