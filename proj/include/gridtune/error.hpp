#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gridtune {

enum class ErrorCode {
    invalid_dimension,
    invalid_batch,
    invalid_argument,
    oracle_failure,
    config,
    topology,
    infeasible_dispatch,
    invalid_parameter,
    divergence,
    checkpoint_mismatch,
    io,
};

/// Short machine-parsable identifier, e.g. "config" or "divergence".
const char* to_string(ErrorCode code);

/// Process exit status used by the command-line tool for an error category.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Non-finite objective value. Carries the point at which the oracle was queried.
class OracleFailure : public Error {
public:
    OracleFailure(std::vector<double> point, const std::string& message);

    const std::vector<double>& point() const noexcept { return point_; }

private:
    std::vector<double> point_;
};

/// A simulated state left its validity envelope.
class DivergenceError : public Error {
public:
    DivergenceError(double time, int bus, std::string state, const std::string& detail);

    double time() const noexcept { return time_; }
    int bus() const noexcept { return bus_; }
    const std::string& state() const noexcept { return state_; }

private:
    double time_;
    int bus_;
    std::string state_;
};

} // namespace gridtune
