#include "gridtune/error.hpp"

#include <sstream>
#include <utility>

namespace gridtune {

const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_dimension: return "invalid_dimension";
    case ErrorCode::invalid_batch: return "invalid_batch";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::oracle_failure: return "oracle_failure";
    case ErrorCode::config: return "config";
    case ErrorCode::topology: return "topology";
    case ErrorCode::infeasible_dispatch: return "infeasible_dispatch";
    case ErrorCode::invalid_parameter: return "invalid_parameter";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::checkpoint_mismatch: return "checkpoint_mismatch";
    case ErrorCode::io: return "io";
    }
    return "unknown";
}

int exit_status(ErrorCode code)
{
    switch (code) {
    case ErrorCode::config:
    case ErrorCode::topology:
    case ErrorCode::infeasible_dispatch:
        return 2;
    case ErrorCode::divergence:
    case ErrorCode::oracle_failure:
    case ErrorCode::invalid_parameter:
        return 3;
    case ErrorCode::checkpoint_mismatch:
        return 4;
    default:
        return 1;
    }
}

Error::Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

OracleFailure::OracleFailure(std::vector<double> point, const std::string& message)
    : Error(ErrorCode::oracle_failure, message), point_(std::move(point))
{
}

namespace {
std::string divergence_message(double time, int bus, const std::string& state, const std::string& detail)
{
    std::ostringstream os;
    os << "simulation diverged at t=" << time << " s, bus " << bus << ", state " << state;
    if (!detail.empty())
        os << ": " << detail;
    return os.str();
}
} // namespace

DivergenceError::DivergenceError(double time, int bus, std::string state, const std::string& detail)
    : Error(ErrorCode::divergence, divergence_message(time, bus, state, detail)),
      time_(time),
      bus_(bus),
      state_(std::move(state))
{
}

} // namespace gridtune
