#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace gamtalk {

enum class ErrorCode {
    OutOfDomain,
    UnknownCategory,
    NonFinite,
    ZeroDensity,
    InvalidGraph,
    ParseError,
    NonContiguousBins,
    EmptyDataset,
    SingleClassLabels,
    SchemaMismatch,
    BudgetTooSmall,
    NotACoarsening,
    DegenerateDomain,
    BudgetExceeded,
    Transport,
    RateLimited,
    MalformedResponse,
    MockMiss,
    SurpriseParseError,
    Precondition,
    Io,
    InvalidConfig,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library is reported as an Error carrying a code and
/// an optional JSON object with machine-readable context (feature name, byte
/// offset, retry count, raw model output, ...).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, nlohmann::ordered_json details = {});

    ErrorCode code() const noexcept { return code_; }
    const nlohmann::ordered_json& details() const noexcept { return details_; }

    /// {"error": "<Code>", "message": "...", "details": {...}}
    nlohmann::ordered_json to_json() const;

private:
    ErrorCode code_;
    nlohmann::ordered_json details_;
};

} // namespace gamtalk
