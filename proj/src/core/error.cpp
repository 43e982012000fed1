#include "gamtalk/error.hpp"

namespace gamtalk {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ZeroDensity: return "ZeroDensity";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonContiguousBins: return "NonContiguousBins";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::SingleClassLabels: return "SingleClassLabels";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::BudgetTooSmall: return "BudgetTooSmall";
    case ErrorCode::NotACoarsening: return "NotACoarsening";
    case ErrorCode::DegenerateDomain: return "DegenerateDomain";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::Transport: return "Transport";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::MockMiss: return "MockMiss";
    case ErrorCode::SurpriseParseError: return "SurpriseParseError";
    case ErrorCode::Precondition: return "Precondition";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, nlohmann::ordered_json details)
    : std::runtime_error(message), code_(code), details_(std::move(details))
{
}

nlohmann::ordered_json Error::to_json() const
{
    nlohmann::ordered_json j;
    j["error"] = std::string(to_string(code_));
    j["message"] = what();
    j["details"] = details_.is_null() ? nlohmann::ordered_json::object() : details_;
    return j;
}

} // namespace gamtalk
