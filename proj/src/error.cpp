#include "skillchair/error.hpp"

namespace skillchair {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFiniteChannel: return "NonFiniteChannel";
    case ErrorCode::NegativeTimestamp: return "NegativeTimestamp";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::UnsortedLog: return "UnsortedLog";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::StorageError: return "StorageError";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::AlreadyClosed: return "AlreadyClosed";
    case ErrorCode::CorruptLog: return "CorruptLog";
    case ErrorCode::GatewayUnreachable: return "GatewayUnreachable";
    case ErrorCode::InvalidProfile: return "InvalidProfile";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::InsufficientRows: return "InsufficientRows";
    case ErrorCode::NonBinaryLabels: return "NonBinaryLabels";
    case ErrorCode::SingleClassTraining: return "SingleClassTraining";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::InfeasibleSplit: return "InfeasibleSplit";
    case ErrorCode::SingleClassLabels: return "SingleClassLabels";
    case ErrorCode::DegenerateFold: return "DegenerateFold";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& detail, const std::string& subject) {
  std::string msg(to_string(code));
  if (!subject.empty()) {
    msg += "(" + subject + ")";
  }
  if (!detail.empty()) {
    msg += ": " + detail;
  }
  return msg;
}

}  // namespace

Error::Error(ErrorCode code, std::string detail, std::string subject)
    : std::runtime_error(compose(code, detail, subject)), code_(code), subject_(std::move(subject)) {}

}  // namespace skillchair
