#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skillchair {

enum class ErrorCode {
  // sensor-core
  NonFiniteChannel,
  NegativeTimestamp,
  MalformedRecord,
  UnsortedLog,
  // ingest-gateway
  SchemaError,
  StorageError,
  UnknownSession,
  AlreadyClosed,
  CorruptLog,
  GatewayUnreachable,
  // chair-sim
  InvalidProfile,
  InvalidSpec,
  // feature-extract
  EmptySeries,
  InsufficientRows,
  // learners
  NonBinaryLabels,
  SingleClassTraining,
  KTooLarge,
  // evaluator
  InfeasibleSplit,
  SingleClassLabels,
  DegenerateFold,
  // cli
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a code and, where one applies,
// the name of the offending field, player or file.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, std::string detail, std::string subject = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

private:
  ErrorCode code_;
  std::string subject_;
};

}  // namespace skillchair
