#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace alearn {

enum class ErrorCode {
  DuplicateId,
  EmptyText,
  UnknownLabel,
  SchemaTooSmall,
  MissingGold,
  EmptyCorpus,
  EmptyVocabulary,
  DimMismatch,
  EmptyBatch,
  InvalidDistribution,
  InvalidBatchSize,
  InvalidConfig,
  EmptyEval,
  BudgetExhausted,
  PoolExhausted,
  NotInPool,
  LengthMismatch,
  IndexOutOfRange,
  BackendUnavailable,
  BackendProtocolError,
  NoHints,
  Io,
  Parse,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (HTTP layer, CLI) can map it to a status or exit code.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

}  // namespace alearn
