#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace netlasso {

enum class ErrorCode {
    EmptyData,
    ConstantColumn,
    IndexOutOfRange,
    MissingValue,
    RankDeficientCovariates,
    UnknownId,
    DuplicateId,
    SampleMismatch,
    NonFiniteInput,
    ExcludedPair,
    NoAllowedPairs,
    TargetUnreachable,
    RankDeficient,
    TooManyTerms,
    NonPositiveSE,
    InvalidPower,
    ModelTooLarge,
    InvalidArgument,
    ParseError,
    IoError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; `field` names the offending input
// (column, file, option) when there is one.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string field = {})
        : std::runtime_error(message), code_(code), field_(std::move(field)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& field() const noexcept { return field_; }

private:
    ErrorCode code_;
    std::string field_;
};

}  // namespace netlasso
