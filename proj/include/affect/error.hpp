#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affect {

enum class Errc {
    MissingColumn,
    RowLengthMismatch,
    NonNumericCell,
    EmptyFile,
    FileNotFound,
    AllFramesInvalid,
    UnknownSubject,
    InvalidPartition,
    UnknownChannel,
    BinaryChannelNotAllowed,
    LengthMismatch,
    NonBinaryValue,
    OutOfRange,
    InvalidArgument,
    WindowTooShort,
    SeriesTooShort,
    WindowShorterThanFilter,
    TooManyLevels,
    DelayNotFrameAligned,
    TooFewRows,
    ColumnCountMismatch,
    TooFewSamples,
    AllFeaturesDropped,
    ShapeMismatch,
    DivergedToNonFinite,
    ConstantInput,
    InvalidConfig,
    ParseError,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message);

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

}  // namespace affect
