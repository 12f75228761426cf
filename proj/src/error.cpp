#include "affect/error.hpp"

namespace affect {

std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::MissingColumn: return "MissingColumn";
        case Errc::RowLengthMismatch: return "RowLengthMismatch";
        case Errc::NonNumericCell: return "NonNumericCell";
        case Errc::EmptyFile: return "EmptyFile";
        case Errc::FileNotFound: return "FileNotFound";
        case Errc::AllFramesInvalid: return "AllFramesInvalid";
        case Errc::UnknownSubject: return "UnknownSubject";
        case Errc::InvalidPartition: return "InvalidPartition";
        case Errc::UnknownChannel: return "UnknownChannel";
        case Errc::BinaryChannelNotAllowed: return "BinaryChannelNotAllowed";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::NonBinaryValue: return "NonBinaryValue";
        case Errc::OutOfRange: return "OutOfRange";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::WindowTooShort: return "WindowTooShort";
        case Errc::SeriesTooShort: return "SeriesTooShort";
        case Errc::WindowShorterThanFilter: return "WindowShorterThanFilter";
        case Errc::TooManyLevels: return "TooManyLevels";
        case Errc::DelayNotFrameAligned: return "DelayNotFrameAligned";
        case Errc::TooFewRows: return "TooFewRows";
        case Errc::ColumnCountMismatch: return "ColumnCountMismatch";
        case Errc::TooFewSamples: return "TooFewSamples";
        case Errc::AllFeaturesDropped: return "AllFeaturesDropped";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::DivergedToNonFinite: return "DivergedToNonFinite";
        case Errc::ConstantInput: return "ConstantInput";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::ParseError: return "ParseError";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace affect
