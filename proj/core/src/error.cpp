#include "eventcube/error.hpp"

namespace eventcube {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MissingHeader: return "MissingHeader";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::NonPositiveModality: return "NonPositiveModality";
    case Errc::TooFewEvents: return "TooFewEvents";
    case Errc::DuplicateSeriesId: return "DuplicateSeriesId";
    case Errc::UnresolvablePath: return "UnresolvablePath";
    case Errc::MalformedEntry: return "MalformedEntry";
    case Errc::TooSmall: return "TooSmall";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::DegenerateModel: return "DegenerateModel";
    case Errc::IoFailure: return "IoFailure";
    case Errc::BadMagic: return "BadMagic";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::ShapeInferenceFailure: return "ShapeInferenceFailure";
    case Errc::EmptySplit: return "EmptySplit";
    case Errc::DivergedLoss: return "DivergedLoss";
    case Errc::ArchMismatch: return "ArchMismatch";
    case Errc::MissingTensor: return "MissingTensor";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::UnknownId: return "UnknownId";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::DegenerateLabels: return "DegenerateLabels";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::ConstantTruth: return "ConstantTruth";
    case Errc::EmptyEmbedding: return "EmptyEmbedding";
    case Errc::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

namespace {
std::string format_message(Errc code, const std::string& what) {
  std::string msg(errc_name(code));
  if (!what.empty()) {
    msg += ": ";
    msg += what;
  }
  return msg;
}
}  // namespace

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(format_message(code, what)), code_(code) {}

Error::Error(Errc code, const std::string& what, std::size_t line)
    : std::runtime_error(format_message(code, what + " (line " + std::to_string(line) + ")")),
      code_(code),
      line_(line) {}

Error::Error(Raw, Errc code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

Error Error::with_series(std::string series_id) const {
  Error copy(Raw{}, code_, std::string(what()) + " [series " + series_id + "]");
  copy.line_ = line_;
  copy.series_id_ = std::move(series_id);
  return copy;
}

}  // namespace eventcube
