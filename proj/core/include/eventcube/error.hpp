#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace eventcube {

enum class Errc {
  // ingest
  MissingHeader,
  MalformedRow,
  EmptyFile,
  NonFiniteValue,
  NonPositiveModality,
  TooFewEvents,
  DuplicateSeriesId,
  UnresolvablePath,
  MalformedEntry,
  TooSmall,
  // datagen
  OutOfRange,
  DegenerateModel,
  IoFailure,
  // tensor / checkpoint files
  BadMagic,
  VersionMismatch,
  TruncatedFile,
  DimMismatch,
  // sae
  ShapeInferenceFailure,
  EmptySplit,
  DivergedLoss,
  ArchMismatch,
  // embed / analyze
  MissingTensor,
  TooFewPoints,
  UnknownId,
  KTooLarge,
  DegenerateLabels,
  EmptyInput,
  ConstantTruth,
  EmptyEmbedding,
  // configuration
  InvalidConfig,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library. `line()` is set for row-level parse
/// errors; `series_id()` carries the offending series when known.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Error(Errc code, const std::string& what, std::size_t line);

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  const std::string& series_id() const noexcept { return series_id_; }

  /// Returns a copy annotated with a series id.
  Error with_series(std::string series_id) const;

 private:
  struct Raw {};
  Error(Raw, Errc code, const std::string& message);

  Errc code_;
  std::optional<std::size_t> line_;
  std::string series_id_;
};

}  // namespace eventcube
