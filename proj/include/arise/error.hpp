#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace arise {

/// Pipeline stage that raised an error. Every diagnostic is prefixed with it.
enum class Stage { dataset, semantics, encoding, fusion, eval, cli };

std::string_view stage_name(Stage stage) noexcept;

class Error : public std::runtime_error {
public:
  Error(Stage stage, const std::string& what);

  Stage stage() const noexcept { return stage_; }

private:
  Stage stage_;
};

#define ARISE_DECLARE_ERROR(Name)                                              \
  class Name : public Error {                                                  \
  public:                                                                      \
    using Error::Error;                                                        \
  }

ARISE_DECLARE_ERROR(ParseError);
ARISE_DECLARE_ERROR(EmptyInputError);
ARISE_DECLARE_ERROR(ConfigError);
ARISE_DECLARE_ERROR(ContractViolation);
ARISE_DECLARE_ERROR(IoError);
ARISE_DECLARE_ERROR(TransportError);
ARISE_DECLARE_ERROR(EmptyDescriptionError);
ARISE_DECLARE_ERROR(NoContentError);
ARISE_DECLARE_ERROR(BundleFormatError);
ARISE_DECLARE_ERROR(CoverageError);
ARISE_DECLARE_ERROR(ShapeError);
ARISE_DECLARE_ERROR(SelectionError);

#undef ARISE_DECLARE_ERROR

/// Raised when enrichment stops on an unrecoverable transport failure.
/// Records written before the failure stay in the cache.
class EnrichmentError : public TransportError {
public:
  EnrichmentError(const std::string& what, std::size_t completed,
                  std::size_t remaining)
      : TransportError(Stage::semantics, what), completed_(completed),
        remaining_(remaining) {}

  std::size_t completed() const noexcept { return completed_; }
  std::size_t remaining() const noexcept { return remaining_; }

private:
  std::size_t completed_;
  std::size_t remaining_;
};

} // namespace arise
