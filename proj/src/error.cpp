#include "arise/error.hpp"

namespace arise {

std::string_view stage_name(Stage stage) noexcept {
  switch (stage) {
  case Stage::dataset: return "dataset";
  case Stage::semantics: return "semantics";
  case Stage::encoding: return "encoding";
  case Stage::fusion: return "fusion";
  case Stage::eval: return "eval";
  case Stage::cli: return "cli";
  }
  return "unknown";
}

Error::Error(Stage stage, const std::string& what)
    : std::runtime_error("[" + std::string(stage_name(stage)) + "] " + what),
      stage_(stage) {}

} // namespace arise
