#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polynet {

enum class ErrorCode {
  Structural,
  DegenerateFace,
  Degenerate,
  InvalidTransform,
  RankDeficient,
  InvalidPolygon,
  InvalidPolyhedron,
  InconsistentHyperedge,
  InvariantViolation,
  InconsistentRigidSet,
  IncompleteInput,
  DisconnectedSurface,
  Dimension,
  BatchTooSmall,
  Label,
  EmptyGraph,
  Schema,
  Io,
  NonManifold,
  Config,
  Version,
  Integrity,
  Undefined,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a code so callers (the CLI in
/// particular) can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace polynet
