#include "polynet/error.hpp"

namespace polynet {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Structural: return "structural error";
    case ErrorCode::DegenerateFace: return "degenerate face";
    case ErrorCode::Degenerate: return "degenerate geometry";
    case ErrorCode::InvalidTransform: return "invalid transform";
    case ErrorCode::RankDeficient: return "rank deficient";
    case ErrorCode::InvalidPolygon: return "invalid polygon";
    case ErrorCode::InvalidPolyhedron: return "invalid polyhedron";
    case ErrorCode::InconsistentHyperedge: return "inconsistent hyperedge";
    case ErrorCode::InvariantViolation: return "invariant violation";
    case ErrorCode::InconsistentRigidSet: return "inconsistent rigid set";
    case ErrorCode::IncompleteInput: return "incomplete input";
    case ErrorCode::DisconnectedSurface: return "disconnected surface";
    case ErrorCode::Dimension: return "dimension error";
    case ErrorCode::BatchTooSmall: return "batch too small";
    case ErrorCode::Label: return "label error";
    case ErrorCode::EmptyGraph: return "empty graph";
    case ErrorCode::Schema: return "schema error";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::NonManifold: return "non-manifold mesh";
    case ErrorCode::Config: return "config error";
    case ErrorCode::Version: return "version mismatch";
    case ErrorCode::Integrity: return "integrity check failed";
    case ErrorCode::Undefined: return "undefined metric";
  }
  return "error";
}

}  // namespace polynet
