#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace feqtee {

enum class ErrorKind {
  Malformed,         // unreadable input file
  NonManifold,       // connectivity violates the 2-manifold invariants
  NotQuad,           // a quad-only operation met a non-quad face
  UnsupportedLoop,   // self-intersecting or self-adjacent loop
  DegenerateResult,  // the operation would produce a degenerate mesh
  Topology,          // a face set is not a disk, a strip is open, ...
  Solver,            // linear solve failed
  OutOfRange,        // id outside its valid range
  Selection,         // no candidate face set matched a region curve
  Syntax,            // TEE tokenizer/parser
  Semantic,          // TEE program-level constraint
  UnknownExtrusion,  // record id absent from the record store
  Application,       // extrusion could not be realized on a patch
  Decomposition,     // feature could not be decomposed
  InvalidArgument,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Malformed: return "malformed";
    case ErrorKind::NonManifold: return "non-manifold";
    case ErrorKind::NotQuad: return "not-quad";
    case ErrorKind::UnsupportedLoop: return "unsupported-loop";
    case ErrorKind::DegenerateResult: return "degenerate-result";
    case ErrorKind::Topology: return "topology";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::Selection: return "selection-failure";
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::Semantic: return "semantic";
    case ErrorKind::UnknownExtrusion: return "unknown-extrusion";
    case ErrorKind::Application: return "application";
    case ErrorKind::Decomposition: return "decomposition";
    case ErrorKind::InvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

/// Every failure raised by the library. `position` carries a line number
/// (OBJ), a byte offset (TEE text) or an instruction index (execution);
/// npos when not applicable.
class Error : public std::runtime_error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  Error(ErrorKind kind, const std::string& message, std::size_t position = npos)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        position_(position) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::size_t position() const noexcept { return position_; }

 private:
  ErrorKind kind_;
  std::size_t position_;
};

}  // namespace feqtee
