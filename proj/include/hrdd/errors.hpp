#pragma once

#include <stdexcept>
#include <string>

namespace hrdd {

// Inputs outside a function's mathematical domain (negative shape, b <= 0, ...).
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A numeric routine failed to converge or produced a non-finite value.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Data fails a model-level requirement.  `detail` carries offending
// group / row indices when known (-1 = not applicable).
struct ValidationError : std::runtime_error {
  enum class Kind {
    SharpDesignViolation,  // W != I(X >= c)
    EmptyGroup,
    NonBinaryOutcome,
    MixedOutcomeType,
    OneSidedData,          // all obs on one side of the cutoff
    DegenerateSupport,     // no admissible bandwidth leaves both sides populated
    RankDeficient,
    InsufficientDraws,
    LengthMismatch,
  };
  Kind kind;
  long group;
  long row;
  ValidationError(Kind k, const std::string& msg, long g = -1, long r = -1)
      : std::runtime_error(msg), kind(k), group(g), row(r) {}
};

// Malformed input file.
struct ParseError : std::runtime_error {
  long line;  // 1-based; -1 if unknown
  explicit ParseError(const std::string& msg, long line_no = -1)
      : std::runtime_error(msg), line(line_no) {}
};

struct MissingColumn : ParseError {
  std::string column;
  explicit MissingColumn(const std::string& col)
      : ParseError("missing required column: " + col), column(col) {}
};

// Filesystem-level failure (cannot open / write).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hrdd
