#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xdt {

// Malformed input text. `offset` is a byte offset into the parsed string;
// line-oriented parsers fill `line` (1-based) instead and leave offset at 0.
struct ParseError : std::runtime_error {
  std::size_t offset = 0;
  int line = 0;
  explicit ParseError(const std::string& msg, std::size_t off = 0, int ln = 0)
      : std::runtime_error(msg), offset(off), line(ln) {}
};

// Type or arity mismatch, kind mismatch, or a violated structural invariant.
struct TypeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller misuse that is not about the data itself (empty input set, bad flag).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A broken internal invariant, e.g. a residual that must exist does not.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace xdt
