#ifndef SZM_ERROR_HPP
#define SZM_ERROR_HPP

#include <stdexcept>
#include <string>

#include "szm/pos.hpp"

namespace szm {

struct ParseError : std::runtime_error {
  SourcePos pos;
  ParseError(SourcePos p, const std::string& msg)
      : std::runtime_error(p.str() + ": " + msg), pos(p) {}
};

// Reasons a definition can be refused. Clash stops the search immediately;
// BudgetExhausted is the interrupted-loop case and carries the judgment the
// engine was stuck on.
enum class TypeErrorKind {
  Clash,
  OccursCheck,
  ConstraintClash,
  NoPositiveSolution,
  Unsolvable,
  BudgetExhausted,
  UnrollDepthExceeded,
  NotWellFounded,
  CannotInfer,
  Internal,
};

struct TypeError : std::runtime_error {
  TypeErrorKind kind;
  SourcePos pos;
  // Human-readable rendering of the judgment(s) involved; filled by the
  // engine so the driver can show "t has type A and is used with type B"
  // together with the last typing judgment when a search was interrupted.
  std::string detail;

  TypeError(TypeErrorKind k, SourcePos p, std::string msg,
            std::string detail_ = {})
      : std::runtime_error(std::move(msg)),
        kind(k),
        pos(p),
        detail(std::move(detail_)) {}
};

struct EvalError : std::runtime_error {
  bool fuel_exhausted;
  explicit EvalError(const std::string& msg, bool fuel = false)
      : std::runtime_error(msg), fuel_exhausted(fuel) {}
};

}  // namespace szm

#endif
