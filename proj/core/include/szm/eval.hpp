#ifndef SZM_EVAL_HPP
#define SZM_EVAL_HPP

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "szm/ast.hpp"
#include "szm/error.hpp"

namespace szm {

struct Value;
using ValuePtr = std::shared_ptr<const Value>;

struct Env;
using EnvPtr = std::shared_ptr<const Env>;
struct Env {
  std::string name;
  ValuePtr v;
  EnvPtr next;
};

struct VClosure {
  std::string name;
  TermPtr body;
  EnvPtr env;
};
struct VRecord {
  std::vector<std::pair<std::string, ValuePtr>> fields;
};
struct VCtor {
  std::string name;
  ValuePtr payload;
};

struct Value {
  std::variant<VClosure, VRecord, VCtor> v;
  template <class T>
  const T* as() const {
    return std::get_if<T>(&v);
  }
};

struct EvalResult {
  ValuePtr value;
  long steps = 0;  // reduction steps actually taken
};

// Weak call-by-value evaluation; Y unfolds by substitution. Throws EvalError
// on stuck redexes (a type-safety violation on accepted programs) and when
// the fuel runs out.
EvalResult eval(const TermPtr& t, long fuel = 1000000);

std::string show(const ValuePtr& v);

}  // namespace szm

#endif
