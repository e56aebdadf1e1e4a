#ifndef SZM_UVAR_HPP
#define SZM_UVAR_HPP

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "szm/ast.hpp"
#include "szm/error.hpp"
#include "szm/ordinal.hpp"

namespace szm {

enum class FieldKind { RecordUpper, VariantLower };

struct FieldConstraint {
  FieldKind kind;
  std::vector<std::pair<std::string, TypePtr>> fields;
};

struct TypeUVarState {
  int id = 0;
  TypePtr bound;                           // null = unset
  std::optional<FieldConstraint> fieldsc;  // delayed field constraints
  int redirect = -1;                       // union-find style U := V link
  SourcePos origin;
};

struct OrdUVarState {
  int id = 0;
  OrdPtr bound;  // null = unset
  OrdPtr lower;  // optional: lower <= O
  OrdPtr upper;  // optional: O < upper (strict)
};

struct SecondOrderState {  // ordinal-valued second-order variable
  int id = 0;
  int arity = 0;
  enum class St { Unset, Projection, Imitation } st = St::Unset;
  int proj = -1;
  OrdPtr constant;
};

struct TypeSecondOrderState {  // type-valued; solved by imitation only
  int id = 0;
  int arity = 0;
  TypePtr imitation;  // null = unset
};

struct StoreSnapshot {
  size_t trail_pos = 0;
};

// One store per checking session; trail-based undo of every mutation.
class Store {
 public:
  // When set, used to validate delayed field constraints against a type the
  // variable is being bound to (the engine plugs the subtyping check in
  // here). Must throw TypeError on failure.
  std::function<void(const FieldConstraint&, const TypePtr&)> delegate_check;

  TypePtr fresh_type_uvar(SourcePos origin = {});
  OrdPtr fresh_ord_uvar();
  int fresh_second_order(int arity);
  int fresh_type_second_order(int arity);

  // --- type unification variables -----------------------------------------
  void bind_type_uvar(int id, const TypePtr& a);
  void unify_uvars(int u, int v);
  void constrain_field(int id, FieldKind kind, const std::string& label,
                       const TypePtr& a);
  const TypeUVarState& type_state(int id) const;  // after redirect chasing
  int type_root(int id) const;

  // --- ordinal unification variables --------------------------------------
  void constrain_ord_lower(int id, const OrdPtr& lo);
  void constrain_ord_upper(int id, const OrdPtr& hi);  // strict
  OrdPtr resolve_ord_uvar(int id, const PosCtx& g);
  void bind_ord_uvar(int id, const OrdPtr& o);
  const OrdUVarState& ord_state(int id) const;

  // --- second-order variables ----------------------------------------------
  // Solves V against the constraint g |- V(args) <= target.
  void solve_second_order(int id, const PosCtx& g,
                          const std::vector<OrdPtr>& args,
                          const OrdPtr& target);
  OrdPtr apply_second_order(int id, const std::vector<OrdPtr>& args) const;
  const SecondOrderState& second_state(int id) const;

  void solve_type_second_order(int id, const TypePtr& t);
  const TypeSecondOrderState& type_second_state(int id) const;

  // --- resolution -----------------------------------------------------------
  // Deep substitution of all bound variables; unset ones stay in place.
  OrdPtr resolve(const OrdPtr& o) const;
  TypePtr resolve(const TypePtr& t) const;
  TermPtr resolve(const TermPtr& t) const;
  // Chases only the head of the type (redirects and bindings).
  TypePtr resolve_head(TypePtr t) const;
  bool fully_resolved(const OrdPtr& o) const;
  bool fully_resolved(const TypePtr& t) const;

  // Occurrence of a type uvar in a type; polarity-aware (see bind).
  enum class Occ { None, Positive, Negative, Mixed };
  Occ occurrence(int id, const TypePtr& a) const;

  // --- snapshot / rollback ---------------------------------------------------
  StoreSnapshot snapshot() const { return {trail_.size()}; }
  void rollback(const StoreSnapshot& s);

  size_t trail_size() const { return trail_.size(); }

 private:
  std::vector<TypeUVarState> types_;
  std::vector<OrdUVarState> ords_;
  std::vector<SecondOrderState> seconds_;
  std::vector<TypeSecondOrderState> tseconds_;

  enum class Slot { Type, Ord, Second, TSecond };
  struct TrailEntry {
    Slot slot;
    bool creation = false;
    int index = 0;
    TypeUVarState old_type;
    OrdUVarState old_ord;
    SecondOrderState old_second;
    TypeSecondOrderState old_tsecond;
  };
  std::vector<TrailEntry> trail_;

  TypeUVarState& mut_type(int id);
  OrdUVarState& mut_ord(int id);
  SecondOrderState& mut_second(int id);
  TypeSecondOrderState& mut_tsecond(int id);
  void default_delegate(const FieldConstraint& fc, const TypePtr& a) const;
};

}  // namespace szm

#endif
