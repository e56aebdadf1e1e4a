#ifndef SZM_SUBTYPE_HPP
#define SZM_SUBTYPE_HPP

#include "szm/session.hpp"

namespace szm {

// Derives g |- t : a < b, or throws TypeError (Clash, BudgetExhausted, ...).
ProofPtr subtype(Session& s, const PosCtx& g, const TermPtr& t,
                 const TypePtr& a, const TypePtr& b);

struct Skeleton {
  TermPtr term;  // may be null
  TypePtr lhs;
  TypePtr rhs;  // may be null
  std::vector<OrdPtr> args;
};

// Canonicalizes a judgment into an ordinal-abstracted skeleton: distinct
// ordinals become holes "#k"; constrained unification variables are
// instantiated from their own constraints first; unconstrained ones are
// lifted (the store side is bound to a fresh second-order variable applied
// to inf arguments).
Skeleton build_skeleton(Session& s, const TermPtr& term, const TypePtr& lhs,
                        const TypePtr& rhs);

struct GeneraliseOutcome {
  bool hit = false;
  int gas_id = -1;
  std::vector<OrdPtr> args;
  SCMatrix edge;  // filled on hit
};

// The G+ step for a mu/nu-headed local subtyping judgment: form the general
// abstract sequent, look it up, and either close by hypothesis (hit) or
// register it.
GeneraliseOutcome generalise_sub(Session& s, const PosCtx& g, const TermPtr& t,
                                 const TypePtr& a, const TypePtr& b);

// Comparison that treats unresolved ordinals as unrelated instead of
// erroring; used when extracting size-change edges.
SCMatrix safe_edge_matrix(Session& s, const PosCtx& g,
                          const std::vector<OrdPtr>& src,
                          const std::vector<OrdPtr>& dst);

// The type named `name` in h's existential interface (dot notation).
TypePtr resolve_dot(Session& s, const TermPtr& h, const std::string& name,
                    SourcePos use);

// Size-respecting identity: structural alpha-comparison where mu/nu sizes
// compare by ord_leq with the polarity of the position.
bool sized_alpha_leq(Session& s, const PosCtx& g, const TypePtr& a,
                     const TypePtr& b);

void spend_step(Session& s);

}  // namespace szm

#endif
