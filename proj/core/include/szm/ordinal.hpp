#ifndef SZM_ORDINAL_HPP
#define SZM_ORDINAL_HPP

#include <utility>
#include <vector>

#include "szm/ast.hpp"

namespace szm {

// Positivity context: ordinals assumed nonzero plus the strict-order facts
// recorded for witnesses. Persistent: extension returns a new context, so
// proof branches never leak facts to siblings.
class PosCtx {
 public:
  PosCtx() = default;

  PosCtx with_nonzero(OrdPtr o) const;
  PosCtx with_fact(OrdPtr w, OrdPtr bound) const;
  PosCtx with_facts(const OrdFacts& fs) const;

  const std::vector<OrdPtr>& nonzero() const { return nonzero_; }
  const std::vector<std::pair<OrdPtr, OrdPtr>>& facts() const { return facts_; }
  // Scan list for "the first ordinal in the context": every ordinal the
  // context knows about, in insertion order (oldest first).
  const std::vector<OrdPtr>& entries() const { return entries_; }

  bool has_nonzero(const OrdPtr& o) const;
  // The recorded strict upper bounds of o (facts o < b).
  std::vector<OrdPtr> bounds_of(const OrdPtr& o) const;
  bool has_lower(const OrdPtr& o) const;  // some fact (x < o) recorded

 private:
  std::vector<OrdPtr> nonzero_;
  std::vector<std::pair<OrdPtr, OrdPtr>> facts_;
  std::vector<OrdPtr> entries_;

  void note_entry(const OrdPtr& o);
};

// Context-relative ordering: a sound, deliberately incomplete syntactic
// closure. Both sides must be fully resolved (no unset unification
// variables); an unresolved variable is an internal error.
bool ord_leq(const PosCtx& g, const OrdPtr& a, const OrdPtr& b);
bool ord_less(const PosCtx& g, const OrdPtr& a, const OrdPtr& b);
bool ord_nonzero(const PosCtx& g, const OrdPtr& o);

// Creates a fresh witness w with recorded fact w < bound. Requires
// ord_nonzero(g, bound); the caller must not unfold otherwise.
std::pair<OrdPtr, PosCtx> fresh_witness(const PosCtx& g, const OrdPtr& bound,
                                        IdSource& ids);

}  // namespace szm

#endif
