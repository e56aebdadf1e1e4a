#include "szm/ordinal.hpp"

#include <stdexcept>

#include "szm/error.hpp"

namespace szm {

void PosCtx::note_entry(const OrdPtr& o) {
  if (o->as<OInf>()) return;
  for (auto& e : entries_)
    if (ord_equal(e, o)) return;
  entries_.push_back(o);
}

PosCtx PosCtx::with_nonzero(OrdPtr o) const {
  PosCtx out = *this;
  if (!out.has_nonzero(o)) out.nonzero_.push_back(o);
  out.note_entry(o);
  return out;
}

PosCtx PosCtx::with_fact(OrdPtr w, OrdPtr bound) const {
  PosCtx out = *this;
  out.facts_.emplace_back(w, bound);
  out.note_entry(w);
  return out;
}

PosCtx PosCtx::with_facts(const OrdFacts& fs) const {
  PosCtx out = *this;
  for (auto& o : fs.nonzero) {
    if (!out.has_nonzero(o)) out.nonzero_.push_back(o);
    out.note_entry(o);
  }
  for (auto& [w, b] : fs.strict) {
    out.facts_.emplace_back(w, b);
    out.note_entry(w);
  }
  return out;
}

bool PosCtx::has_nonzero(const OrdPtr& o) const {
  for (auto& e : nonzero_)
    if (ord_equal(e, o)) return true;
  return false;
}

std::vector<OrdPtr> PosCtx::bounds_of(const OrdPtr& o) const {
  std::vector<OrdPtr> out;
  for (auto& [w, b] : facts_)
    if (ord_equal(w, o)) out.push_back(b);
  return out;
}

bool PosCtx::has_lower(const OrdPtr& o) const {
  for (auto& [w, b] : facts_)
    if (ord_equal(b, o)) return true;
  return false;
}

namespace {

void require_resolved(const OrdPtr& o) {
  if (o->as<OUVar>())
    throw TypeError(TypeErrorKind::Internal, {},
                    "internal error: unresolved ordinal unification variable " +
                        show(o) + " in ordering");
  if (auto* s = o->as<OSucc>()) require_resolved(s->arg);
}

bool leq(const PosCtx& g, const OrdPtr& a, const OrdPtr& b, int depth);

bool less(const PosCtx& g, const OrdPtr& a, const OrdPtr& b, int depth) {
  if (depth > 256) return false;
  if (auto* s = b->as<OSucc>()) return leq(g, a, s->arg, depth + 1);
  if (b->as<OInf>())
    // o < S(o) <= inf for every o whose successor is not itself.
    return !a->as<OInf>() && !a->as<OSecondOrder>();
  if (auto* w = a->as<OWitness>()) {
    if (leq(g, w->bound, b, depth + 1)) return true;
  }
  // Recorded strict facts (covers witnesses and assumed orderings alike).
  for (auto& [x, bound] : g.facts())
    if (ord_equal(x, a) && leq(g, bound, b, depth + 1)) return true;
  return false;
}

bool leq(const PosCtx& g, const OrdPtr& a, const OrdPtr& b, int depth) {
  if (depth > 256) return false;
  if (ord_equal(a, b)) return true;
  if (b->as<OInf>()) return true;
  if (auto* s = b->as<OSucc>()) {
    if (leq(g, a, s->arg, depth + 1)) return true;
  }
  if (auto* w = a->as<OWitness>()) {
    if (leq(g, w->bound, b, depth + 1)) return true;
  }
  if (auto* s = a->as<OSucc>()) {
    // S(x) <= b when x < b.
    if (less(g, s->arg, b, depth + 1)) return true;
  }
  for (auto& [x, bound] : g.facts())
    if (ord_equal(x, a) && leq(g, bound, b, depth + 1)) return true;
  return false;
}

}  // namespace

bool ord_leq(const PosCtx& g, const OrdPtr& a, const OrdPtr& b) {
  require_resolved(a);
  require_resolved(b);
  return leq(g, a, b, 0);
}

bool ord_less(const PosCtx& g, const OrdPtr& a, const OrdPtr& b) {
  require_resolved(a);
  require_resolved(b);
  return less(g, a, b, 0);
}

bool ord_nonzero(const PosCtx& g, const OrdPtr& o) {
  if (o->as<OInf>()) return true;
  if (o->as<OSucc>()) return true;
  if (g.has_nonzero(o)) return true;
  if (g.has_lower(o)) return true;  // something sits strictly below o
  return false;
}

std::pair<OrdPtr, PosCtx> fresh_witness(const PosCtx& g, const OrdPtr& bound,
                                        IdSource& ids) {
  if (!ord_nonzero(g, bound))
    throw TypeError(TypeErrorKind::Internal, {},
                    "internal error: witness requested below " + show(bound) +
                        " which is not known nonzero");
  OrdPtr w = o_witness(++ids.next_witness, bound);
  return {w, g.with_fact(w, bound)};
}

}  // namespace szm
