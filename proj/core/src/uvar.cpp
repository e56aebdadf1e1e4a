#include "szm/uvar.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace szm {

// ---------------------------------------------------------------------------
// Creation.
// ---------------------------------------------------------------------------

TypePtr Store::fresh_type_uvar(SourcePos origin) {
  int id = static_cast<int>(types_.size());
  types_.push_back(TypeUVarState{id, nullptr, std::nullopt, -1, origin});
  TrailEntry e;
  e.slot = Slot::Type;
  e.creation = true;
  e.index = id;
  trail_.push_back(std::move(e));
  return t_uvar(id);
}

OrdPtr Store::fresh_ord_uvar() {
  int id = static_cast<int>(ords_.size());
  ords_.push_back(OrdUVarState{id, nullptr, nullptr, nullptr});
  TrailEntry e;
  e.slot = Slot::Ord;
  e.creation = true;
  e.index = id;
  trail_.push_back(std::move(e));
  return o_uvar(id);
}

int Store::fresh_second_order(int arity) {
  int id = static_cast<int>(seconds_.size());
  seconds_.push_back(SecondOrderState{id, arity});
  TrailEntry e;
  e.slot = Slot::Second;
  e.creation = true;
  e.index = id;
  trail_.push_back(std::move(e));
  return id;
}

int Store::fresh_type_second_order(int arity) {
  int id = static_cast<int>(tseconds_.size());
  tseconds_.push_back(TypeSecondOrderState{id, arity, nullptr});
  TrailEntry e;
  e.slot = Slot::TSecond;
  e.creation = true;
  e.index = id;
  trail_.push_back(std::move(e));
  return id;
}

// ---------------------------------------------------------------------------
// Trail.
// ---------------------------------------------------------------------------

TypeUVarState& Store::mut_type(int id) {
  TrailEntry e;
  e.slot = Slot::Type;
  e.index = id;
  e.old_type = types_[id];
  trail_.push_back(std::move(e));
  return types_[id];
}
OrdUVarState& Store::mut_ord(int id) {
  TrailEntry e;
  e.slot = Slot::Ord;
  e.index = id;
  e.old_ord = ords_[id];
  trail_.push_back(std::move(e));
  return ords_[id];
}
SecondOrderState& Store::mut_second(int id) {
  TrailEntry e;
  e.slot = Slot::Second;
  e.index = id;
  e.old_second = seconds_[id];
  trail_.push_back(std::move(e));
  return seconds_[id];
}
TypeSecondOrderState& Store::mut_tsecond(int id) {
  TrailEntry e;
  e.slot = Slot::TSecond;
  e.index = id;
  e.old_tsecond = tseconds_[id];
  trail_.push_back(std::move(e));
  return tseconds_[id];
}

void Store::rollback(const StoreSnapshot& s) {
  if (s.trail_pos > trail_.size())
    throw std::logic_error("stale store snapshot");
  while (trail_.size() > s.trail_pos) {
    TrailEntry e = std::move(trail_.back());
    trail_.pop_back();
    switch (e.slot) {
      case Slot::Type:
        if (e.creation) types_.pop_back();
        else types_[e.index] = std::move(e.old_type);
        break;
      case Slot::Ord:
        if (e.creation) ords_.pop_back();
        else ords_[e.index] = std::move(e.old_ord);
        break;
      case Slot::Second:
        if (e.creation) seconds_.pop_back();
        else seconds_[e.index] = std::move(e.old_second);
        break;
      case Slot::TSecond:
        if (e.creation) tseconds_.pop_back();
        else tseconds_[e.index] = std::move(e.old_tsecond);
        break;
    }
  }
}

// ---------------------------------------------------------------------------
// Resolution.
// ---------------------------------------------------------------------------

int Store::type_root(int id) const {
  while (types_[id].redirect >= 0) id = types_[id].redirect;
  return id;
}

const TypeUVarState& Store::type_state(int id) const {
  return types_[type_root(id)];
}
const OrdUVarState& Store::ord_state(int id) const { return ords_[id]; }
const SecondOrderState& Store::second_state(int id) const {
  return seconds_[id];
}
const TypeSecondOrderState& Store::type_second_state(int id) const {
  return tseconds_[id];
}

OrdPtr Store::apply_second_order(int id,
                                 const std::vector<OrdPtr>& args) const {
  const SecondOrderState& st = seconds_[id];
  switch (st.st) {
    case SecondOrderState::St::Projection: return args[st.proj];
    case SecondOrderState::St::Imitation: return st.constant;
    case SecondOrderState::St::Unset: return nullptr;
  }
  return nullptr;
}

OrdPtr Store::resolve(const OrdPtr& o) const {
  if (auto* u = o->as<OUVar>()) {
    const OrdUVarState& st = ords_[u->id];
    return st.bound ? resolve(st.bound) : o;
  }
  if (auto* s = o->as<OSucc>()) {
    OrdPtr a = resolve(s->arg);
    return a == s->arg ? o : o_succ(a);
  }
  if (auto* w = o->as<OWitness>()) {
    OrdPtr b = resolve(w->bound);
    return b == w->bound ? o : o_witness(w->id, b);
  }
  if (auto* so = o->as<OSecondOrder>()) {
    std::vector<OrdPtr> args;
    for (auto& a : so->args) args.push_back(resolve(a));
    if (OrdPtr r = apply_second_order(so->id, args)) return resolve(r);
    return o_second(so->id, std::move(args));
  }
  return o;
}

TermPtr Store::resolve(const TermPtr& t) const {
  if (auto* l = t->as<MLam>()) {
    std::optional<TypePtr> dom;
    if (l->dom) dom = resolve(*l->dom);
    return m_lam(l->name, resolve(l->body), t->pos, dom);
  }
  if (auto* a = t->as<MApp>())
    return m_app(resolve(a->fn), resolve(a->arg), t->pos);
  if (auto* r = t->as<MRecord>()) {
    std::vector<std::pair<std::string, TermPtr>> fs;
    for (auto& [lbl, f] : r->fields) fs.emplace_back(lbl, resolve(f));
    return m_record(std::move(fs), t->pos);
  }
  if (auto* p = t->as<MProj>()) return m_proj(resolve(p->t), p->label, t->pos);
  if (auto* c = t->as<MCtor>()) return m_ctor(c->name, resolve(c->payload), t->pos);
  if (auto* cs = t->as<MCase>()) {
    std::vector<MBranch> bs;
    for (auto& br : cs->branches)
      bs.push_back(MBranch{br.ctor, br.var, resolve(br.body)});
    return m_case(resolve(cs->scrut), std::move(bs), t->pos);
  }
  if (auto* f = t->as<MFix>()) return m_fix(f->name, resolve(f->body), t->pos);
  if (auto* an = t->as<MAnnot>())
    return m_annot(resolve(an->t), resolve(an->ty), t->pos);
  if (auto* oa = t->as<MOrdAbs>())
    return m_ord_abs(oa->name, resolve(oa->body), t->pos);
  if (auto* e = t->as<MEps>())
    return m_eps(e->name, resolve(e->in_ty), resolve(e->body),
                 resolve(e->notin_ty), t->pos);
  if (auto* ls = t->as<MLetSuchThat>())
    return m_let_such_that(ls->tyname, ls->var, resolve(ls->body), t->pos);
  return t;
}

TypePtr Store::resolve(const TypePtr& t) const {
  if (auto* u = t->as<TUVar>()) {
    const TypeUVarState& st = type_state(u->id);
    if (st.bound) return resolve(st.bound);
    return st.id == u->id ? t : t_uvar(st.id);
  }
  if (auto* a = t->as<TArrow>())
    return t_arrow(resolve(a->dom), resolve(a->cod), t->pos);
  if (auto* r = t->as<TRecord>()) {
    std::vector<std::pair<std::string, TypePtr>> fs;
    for (auto& [l, f] : r->fields) fs.emplace_back(l, resolve(f));
    return t_record(std::move(fs), t->pos);
  }
  if (auto* s = t->as<TSum>()) {
    std::vector<std::pair<std::string, TypePtr>> cs;
    for (auto& [c, f] : s->ctors) cs.emplace_back(c, resolve(f));
    return t_sum(std::move(cs), t->pos);
  }
  if (auto* f = t->as<TForall>()) return t_forall(f->name, resolve(f->body), t->pos);
  if (auto* e = t->as<TExists>()) return t_exists(e->name, resolve(e->body), t->pos);
  if (auto* fo = t->as<TForallOrd>())
    return t_forall_ord(fo->name, resolve(fo->body), t->pos);
  if (auto* eo = t->as<TExistsOrd>())
    return t_exists_ord(eo->name, resolve(eo->body), t->pos);
  if (auto* m = t->as<TMu>())
    return t_mu(resolve(m->size), m->name, resolve(m->body), t->pos);
  if (auto* n = t->as<TNu>())
    return t_nu(resolve(n->size), n->name, resolve(n->body), t->pos);
  if (auto* ei = t->as<TEpsIn>())
    return t_eps_in(ei->name, resolve(ei->t), resolve(ei->body), ei->pos);
  if (auto* en = t->as<TEpsNotIn>())
    return t_eps_notin(en->name, resolve(en->t), resolve(en->body), en->pos);
  if (auto* me = t->as<TMeet>()) {
    OrdFacts fs;
    for (auto& o : me->facts.nonzero) fs.nonzero.push_back(resolve(o));
    for (auto& [a, b] : me->facts.strict)
      fs.strict.emplace_back(resolve(a), resolve(b));
    return t_meet(resolve(me->body), std::move(fs));
  }
  if (auto* jo = t->as<TJoin>()) {
    OrdFacts fs;
    for (auto& o : jo->facts.nonzero) fs.nonzero.push_back(resolve(o));
    for (auto& [a, b] : jo->facts.strict)
      fs.strict.emplace_back(resolve(a), resolve(b));
    return t_join(resolve(jo->body), std::move(fs));
  }
  if (auto* so = t->as<TSecondOrder>()) {
    const TypeSecondOrderState& st = tseconds_[so->id];
    if (st.imitation) return resolve(st.imitation);
    std::vector<OrdPtr> args;
    for (auto& a : so->args) args.push_back(resolve(a));
    return t_second(so->id, std::move(args));
  }
  if (auto* d = t->as<TDot>()) return t_dot(resolve(d->h), d->name, t->pos);
  return t;
}

TypePtr Store::resolve_head(TypePtr t) const {
  while (true) {
    if (auto* u = t->as<TUVar>()) {
      const TypeUVarState& st = type_state(u->id);
      if (st.bound) {
        t = st.bound;
        continue;
      }
      return st.id == u->id ? t : t_uvar(st.id);
    }
    if (auto* so = t->as<TSecondOrder>()) {
      const TypeSecondOrderState& st = tseconds_[so->id];
      if (st.imitation) {
        t = st.imitation;
        continue;
      }
    }
    return t;
  }
}

bool Store::fully_resolved(const OrdPtr& o) const {
  OrdPtr r = resolve(o);
  bool ok = true;
  std::function<void(const OrdPtr&)> walk = [&](const OrdPtr& x) {
    if (x->as<OUVar>()) ok = false;
    if (auto* s = x->as<OSucc>()) walk(s->arg);
    if (auto* w = x->as<OWitness>()) walk(w->bound);
    if (auto* so = x->as<OSecondOrder>()) {
      ok = false;  // unapplied second-order variable
      for (auto& a : so->args) walk(a);
    }
  };
  walk(r);
  return ok;
}

bool Store::fully_resolved(const TypePtr& t) const {
  TypePtr r = resolve(t);
  bool ok = true;
  std::function<void(const TypePtr&)> walk = [&](const TypePtr& x) {
    if (x->as<TUVar>() || x->as<TSecondOrder>()) ok = false;
    if (auto* a = x->as<TArrow>()) {
      walk(a->dom);
      walk(a->cod);
    } else if (auto* rr = x->as<TRecord>()) {
      for (auto& [_, f] : rr->fields) walk(f);
    } else if (auto* s = x->as<TSum>()) {
      for (auto& [_, f] : s->ctors) walk(f);
    } else if (auto* f = x->as<TForall>()) walk(f->body);
    else if (auto* e = x->as<TExists>()) walk(e->body);
    else if (auto* fo = x->as<TForallOrd>()) walk(fo->body);
    else if (auto* eo = x->as<TExistsOrd>()) walk(eo->body);
    else if (auto* m = x->as<TMu>()) walk(m->body);
    else if (auto* n = x->as<TNu>()) walk(n->body);
    else if (auto* ei = x->as<TEpsIn>()) walk(ei->body);
    else if (auto* en = x->as<TEpsNotIn>()) walk(en->body);
    else if (auto* me = x->as<TMeet>()) walk(me->body);
    else if (auto* jo = x->as<TJoin>()) walk(jo->body);
  };
  walk(r);
  return ok;
}

// ---------------------------------------------------------------------------
// Occurrence / polarity.
// ---------------------------------------------------------------------------

namespace {

Store::Occ occ_join(Store::Occ a, Store::Occ b) {
  using O = Store::Occ;
  if (a == O::None) return b;
  if (b == O::None) return a;
  if (a == b) return a;
  return O::Mixed;
}

Store::Occ occ_flip(Store::Occ a) {
  using O = Store::Occ;
  if (a == O::Positive) return O::Negative;
  if (a == O::Negative) return O::Positive;
  return a;
}

}  // namespace

Store::Occ Store::occurrence(int id, const TypePtr& a) const {
  using O = Store::Occ;
  int root = type_root(id);
  std::function<O(const TypePtr&, bool)> walk_ty;
  std::function<O(const TermPtr&)> walk_tm;

  walk_ty = [&](const TypePtr& t0, bool pos) -> O {
    TypePtr t = t0;
    if (auto* u = t->as<TUVar>()) {
      const TypeUVarState& st = type_state(u->id);
      if (st.bound) return walk_ty(st.bound, pos);
      if (st.id == root) return pos ? O::Positive : O::Negative;
      return O::None;
    }
    if (auto* ar = t->as<TArrow>())
      return occ_join(walk_ty(ar->dom, !pos), walk_ty(ar->cod, pos));
    if (auto* r = t->as<TRecord>()) {
      O o = O::None;
      for (auto& [_, f] : r->fields) o = occ_join(o, walk_ty(f, pos));
      return o;
    }
    if (auto* s = t->as<TSum>()) {
      O o = O::None;
      for (auto& [_, f] : s->ctors) o = occ_join(o, walk_ty(f, pos));
      return o;
    }
    if (auto* f = t->as<TForall>()) return walk_ty(f->body, pos);
    if (auto* e = t->as<TExists>()) return walk_ty(e->body, pos);
    if (auto* fo = t->as<TForallOrd>()) return walk_ty(fo->body, pos);
    if (auto* eo = t->as<TExistsOrd>()) return walk_ty(eo->body, pos);
    if (auto* m = t->as<TMu>()) return walk_ty(m->body, pos);
    if (auto* n = t->as<TNu>()) return walk_ty(n->body, pos);
    // Choice-operator positions are treated as mixed occurrences; it is
    // essential to look inside them for the check to be meaningful.
    if (auto* ei = t->as<TEpsIn>()) {
      O o = occ_join(walk_tm(ei->t), walk_ty(ei->body, pos));
      return o == O::None ? O::None : O::Mixed;
    }
    if (auto* en = t->as<TEpsNotIn>()) {
      O o = occ_join(walk_tm(en->t), walk_ty(en->body, pos));
      return o == O::None ? O::None : O::Mixed;
    }
    if (auto* me = t->as<TMeet>()) return walk_ty(me->body, pos);
    if (auto* jo = t->as<TJoin>()) return walk_ty(jo->body, pos);
    if (auto* d = t->as<TDot>()) {
      O o = walk_tm(d->h);
      return o == O::None ? O::None : O::Mixed;
    }
    return O::None;
  };

  walk_tm = [&](const TermPtr& t) -> O {
    O o = O::None;
    if (auto* l = t->as<MLam>()) {
      if (l->dom) o = occ_join(o, walk_ty(*l->dom, true));
      o = occ_join(o, walk_tm(l->body));
    } else if (auto* ap = t->as<MApp>()) {
      o = occ_join(walk_tm(ap->fn), walk_tm(ap->arg));
    } else if (auto* r = t->as<MRecord>()) {
      for (auto& [_, f] : r->fields) o = occ_join(o, walk_tm(f));
    } else if (auto* p = t->as<MProj>()) {
      o = walk_tm(p->t);
    } else if (auto* c = t->as<MCtor>()) {
      o = walk_tm(c->payload);
    } else if (auto* cs = t->as<MCase>()) {
      o = walk_tm(cs->scrut);
      for (auto& br : cs->branches) o = occ_join(o, walk_tm(br.body));
    } else if (auto* f = t->as<MFix>()) {
      o = walk_tm(f->body);
    } else if (auto* an = t->as<MAnnot>()) {
      o = occ_join(walk_tm(an->t), walk_ty(an->ty, true));
    } else if (auto* oa = t->as<MOrdAbs>()) {
      o = walk_tm(oa->body);
    } else if (auto* e = t->as<MEps>()) {
      o = occ_join(walk_ty(e->in_ty, true),
                   occ_join(walk_tm(e->body), walk_ty(e->notin_ty, true)));
    } else if (auto* ls = t->as<MLetSuchThat>()) {
      o = walk_tm(ls->body);
    }
    return o == O::None ? O::None : O::Mixed;
  };

  return walk_ty(a, true);
}

// ---------------------------------------------------------------------------
// Type uvar operations.
// ---------------------------------------------------------------------------

void Store::default_delegate(const FieldConstraint& fc, const TypePtr& a) const {
  // Without an engine hook, accept only a structurally obvious match.
  TypePtr r = resolve_head(a);
  if (fc.kind == FieldKind::RecordUpper) {
    auto* rec = r->as<TRecord>();
    if (!rec)
      throw TypeError(TypeErrorKind::ConstraintClash, position_of(a),
                      "type " + show(a) + " does not satisfy record constraints");
    for (auto& [l, ft] : fc.fields) {
      auto it = std::find_if(rec->fields.begin(), rec->fields.end(),
                             [&](auto& p) { return p.first == l; });
      if (it == rec->fields.end() || !alpha_equal(resolve(it->second), resolve(ft)))
        throw TypeError(TypeErrorKind::ConstraintClash, position_of(a),
                        "field " + l + " clashes with recorded constraint");
    }
  } else {
    auto* sum = r->as<TSum>();
    if (!sum)
      throw TypeError(TypeErrorKind::ConstraintClash, position_of(a),
                      "type " + show(a) + " does not satisfy variant constraints");
    for (auto& [c, ct] : fc.fields) {
      auto it = std::find_if(sum->ctors.begin(), sum->ctors.end(),
                             [&](auto& p) { return p.first == c; });
      if (it == sum->ctors.end() || !alpha_equal(resolve(it->second), resolve(ct)))
        throw TypeError(TypeErrorKind::ConstraintClash, position_of(a),
                        "constructor " + c + " clashes with recorded constraint");
    }
  }
}

void Store::bind_type_uvar(int id, const TypePtr& a) {
  int root = type_root(id);
  TypeUVarState& cur = types_[root];
  if (cur.bound)
    throw std::logic_error("bind_type_uvar on a bound variable");

  TypePtr target = a;
  Occ occ = occurrence(root, a);
  if (occ == Occ::Positive) {
    // U occurs only positively: close the cycle with a recursive type,
    // mu X.a[U := X].
    std::string x = "X#" + std::to_string(root);
    Subst s;
    // substitute by rebuilding: replace uvar nodes via a resolve-like pass
    std::function<TypePtr(const TypePtr&)> repl = [&](const TypePtr& t) -> TypePtr {
      if (auto* u = t->as<TUVar>()) {
        if (type_root(u->id) == root) return t_var(x);
        const TypeUVarState& st = type_state(u->id);
        if (st.bound) return repl(st.bound);
        return t;
      }
      if (auto* ar = t->as<TArrow>())
        return t_arrow(repl(ar->dom), repl(ar->cod), t->pos);
      if (auto* r = t->as<TRecord>()) {
        std::vector<std::pair<std::string, TypePtr>> fs;
        for (auto& [l, f] : r->fields) fs.emplace_back(l, repl(f));
        return t_record(std::move(fs), t->pos);
      }
      if (auto* su = t->as<TSum>()) {
        std::vector<std::pair<std::string, TypePtr>> cs;
        for (auto& [c, f] : su->ctors) cs.emplace_back(c, repl(f));
        return t_sum(std::move(cs), t->pos);
      }
      if (auto* f = t->as<TForall>()) return t_forall(f->name, repl(f->body), t->pos);
      if (auto* e = t->as<TExists>()) return t_exists(e->name, repl(e->body), t->pos);
      if (auto* fo = t->as<TForallOrd>())
        return t_forall_ord(fo->name, repl(fo->body), t->pos);
      if (auto* eo = t->as<TExistsOrd>())
        return t_exists_ord(eo->name, repl(eo->body), t->pos);
      if (auto* m = t->as<TMu>()) return t_mu(m->size, m->name, repl(m->body), t->pos);
      if (auto* n = t->as<TNu>()) return t_nu(n->size, n->name, repl(n->body), t->pos);
      if (auto* me = t->as<TMeet>()) return t_meet(repl(me->body), me->facts);
      if (auto* jo = t->as<TJoin>()) return t_join(repl(jo->body), jo->facts);
      return t;
    };
    target = t_mu(o_inf(), x, repl(a), position_of(a));
  } else if (occ != Occ::None) {
    throw TypeError(TypeErrorKind::OccursCheck, position_of(a),
                    "occurs check: variable ?" + std::to_string(root) +
                        " appears in " + show(resolve(a)));
  }

  FieldConstraint pending;
  bool had = cur.fieldsc.has_value();
  if (had) pending = *cur.fieldsc;

  TypeUVarState& st = mut_type(root);
  st.bound = target;
  st.fieldsc.reset();

  if (had) {
    if (delegate_check) delegate_check(pending, target);
    else default_delegate(pending, target);
  }
}

void Store::unify_uvars(int u, int v) {
  int ru = type_root(u);
  int rv = type_root(v);
  if (ru == rv) return;  // reflexivity
  const TypeUVarState& su = types_[ru];
  const TypeUVarState& sv = types_[rv];
  if (su.bound || sv.bound)
    throw std::logic_error("unify_uvars on bound variables");

  std::optional<FieldConstraint> merged = sv.fieldsc;
  if (su.fieldsc) {
    if (!merged) {
      merged = su.fieldsc;
    } else {
      if (merged->kind != su.fieldsc->kind)
        throw TypeError(TypeErrorKind::ConstraintClash, su.origin,
                        "record and variant constraints on one variable");
      for (auto& [l, ft] : su.fieldsc->fields) {
        auto it = std::find_if(merged->fields.begin(), merged->fields.end(),
                               [&](auto& p) { return p.first == l; });
        if (it == merged->fields.end()) {
          merged->fields.emplace_back(l, ft);
        } else if (!alpha_equal(resolve(it->second), resolve(ft))) {
          throw TypeError(TypeErrorKind::ConstraintClash, su.origin,
                          "conflicting constraints on field " + l);
        }
      }
    }
  }

  TypeUVarState& mu = mut_type(ru);
  mu.redirect = rv;
  mu.fieldsc.reset();
  TypeUVarState& mv = mut_type(rv);
  mv.fieldsc = std::move(merged);
}

void Store::constrain_field(int id, FieldKind kind, const std::string& label,
                            const TypePtr& a) {
  int root = type_root(id);
  const TypeUVarState& cur = types_[root];
  if (cur.bound) throw std::logic_error("constrain_field on a bound variable");
  if (cur.fieldsc && cur.fieldsc->kind != kind)
    throw TypeError(TypeErrorKind::ConstraintClash, cur.origin,
                    "record and variant constraints on one variable");
  TypeUVarState& st = mut_type(root);
  if (!st.fieldsc) st.fieldsc = FieldConstraint{kind, {}};
  auto& fields = st.fieldsc->fields;
  auto it = std::find_if(fields.begin(), fields.end(),
                         [&](auto& p) { return p.first == label; });
  if (it == fields.end()) {
    fields.emplace_back(label, a);
  } else if (!alpha_equal(resolve(it->second), resolve(a))) {
    throw TypeError(TypeErrorKind::ConstraintClash, cur.origin,
                    "conflicting constraints on " + label);
  }
}

// ---------------------------------------------------------------------------
// Ordinal uvar operations.
// ---------------------------------------------------------------------------

void Store::constrain_ord_lower(int id, const OrdPtr& lo) {
  OrdUVarState& st = mut_ord(id);
  st.lower = lo;
}
void Store::constrain_ord_upper(int id, const OrdPtr& hi) {
  OrdUVarState& st = mut_ord(id);
  st.upper = hi;
}
void Store::bind_ord_uvar(int id, const OrdPtr& o) {
  OrdUVarState& st = mut_ord(id);
  if (st.bound) throw std::logic_error("bind_ord_uvar on a bound variable");
  st.bound = o;
}

OrdPtr Store::resolve_ord_uvar(int id, const PosCtx& g) {
  const OrdUVarState& cur = ords_[id];
  if (cur.bound) return resolve(cur.bound);
  OrdPtr lower = cur.lower ? resolve(cur.lower) : nullptr;
  OrdPtr upper = cur.upper ? resolve(cur.upper) : nullptr;

  auto admissible = [&](const OrdPtr& cand) {
    if (!fully_resolved(cand)) return false;
    if (lower && fully_resolved(lower) && !ord_leq(g, lower, cand)) return false;
    if (upper && fully_resolved(upper) && !ord_less(g, cand, upper)) return false;
    return true;
  };

  // The first ordinal in the context satisfying the constraints.
  for (auto& e : g.entries()) {
    if (admissible(e)) {
      bind_ord_uvar(id, e);
      return e;
    }
  }
  if (lower) {
    if (upper && !(fully_resolved(lower) && fully_resolved(upper) &&
                   ord_less(g, lower, upper)))
      throw TypeError(TypeErrorKind::NoPositiveSolution, {},
                      "no positive solution for ?o" + std::to_string(id) +
                          " between " + show(lower) + " and " + show(upper));
    bind_ord_uvar(id, lower);
    return lower;
  }
  if (upper) {
    if (upper->as<OInf>()) {
      OrdPtr s = o_succ(fresh_ord_uvar());
      bind_ord_uvar(id, s);
      return s;
    }
    throw TypeError(TypeErrorKind::NoPositiveSolution, {},
                    "no positive solution for ?o" + std::to_string(id) +
                        " below " + show(upper));
  }
  OrdPtr s = o_succ(fresh_ord_uvar());
  bind_ord_uvar(id, s);
  return s;
}

// ---------------------------------------------------------------------------
// Second-order variables.
// ---------------------------------------------------------------------------

void Store::solve_second_order(int id, const PosCtx& g,
                               const std::vector<OrdPtr>& args,
                               const OrdPtr& target) {
  const SecondOrderState& cur = seconds_[id];
  if (cur.st != SecondOrderState::St::Unset) {
    OrdPtr val = apply_second_order(id, args);
    if (val && fully_resolved(val) && fully_resolved(target) &&
        ord_leq(g, val, target))
      return;
    throw TypeError(TypeErrorKind::Unsolvable, {},
                    "second-order variable already solved incompatibly");
  }
  // Projection when possible: the first argument satisfying the constraint.
  for (size_t k = 0; k < args.size(); ++k) {
    if (fully_resolved(args[k]) && fully_resolved(target) &&
        ord_leq(g, args[k], target)) {
      SecondOrderState& st = mut_second(id);
      st.st = SecondOrderState::St::Projection;
      st.proj = static_cast<int>(k);
      return;
    }
  }
  // Imitation: a constant value.
  if (fully_resolved(target)) {
    SecondOrderState& st = mut_second(id);
    st.st = SecondOrderState::St::Imitation;
    st.constant = target;
    return;
  }
  throw TypeError(TypeErrorKind::Unsolvable, {},
                  "cannot solve second-order ordinal constraint");
}

void Store::solve_type_second_order(int id, const TypePtr& t) {
  const TypeSecondOrderState& cur = tseconds_[id];
  if (cur.imitation) {
    if (!alpha_equal(resolve(cur.imitation), resolve(t)))
      throw TypeError(TypeErrorKind::Unsolvable, position_of(t),
                      "second-order type variable already solved incompatibly");
    return;
  }
  TypeSecondOrderState& st = mut_tsecond(id);
  st.imitation = t;
}

}  // namespace szm
