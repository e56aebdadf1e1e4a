#include "szm/subtype.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

#include "szm/error.hpp"

namespace szm {

Session::Session() : Session(CheckOptions{}) {}
Session::Session(CheckOptions o) : opts(o) {
  steps_left = opts.step_budget;
  graph.add_node(0);  // root
  enclosing_stack.push_back(Enclosing{0, {}});
}

std::string show(const Judgment& j) {
  if (j.is_typing()) return show(j.subject) + " : " + show(j.lhs);
  return show(j.subject) + " : " + show(j.lhs) + " ⊂ " + show(j.rhs);
}

ProofPtr proof_leaf(std::string rule, Judgment concl) {
  auto p = std::make_shared<ProofNode>();
  p->rule = std::move(rule);
  p->concl = std::move(concl);
  return p;
}
ProofPtr proof_node(std::string rule, Judgment concl,
                    std::vector<ProofPtr> premises) {
  auto p = std::make_shared<ProofNode>();
  p->rule = std::move(rule);
  p->concl = std::move(concl);
  p->premises = std::move(premises);
  return p;
}

void spend_step(Session& s) {
  if (--s.steps_left < 0) {
    std::string detail;
    if (s.last_typing) detail += "last typing judgment: " + show(*s.last_typing);
    std::string msg = "interrupted: step budget exhausted";
    if (s.last_subtyping) msg += " while checking " + show(*s.last_subtyping);
    throw TypeError(TypeErrorKind::BudgetExhausted, s.current_pos, msg, detail);
  }
}

// ---------------------------------------------------------------------------
// Safe ordinal comparison helpers.
// ---------------------------------------------------------------------------

namespace {

bool safe_less(Session& s, const PosCtx& g, const OrdPtr& a, const OrdPtr& b) {
  if (!s.store.fully_resolved(a) || !s.store.fully_resolved(b)) return false;
  return ord_less(g, s.store.resolve(a), s.store.resolve(b));
}
bool safe_leq(Session& s, const PosCtx& g, const OrdPtr& a, const OrdPtr& b) {
  if (!s.store.fully_resolved(a) || !s.store.fully_resolved(b)) return false;
  return ord_leq(g, s.store.resolve(a), s.store.resolve(b));
}

}  // namespace

SCMatrix safe_edge_matrix(Session& s, const PosCtx& g,
                          const std::vector<OrdPtr>& src,
                          const std::vector<OrdPtr>& dst) {
  SCMatrix m(static_cast<int>(src.size()), static_cast<int>(dst.size()));
  for (size_t i = 0; i < src.size(); ++i)
    for (size_t j = 0; j < dst.size(); ++j) {
      if (safe_less(s, g, dst[j], src[i]))
        m.set(static_cast<int>(i), static_cast<int>(j), SCEntry::Less);
      else if (safe_leq(s, g, dst[j], src[i]))
        m.set(static_cast<int>(i), static_cast<int>(j), SCEntry::Leq);
    }
  return m;
}

// ---------------------------------------------------------------------------
// Dot notation.
// ---------------------------------------------------------------------------

static TypePtr type_of_head(const TermPtr& h) {
  if (auto* e = h->as<MEps>()) return e->in_ty;
  if (auto* d = h->as<MDef>()) return d->ty;
  if (auto* a = h->as<MAnnot>()) return a->ty;
  return nullptr;
}

TypePtr resolve_dot(Session& s, const TermPtr& h, const std::string& name,
                    SourcePos use) {
  TypePtr ty = type_of_head(h);
  if (!ty)
    throw TypeError(TypeErrorKind::Clash, use,
                    "dot notation " + show(h) + "." + name +
                        " needs a term with a known type");
  TypePtr cur = s.store.resolve_head(ty);
  while (true) {
    if (auto* e = cur->as<TExists>()) {
      if (e->name == name) return t_eps_in(name, h, e->body, use);
      // Earlier abstract types are themselves accessed through the dot.
      TypePtr inner = resolve_dot(s, h, e->name, use);
      cur = s.store.resolve_head(subst_type_var(e->body, e->name, inner));
      continue;
    }
    if (auto* m = cur->as<TMeet>()) {
      cur = s.store.resolve_head(m->body);
      continue;
    }
    if (auto* jo = cur->as<TJoin>()) {
      cur = s.store.resolve_head(jo->body);
      continue;
    }
    break;
  }
  throw TypeError(TypeErrorKind::Clash, use,
                  show(h) + " has no abstract type named " + name);
}

// ---------------------------------------------------------------------------
// Size-respecting identity.
// ---------------------------------------------------------------------------

namespace {

struct AEnv {
  std::vector<std::pair<std::string, std::string>> types, ords;
  static bool look(const std::vector<std::pair<std::string, std::string>>& v,
                   const std::string& a, const std::string& b) {
    for (auto it = v.rbegin(); it != v.rend(); ++it)
      if (it->first == a || it->second == b)
        return it->first == a && it->second == b;
    return a == b;
  }
};

bool ord_cmp_leq(Session& s, const PosCtx& g, const OrdPtr& a, const OrdPtr& b,
                 AEnv& env) {
  if (auto* va = a->as<OVar>())
    if (auto* vb = b->as<OVar>())
      if (AEnv::look(env.ords, va->name, vb->name)) return true;
  if (ord_equal(a, b)) return true;
  return safe_leq(s, g, a, b);
}

bool sized_leq(Session& s, const PosCtx& g, const TypePtr& a0, const TypePtr& b0,
               bool pos, AEnv& env) {
  TypePtr a = s.store.resolve_head(a0);
  TypePtr b = s.store.resolve_head(b0);
  if (a->v.index() != b->v.index()) return false;
  if (auto* va = a->as<TVar>())
    return AEnv::look(env.types, va->name, b->as<TVar>()->name);
  if (auto* ar = a->as<TArrow>()) {
    auto* br = b->as<TArrow>();
    return sized_leq(s, g, br->dom, ar->dom, !pos, env) &&
           sized_leq(s, g, ar->cod, br->cod, pos, env);
  }
  if (auto* ra = a->as<TRecord>()) {
    auto* rb = b->as<TRecord>();
    if (ra->fields.size() != rb->fields.size()) return false;
    for (auto& [l, fa] : ra->fields) {
      auto it = std::find_if(rb->fields.begin(), rb->fields.end(),
                             [&](auto& p) { return p.first == l; });
      if (it == rb->fields.end() || !sized_leq(s, g, fa, it->second, pos, env))
        return false;
    }
    return true;
  }
  if (auto* sa = a->as<TSum>()) {
    auto* sb = b->as<TSum>();
    if (sa->ctors.size() != sb->ctors.size()) return false;
    for (auto& [c, fa] : sa->ctors) {
      auto it = std::find_if(sb->ctors.begin(), sb->ctors.end(),
                             [&](auto& p) { return p.first == c; });
      if (it == sb->ctors.end() || !sized_leq(s, g, fa, it->second, pos, env))
        return false;
    }
    return true;
  }
  if (auto* fa = a->as<TForall>()) {
    auto* fb = b->as<TForall>();
    env.types.emplace_back(fa->name, fb->name);
    bool ok = sized_leq(s, g, fa->body, fb->body, pos, env);
    env.types.pop_back();
    return ok;
  }
  if (auto* ea = a->as<TExists>()) {
    auto* eb = b->as<TExists>();
    env.types.emplace_back(ea->name, eb->name);
    bool ok = sized_leq(s, g, ea->body, eb->body, pos, env);
    env.types.pop_back();
    return ok;
  }
  if (auto* fa = a->as<TForallOrd>()) {
    auto* fb = b->as<TForallOrd>();
    env.ords.emplace_back(fa->name, fb->name);
    bool ok = sized_leq(s, g, fa->body, fb->body, pos, env);
    env.ords.pop_back();
    return ok;
  }
  if (auto* ea = a->as<TExistsOrd>()) {
    auto* eb = b->as<TExistsOrd>();
    env.ords.emplace_back(ea->name, eb->name);
    bool ok = sized_leq(s, g, ea->body, eb->body, pos, env);
    env.ords.pop_back();
    return ok;
  }
  if (auto* ma = a->as<TMu>()) {
    auto* mb = b->as<TMu>();
    bool sz = pos ? ord_cmp_leq(s, g, ma->size, mb->size, env)
                  : ord_cmp_leq(s, g, mb->size, ma->size, env);
    if (!sz) return false;
    env.types.emplace_back(ma->name, mb->name);
    bool ok = sized_leq(s, g, ma->body, mb->body, pos, env);
    env.types.pop_back();
    return ok;
  }
  if (auto* na = a->as<TNu>()) {
    auto* nb = b->as<TNu>();
    bool sz = pos ? ord_cmp_leq(s, g, nb->size, na->size, env)
                  : ord_cmp_leq(s, g, na->size, nb->size, env);
    if (!sz) return false;
    env.types.emplace_back(na->name, nb->name);
    bool ok = sized_leq(s, g, na->body, nb->body, pos, env);
    env.types.pop_back();
    return ok;
  }
  // Remaining constructors must agree exactly.
  return alpha_equal(s.store.resolve(a), s.store.resolve(b));
}

}  // namespace

bool sized_alpha_leq(Session& s, const PosCtx& g, const TypePtr& a,
                     const TypePtr& b) {
  AEnv env;
  return sized_leq(s, g, a, b, true, env);
}

// ---------------------------------------------------------------------------
// Skeleton construction.
// ---------------------------------------------------------------------------

namespace {

struct SkeletonBuilder {
  Session& s;
  std::vector<OrdPtr> args;    // distinct abstracted ordinals
  std::vector<int> wild_ords;  // unset ord-uvar ids, in first-seen order
  std::vector<int> wild_types;

  OrdPtr hole(size_t i) { return o_var("#" + std::to_string(i)); }

  OrdPtr walk(const OrdPtr& o0) {
    OrdPtr o = s.store.resolve(o0);
    for (size_t i = 0; i < args.size(); ++i)
      if (ord_equal(args[i], o)) return hole(i);
    if (auto* su = o->as<OSucc>()) return o_succ(walk(su->arg));
    if (auto* u = o->as<OUVar>()) {
      for (size_t i = 0; i < wild_ords.size(); ++i)
        if (wild_ords[i] == u->id) return o_var("#o" + std::to_string(i));
      wild_ords.push_back(u->id);
      return o_var("#o" + std::to_string(wild_ords.size() - 1));
    }
    if (auto* w = o->as<OWitness>()) return o_witness(w->id, walk(w->bound));
    if (auto* so = o->as<OSecondOrder>()) {
      std::vector<OrdPtr> as;
      for (auto& a : so->args) as.push_back(walk(a));
      return o_second(so->id, std::move(as));
    }
    return o;
  }

  TypePtr wild_type(int key) {
    for (size_t i = 0; i < wild_types.size(); ++i)
      if (wild_types[i] == key) return t_var("#U" + std::to_string(i));
    wild_types.push_back(key);
    return t_var("#U" + std::to_string(wild_types.size() - 1));
  }

  TypePtr walk(const TypePtr& t0) {
    TypePtr t = s.store.resolve_head(t0);
    if (auto* u = t->as<TUVar>()) {
      int root = s.store.type_root(u->id);
      const TypeUVarState& st = s.store.type_state(root);
      if (st.fieldsc) {
        // Constrained variables are instantiated from their own constraints
        // before abstraction.
        TypePtr inst = st.fieldsc->kind == FieldKind::RecordUpper
                           ? t_record(st.fieldsc->fields)
                           : t_sum(st.fieldsc->fields);
        s.store.bind_type_uvar(root, inst);
        return walk(inst);
      }
      // Unconstrained: lift to a second-order variable over the abstracted
      // ordinals; the variable itself is instantiated at inf arguments.
      int v = s.store.fresh_type_second_order(static_cast<int>(args.size()));
      std::vector<OrdPtr> infs(args.size(), o_inf());
      s.store.bind_type_uvar(root, t_second(v, std::move(infs)));
      return wild_type(v + (1 << 20));
    }
    if (auto* so = t->as<TSecondOrder>()) return wild_type(so->id + (1 << 20));
    if (auto* a = t->as<TArrow>()) return t_arrow(walk(a->dom), walk(a->cod), {});
    if (auto* r = t->as<TRecord>()) {
      std::vector<std::pair<std::string, TypePtr>> fs;
      for (auto& [l, f] : r->fields) fs.emplace_back(l, walk(f));
      return t_record(std::move(fs));
    }
    if (auto* su = t->as<TSum>()) {
      std::vector<std::pair<std::string, TypePtr>> cs;
      for (auto& [c, f] : su->ctors) cs.emplace_back(c, walk(f));
      return t_sum(std::move(cs));
    }
    if (auto* f = t->as<TForall>()) return t_forall(f->name, walk(f->body));
    if (auto* e = t->as<TExists>()) return t_exists(e->name, walk(e->body));
    if (auto* fo = t->as<TForallOrd>())
      return t_forall_ord(fo->name, walk(fo->body));
    if (auto* eo = t->as<TExistsOrd>())
      return t_exists_ord(eo->name, walk(eo->body));
    if (auto* m = t->as<TMu>()) return t_mu(walk(m->size), m->name, walk(m->body));
    if (auto* n = t->as<TNu>()) return t_nu(walk(n->size), n->name, walk(n->body));
    if (auto* ei = t->as<TEpsIn>())
      return t_eps_in(ei->name, walk(ei->t), walk(ei->body), ei->pos);
    if (auto* en = t->as<TEpsNotIn>())
      return t_eps_notin(en->name, walk(en->t), walk(en->body), en->pos);
    if (auto* me = t->as<TMeet>()) return walk(me->body);
    if (auto* jo = t->as<TJoin>()) return walk(jo->body);
    if (auto* d = t->as<TDot>()) return t_dot(walk(d->h), d->name, {});
    return t;
  }

  TermPtr walk(const TermPtr& t) {
    if (auto* l = t->as<MLam>()) {
      std::optional<TypePtr> dom;
      if (l->dom) dom = walk(*l->dom);
      return m_lam(l->name, walk(l->body), t->pos, dom);
    }
    if (auto* a = t->as<MApp>()) return m_app(walk(a->fn), walk(a->arg), t->pos);
    if (auto* r = t->as<MRecord>()) {
      std::vector<std::pair<std::string, TermPtr>> fs;
      for (auto& [lbl, f] : r->fields) fs.emplace_back(lbl, walk(f));
      return m_record(std::move(fs), t->pos);
    }
    if (auto* p = t->as<MProj>()) return m_proj(walk(p->t), p->label, t->pos);
    if (auto* c = t->as<MCtor>()) return m_ctor(c->name, walk(c->payload), t->pos);
    if (auto* cs = t->as<MCase>()) {
      std::vector<MBranch> bs;
      for (auto& br : cs->branches)
        bs.push_back(MBranch{br.ctor, br.var, walk(br.body)});
      return m_case(walk(cs->scrut), std::move(bs), t->pos);
    }
    if (auto* f = t->as<MFix>()) return m_fix(f->name, walk(f->body), t->pos);
    if (auto* an = t->as<MAnnot>()) return m_annot(walk(an->t), walk(an->ty), t->pos);
    if (auto* oa = t->as<MOrdAbs>())
      return m_ord_abs(oa->name, walk(oa->body), t->pos);
    if (auto* e = t->as<MEps>())
      return m_eps(e->name, walk(e->in_ty), walk(e->body), walk(e->notin_ty),
                   t->pos);
    if (auto* ls = t->as<MLetSuchThat>())
      return m_let_such_that(ls->tyname, ls->var, walk(ls->body), t->pos);
    return t;
  }
};

void collect_into(Session& s, const TypePtr& ty, std::vector<OrdPtr>& args) {
  std::vector<OrdPtr> tmp;
  collect_ordinals(ty, tmp);
  for (auto& o : tmp) {
    OrdPtr ro = s.store.resolve(o);
    if (ro->as<OInf>() || !s.store.fully_resolved(ro)) continue;
    bool seen = false;
    for (auto& e : args) seen = seen || ord_equal(e, ro);
    if (!seen) args.push_back(ro);
  }
}

}  // namespace

Skeleton build_skeleton(Session& s, const TermPtr& term, const TypePtr& lhs,
                        const TypePtr& rhs) {
  Skeleton out;
  TermPtr m = term ? s.store.resolve(term) : nullptr;
  TypePtr l = s.store.resolve(lhs);
  TypePtr r = rhs ? s.store.resolve(rhs) : nullptr;

  SkeletonBuilder b{s};
  if (m) collect_into(s, t_eps_in("_", m, t_record({}), {}), b.args);
  collect_into(s, l, b.args);
  if (r) collect_into(s, r, b.args);

  out.args = b.args;
  if (m) out.term = b.walk(m);
  out.lhs = b.walk(l);
  if (r) out.rhs = b.walk(r);
  out.args = b.args;  // unchanged by walking
  return out;
}

// ---------------------------------------------------------------------------
// Generalisation for subtyping (G+).
// ---------------------------------------------------------------------------

GeneraliseOutcome generalise_sub(Session& s, const PosCtx& g, const TermPtr& t,
                                 const TypePtr& a, const TypePtr& b) {
  // Subtype hypotheses are keyed on the type pair only: the formulas in a
  // proof are identified by subformula pointers of the original judgment.
  (void)t;
  Skeleton sk = build_skeleton(s, nullptr, a, b);
  GeneraliseOutcome out;
  out.args = sk.args;

  for (auto it = s.registry.rbegin(); it != s.registry.rend(); ++it) {
    const GeneralAbstractSequent& gas = *it;
    if (gas.is_typing || !gas.skel_rhs) continue;
    if (gas.arity != static_cast<int>(sk.args.size())) continue;
    if (!alpha_equal(gas.skel_lhs, sk.lhs) || !alpha_equal(gas.skel_rhs, sk.rhs))
      continue;
    out.hit = true;
    out.gas_id = gas.id;
    out.edge = safe_edge_matrix(s, g, s.enclosing_stack.back().params, sk.args);
    s.graph.add_edge(s.enclosing_stack.back().node, gas.node, out.edge);
    return out;
  }

  GeneralAbstractSequent gas;
  gas.id = static_cast<int>(s.registry.size());
  gas.is_typing = false;
  gas.skel_lhs = sk.lhs;
  gas.skel_rhs = sk.rhs;
  gas.arity = static_cast<int>(sk.args.size());
  gas.reg_args = sk.args;
  gas.node = s.graph.add_node(gas.arity);
  s.graph.add_edge(
      s.enclosing_stack.back().node, gas.node,
      safe_edge_matrix(s, g, s.enclosing_stack.back().params, gas.reg_args));
  s.registry.push_back(gas);
  out.gas_id = gas.id;
  if (s.subtype_depth > 0) ++s.subtype_registrations;
  return out;
}

// ---------------------------------------------------------------------------
// The local subtyping engine.
// ---------------------------------------------------------------------------

namespace {

struct EnclosingGuard {
  Session& s;
  EnclosingGuard(Session& s_, int node, std::vector<OrdPtr> params) : s(s_) {
    s.enclosing_stack.push_back(Session::Enclosing{node, std::move(params)});
  }
  ~EnclosingGuard() { s.enclosing_stack.pop_back(); }
};

[[noreturn]] void clash(Session& s, const PosCtx& g, const TermPtr& t,
                        const TypePtr& a, const TypePtr& b) {
  (void)g;
  std::string subject = t->as<MEps>() ? display_epsilon(t) : show(t);
  std::string msg = subject + " has type " + show(s.store.resolve(a)) +
                    " and is used with type " + show(s.store.resolve(b));
  std::string detail;
  if (s.last_typing) detail = "last typing judgment: " + show(*s.last_typing);
  SourcePos pos = t->pos.known() ? t->pos : s.current_pos;
  throw TypeError(TypeErrorKind::Clash, pos, msg, detail);
}

bool is_unset_uvar(Session& s, const TypePtr& t, int* root) {
  if (auto* u = t->as<TUVar>()) {
    const TypeUVarState& st = s.store.type_state(u->id);
    if (!st.bound) {
      *root = s.store.type_root(u->id);
      return true;
    }
  }
  return false;
}

OrdPtr size_of(const TypePtr& t) {
  if (auto* m = t->as<TMu>()) return m->size;
  if (auto* n = t->as<TNu>()) return n->size;
  return nullptr;
}

ProofPtr subtype_rec(Session& s, const PosCtx& g, const TermPtr& t, TypePtr a,
                     TypePtr b);

// The structural mu/nu rule for a judgment whose left or right head is
// sized; runs after generalisation.
ProofPtr mu_nu_step(Session& s, const PosCtx& g, const TermPtr& t,
                    const TypePtr& a, const TypePtr& b, const Judgment& j) {
  if (auto* m = a->as<TMu>()) {
    // Unfold on the left; the nonzero assumption and the fresh witness are
    // recorded through the meet connective and discharged by its
    // elimination step.
    OrdPtr k = s.store.resolve(m->size);
    auto [w, g2] = fresh_witness(g.with_nonzero(k), k, s.ids);
    OrdFacts facts;
    facts.nonzero.push_back(k);
    facts.strict.emplace_back(w, k);
    TypePtr unfolded =
        subst_type_var(m->body, m->name, t_mu(w, m->name, m->body));
    ProofPtr sub = subtype_rec(s, g, t, unfolded, t_meet(b, facts));
    return proof_node("μ_l", j, {sub});
  }
  if (auto* n = b->as<TNu>()) {
    OrdPtr k = s.store.resolve(n->size);
    auto [w, g2] = fresh_witness(g.with_nonzero(k), k, s.ids);
    OrdFacts facts;
    facts.nonzero.push_back(k);
    facts.strict.emplace_back(w, k);
    TypePtr unfolded =
        subst_type_var(n->body, n->name, t_nu(w, n->name, n->body));
    ProofPtr sub = subtype_rec(s, g, t, t_join(a, facts), unfolded);
    return proof_node("ν_r", j, {sub});
  }
  if (auto* m = b->as<TMu>()) {
    // Fold on the right; the size commits now. At inf the construction is
    // stationary.
    OrdPtr k = s.store.resolve(m->size);
    TypePtr inner;
    if (k->as<OInf>()) {
      inner = t_mu(o_inf(), m->name, m->body);
    } else {
      OrdPtr o = s.store.fresh_ord_uvar();
      s.store.constrain_ord_upper(o->as<OUVar>()->id, k);
      OrdPtr committed = s.store.resolve_ord_uvar(o->as<OUVar>()->id, g);
      inner = t_mu(committed, m->name, m->body);
    }
    ProofPtr sub =
        subtype_rec(s, g, t, a, subst_type_var(m->body, m->name, inner));
    return proof_node("μ_r", j, {sub});
  }
  auto* n = a->as<TNu>();
  OrdPtr k = s.store.resolve(n->size);
  TypePtr inner;
  if (k->as<OInf>()) {
    inner = t_nu(o_inf(), n->name, n->body);
  } else {
    OrdPtr o = s.store.fresh_ord_uvar();
    s.store.constrain_ord_upper(o->as<OUVar>()->id, k);
    OrdPtr committed = s.store.resolve_ord_uvar(o->as<OUVar>()->id, g);
    inner = t_nu(committed, n->name, n->body);
  }
  ProofPtr sub =
      subtype_rec(s, g, t, subst_type_var(n->body, n->name, inner), b);
  return proof_node("ν_l", j, {sub});
}

ProofPtr subtype_rec(Session& s, const PosCtx& g, const TermPtr& t, TypePtr a,
                     TypePtr b) {
  spend_step(s);
  a = s.store.resolve_head(a);
  b = s.store.resolve_head(b);
  if (auto* d = a->as<TDot>())
    return subtype_rec(s, g, t, resolve_dot(s, d->h, d->name, a->pos), b);
  if (auto* d = b->as<TDot>())
    return subtype_rec(s, g, t, a, resolve_dot(s, d->h, d->name, b->pos));

  Judgment j{g, t, a, b};
  s.last_subtyping = j;

  if (sized_alpha_leq(s, g, a, b)) return proof_leaf("=", j);

  if (auto* me = b->as<TMeet>()) {
    ProofPtr sub = subtype_rec(s, g.with_facts(me->facts), t, a, me->body);
    return proof_node("∨_r", j, {sub});
  }
  if (auto* jo = a->as<TJoin>()) {
    ProofPtr sub = subtype_rec(s, g.with_facts(jo->facts), t, jo->body, b);
    return proof_node("∧_l", j, {sub});
  }
  if (auto* me = a->as<TMeet>()) {
    ProofPtr sub = subtype_rec(s, g.with_facts(me->facts), t, me->body, b);
    return proof_node("∧_l", j, {sub});
  }
  if (auto* jo = b->as<TJoin>()) {
    ProofPtr sub = subtype_rec(s, g.with_facts(jo->facts), t, a, jo->body);
    return proof_node("∨_r", j, {sub});
  }

  int ra = -1, rb = -1;
  bool ua = is_unset_uvar(s, a, &ra);
  bool ub = is_unset_uvar(s, b, &rb);
  if (ua && ub) {
    s.store.unify_uvars(ra, rb);
    return proof_leaf("=", j);
  }
  if (ua) {
    if (auto* rec = b->as<TRecord>()) {
      // Delayed upper bound: the variable's state tracks projected fields.
      for (auto& [l, ft] : rec->fields)
        s.store.constrain_field(ra, FieldKind::RecordUpper, l, ft);
      return proof_leaf("=", j);
    }
    s.store.bind_type_uvar(ra, b);
    return proof_leaf("=", j);
  }
  if (ub) {
    if (auto* sum = a->as<TSum>()) {
      // Delayed lower bound: constructed variants.
      for (auto& [c, ft] : sum->ctors)
        s.store.constrain_field(rb, FieldKind::VariantLower, c, ft);
      return proof_leaf("=", j);
    }
    s.store.bind_type_uvar(rb, a);
    return proof_leaf("=", j);
  }
  if (auto* so = a->as<TSecondOrder>()) {
    s.store.solve_type_second_order(so->id, b);
    return proof_leaf("=", j);
  }
  if (auto* so = b->as<TSecondOrder>()) {
    s.store.solve_type_second_order(so->id, a);
    return proof_leaf("=", j);
  }

  // A mu/nu size that is still a unification variable commits first.
  for (const TypePtr& side : {a, b}) {
    if (OrdPtr sz = size_of(side)) {
      OrdPtr r = s.store.resolve(sz);
      if (auto* u = r->as<OUVar>()) {
        s.store.resolve_ord_uvar(u->id, g);
        return subtype_rec(s, g, t, a, b);
      }
    }
  }

  bool sized_head = a->as<TMu>() || a->as<TNu>() || b->as<TMu>() || b->as<TNu>();
  if (sized_head) {
    GeneraliseOutcome out = generalise_sub(s, g, t, a, b);
    if (out.hit) {
      ProofPtr leaf = proof_leaf("H_" + std::to_string(out.gas_id + 1), j);
      leaf->hyp = HypLink{out.gas_id, out.edge};
      return leaf;
    }
    const GeneralAbstractSequent& gas = s.registry[out.gas_id];
    EnclosingGuard guard(s, gas.node, gas.reg_args);
    return mu_nu_step(s, g, t, a, b, j);
  }

  // Right quantifier rules (they commute with the left ones; fixed order).
  if (auto* f = b->as<TForall>()) {
    TypePtr eps = t_eps_notin(f->name, t, f->body, b->pos);
    ProofPtr sub = subtype_rec(s, g, t, a, subst_type_var(f->body, f->name, eps));
    return proof_node("∀_r", j, {sub});
  }
  if (auto* e = b->as<TExists>()) {
    TypePtr u = s.store.fresh_type_uvar(b->pos);
    ProofPtr sub = subtype_rec(s, g, t, a, subst_type_var(e->body, e->name, u));
    return proof_node("∃_r", j, {sub});
  }
  if (auto* fo = b->as<TForallOrd>()) {
    OrdPtr k = o_var(s.ids.fresh_name(fo->name));
    ProofPtr sub = subtype_rec(s, g.with_nonzero(k), t, a,
                               subst_ord_var(fo->body, fo->name, k));
    return proof_node("∀_or", j, {sub});
  }
  if (auto* eo = b->as<TExistsOrd>()) {
    OrdPtr o = s.store.fresh_ord_uvar();
    ProofPtr sub = subtype_rec(s, g, t, a, subst_ord_var(eo->body, eo->name, o));
    return proof_node("∃_or", j, {sub});
  }

  // Left quantifier rules.
  if (auto* f = a->as<TForall>()) {
    TypePtr u = s.store.fresh_type_uvar(a->pos);
    ProofPtr sub = subtype_rec(s, g, t, subst_type_var(f->body, f->name, u), b);
    return proof_node("∀_l", j, {sub});
  }
  if (auto* e = a->as<TExists>()) {
    TypePtr eps = t_eps_in(e->name, t, e->body, a->pos);
    ProofPtr sub = subtype_rec(s, g, t, subst_type_var(e->body, e->name, eps), b);
    return proof_node("∃_l", j, {sub});
  }
  if (auto* fo = a->as<TForallOrd>()) {
    OrdPtr o = s.store.fresh_ord_uvar();
    ProofPtr sub = subtype_rec(s, g, t, subst_ord_var(fo->body, fo->name, o), b);
    return proof_node("∀_ol", j, {sub});
  }
  if (auto* eo = a->as<TExistsOrd>()) {
    OrdPtr k = o_var(s.ids.fresh_name(eo->name));
    ProofPtr sub = subtype_rec(s, g.with_nonzero(k), t,
                               subst_ord_var(eo->body, eo->name, k), b);
    return proof_node("∃_ol", j, {sub});
  }

  // Structural rules.
  if (auto* ar = a->as<TArrow>()) {
    if (auto* br = b->as<TArrow>()) {
      TermPtr u = m_eps("x", br->dom, m_app(t, m_var("x")), br->cod, t->pos);
      ProofPtr p1 = subtype_rec(s, g, u, br->dom, ar->dom);
      ProofPtr p2 = subtype_rec(s, g, m_app(t, u), ar->cod, br->cod);
      return proof_node("→", j, {p1, p2});
    }
    clash(s, g, t, a, b);
  }
  if (auto* ra2 = a->as<TRecord>()) {
    if (auto* rb2 = b->as<TRecord>()) {
      std::vector<ProofPtr> ps;
      for (auto& [l, ftb] : rb2->fields) {
        auto it = std::find_if(ra2->fields.begin(), ra2->fields.end(),
                               [&](auto& p) { return p.first == l; });
        if (it == ra2->fields.end()) clash(s, g, t, a, b);
        ps.push_back(subtype_rec(s, g, m_proj(t, l), it->second, ftb));
      }
      return proof_node("×", j, std::move(ps));
    }
    clash(s, g, t, a, b);
  }
  if (auto* sa = a->as<TSum>()) {
    if (auto* sb = b->as<TSum>()) {
      std::vector<ProofPtr> ps;
      for (auto& [c, fta] : sa->ctors) {
        auto it = std::find_if(sb->ctors.begin(), sb->ctors.end(),
                               [&](auto& p) { return p.first == c; });
        if (it == sb->ctors.end()) clash(s, g, t, a, b);
        TermPtr u = m_eps("x", fta, m_var("x"), it->second, t->pos);
        ps.push_back(subtype_rec(s, g, u, fta, it->second));
      }
      return proof_node("+", j, std::move(ps));
    }
    clash(s, g, t, a, b);
  }
  clash(s, g, t, a, b);
}

}  // namespace

ProofPtr subtype(Session& s, const PosCtx& g, const TermPtr& t,
                 const TypePtr& a, const TypePtr& b) {
  if (s.subtype_depth == 0) s.subtype_registrations = 0;
  ++s.subtype_depth;
  struct Dec {
    int& d;
    ~Dec() { --d; }
  } dec{s.subtype_depth};
  return subtype_rec(s, g, t, a, b);
}

}  // namespace szm
