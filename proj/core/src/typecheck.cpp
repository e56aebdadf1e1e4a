#include "szm/typecheck.hpp"

#include <algorithm>
#include <functional>

#include "szm/error.hpp"

namespace szm {

namespace {

struct EnclosingGuard {
  Session& s;
  EnclosingGuard(Session& s_, int node, std::vector<OrdPtr> params) : s(s_) {
    s.enclosing_stack.push_back(Session::Enclosing{node, std::move(params)});
  }
  ~EnclosingGuard() { s.enclosing_stack.pop_back(); }
};

[[noreturn]] void clash_at(Session& s, const TermPtr& t, const std::string& msg) {
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

// Strips top-level quantifiers from an expected type: type quantifiers via a
// choice operator, ordinal quantifiers via a fresh variable assumed nonzero.
// An ordinal abstraction term keeps its quantifier for the Lambda_o rule.
TypePtr strip_quantifiers(Session& s, PosCtx& g, const TermPtr& t, TypePtr c,
                          std::vector<std::string>& labels) {
  for (;;) {
    c = s.store.resolve_head(c);
    if (auto* d = c->as<TDot>()) {
      c = resolve_dot(s, d->h, d->name, c->pos);
      continue;
    }
    if (auto* f = c->as<TForall>()) {
      TypePtr eps = t_eps_notin(f->name, t, f->body, c->pos);
      c = subst_type_var(f->body, f->name, eps);
      labels.push_back("∀_r");
      continue;
    }
    if (auto* fo = c->as<TForallOrd>()) {
      if (t->as<MOrdAbs>()) break;
      OrdPtr k = o_var(s.ids.fresh_name(fo->name));
      g = g.with_nonzero(k);
      c = subst_ord_var(fo->body, fo->name, k);
      labels.push_back("Λ_o");
      continue;
    }
    break;
  }
  return c;
}

// --------------------------------------------------------------------------
// Scrutinee unfolding: drives the type of a case subject to a sum, keeping
// the discovered facts in the returned context.
// --------------------------------------------------------------------------

struct UnfoldSum {
  TypePtr sum;
  PosCtx g;
  std::vector<ProofPtr> chain;
};

UnfoldSum unfold_to_sum(Session& s, PosCtx g, const TermPtr& subject,
                        TypePtr ty) {
  std::vector<ProofPtr> chain;
  auto step = [&](const char* rule, const TypePtr& at) {
    chain.push_back(proof_leaf(rule, Judgment{g, subject, at, nullptr}));
  };
  for (;;) {
    spend_step(s);
    ty = s.store.resolve_head(ty);
    if (auto* d = ty->as<TDot>()) {
      ty = resolve_dot(s, d->h, d->name, ty->pos);
      continue;
    }
    if (ty->as<TSum>()) return {ty, g, chain};
    if (auto* m = ty->as<TMu>()) {
      OrdPtr k = s.store.resolve(m->size);
      if (auto* u = k->as<OUVar>()) k = s.store.resolve_ord_uvar(u->id, g);
      PosCtx g1 = g.with_nonzero(k);
      auto [w, g2] = fresh_witness(g1, k, s.ids);
      g = g2;
      ty = subst_type_var(m->body, m->name, t_mu(w, m->name, m->body));
      step("μ_l", ty);
      step("∨_r", ty);
      continue;
    }
    if (auto* n = ty->as<TNu>()) {
      OrdPtr k = s.store.resolve(n->size);
      if (auto* u = k->as<OUVar>()) k = s.store.resolve_ord_uvar(u->id, g);
      TypePtr inner;
      if (k->as<OInf>()) {
        inner = t_nu(o_inf(), n->name, n->body);
      } else {
        OrdPtr o = s.store.fresh_ord_uvar();
        s.store.constrain_ord_upper(o->as<OUVar>()->id, k);
        inner = t_nu(s.store.resolve_ord_uvar(o->as<OUVar>()->id, g), n->name,
                     n->body);
      }
      ty = subst_type_var(n->body, n->name, inner);
      step("ν_l", ty);
      continue;
    }
    if (auto* f = ty->as<TForall>()) {
      ty = subst_type_var(f->body, f->name, s.store.fresh_type_uvar(ty->pos));
      step("∀_l", ty);
      continue;
    }
    if (auto* e = ty->as<TExists>()) {
      ty = subst_type_var(e->body, e->name,
                          t_eps_in(e->name, subject, e->body, ty->pos));
      step("∃_l", ty);
      continue;
    }
    if (auto* fo = ty->as<TForallOrd>()) {
      ty = subst_ord_var(fo->body, fo->name, s.store.fresh_ord_uvar());
      step("∀_ol", ty);
      continue;
    }
    if (auto* eo = ty->as<TExistsOrd>()) {
      OrdPtr k = o_var(s.ids.fresh_name(eo->name));
      g = g.with_nonzero(k);
      ty = subst_ord_var(eo->body, eo->name, k);
      step("∃_ol", ty);
      continue;
    }
    if (auto* me = ty->as<TMeet>()) {
      g = g.with_facts(me->facts);
      ty = me->body;
      step("∨_r", ty);
      continue;
    }
    if (auto* jo = ty->as<TJoin>()) {
      g = g.with_facts(jo->facts);
      ty = jo->body;
      step("∧_l", ty);
      continue;
    }
    clash_at(s, subject,
             show(subject) + " has type " + show(s.store.resolve(ty)) +
                 " and is used with a variant type");
  }
}

ProofPtr typecheck_core(Session& s, const PosCtx& g, const TermPtr& t,
                        const TypePtr& c, const Judgment& j);

ProofPtr check(Session& s, const PosCtx& g, const TermPtr& t, TypePtr c) {
  spend_step(s);
  if (t->pos.known()) s.current_pos = t->pos;
  PosCtx g2 = g;
  std::vector<std::string> strips;
  TypePtr stripped = strip_quantifiers(s, g2, t, c, strips);
  Judgment j{g2, t, stripped, nullptr};
  s.last_typing = j;
  ProofPtr core = typecheck_core(s, g2, t, stripped, j);
  for (auto it = strips.rbegin(); it != strips.rend(); ++it)
    core = proof_node(*it, Judgment{g, t, c, nullptr}, {core});
  return core;
}

ProofPtr typecheck_core(Session& s, const PosCtx& g, const TermPtr& t,
                        const TypePtr& c, const Judgment& j) {
  // Choice operators and global names carry their type: conclude it, then
  // subsume into the expected type.
  if (auto* e = t->as<MEps>()) {
    ProofPtr sub = subtype(s, g, t, e->in_ty, c);
    return proof_node("=", j, {sub});
  }
  if (auto* d = t->as<MDef>()) {
    ProofPtr sub = subtype(s, g, t, d->ty, c);
    return proof_node("=", j, {sub});
  }
  if (auto* v = t->as<MVar>()) {
    clash_at(s, t, "unbound variable " + v->name);
  }

  if (auto* an = t->as<MAnnot>()) {
    ProofPtr p1 = check(s, g, an->t, an->ty);
    ProofPtr p2 = subtype(s, g, an->t, an->ty, c);
    return proof_node("⊂", j, {p1, p2});
  }

  if (auto* oa = t->as<MOrdAbs>()) {
    TypePtr ch = s.store.resolve_head(c);
    auto* fo = ch->as<TForallOrd>();
    if (!fo)
      clash_at(s, t, show(t) + " is an ordinal abstraction but is used with type " +
                         show(s.store.resolve(c)));
    OrdPtr k = o_var(s.ids.fresh_name(oa->name));
    PosCtx g2 = g.with_nonzero(k);
    Subst su;
    su.ords[oa->name] = k;
    TermPtr body = substitute(oa->body, su);
    ProofPtr sub = check(s, g2, body, subst_ord_var(fo->body, fo->name, k));
    return proof_node("Λ_o", j, {sub});
  }

  if (auto* l = t->as<MLam>()) {
    TypePtr ch = s.store.resolve_head(c);
    TypePtr dom, cod;
    ProofPtr shape;  // present when the arrow shape came from subtyping
    int root = -1;
    if (auto* ar = ch->as<TArrow>()) {
      dom = ar->dom;
      cod = ar->cod;
    } else if (is_unset_uvar(s, ch, &root)) {
      dom = s.store.fresh_type_uvar(t->pos);
      cod = s.store.fresh_type_uvar(t->pos);
      s.store.bind_type_uvar(root, t_arrow(dom, cod, t->pos));
    } else {
      dom = s.store.fresh_type_uvar(t->pos);
      cod = s.store.fresh_type_uvar(t->pos);
      shape = subtype(s, g, t, t_arrow(dom, cod, t->pos), ch);
    }
    TypePtr bind_ty = dom;
    ProofPtr domp;
    if (l->dom) {
      // A domain annotation constrains the incoming argument.
      TermPtr probe = m_eps(l->name, dom, m_var(l->name), *l->dom, t->pos);
      domp = subtype(s, g, probe, dom, *l->dom);
      bind_ty = *l->dom;
    }
    TermPtr u = m_eps(l->name, bind_ty, l->body, cod, t->pos);
    ProofPtr bodyp = check(s, g, substitute(l->body, l->name, u), cod);
    std::vector<ProofPtr> ps;
    if (shape) ps.push_back(shape);
    if (domp) ps.push_back(domp);
    ps.push_back(bodyp);
    return proof_node("→_i", j, std::move(ps));
  }

  if (auto* ap = t->as<MApp>()) {
    TypePtr dom = s.store.fresh_type_uvar(ap->arg->pos);
    TypePtr cod = s.store.fresh_type_uvar(t->pos);
    ProofPtr pf = check(s, g, ap->fn, t_arrow(dom, cod, ap->fn->pos));
    ProofPtr pa = check(s, g, ap->arg, dom);
    ProofPtr sub = subtype(s, g, t, cod, c);
    std::vector<ProofPtr> ps{pf, pa};
    if (sub->rule != "=" || !sub->premises.empty()) ps.push_back(sub);
    return proof_node("→_e", j, std::move(ps));
  }

  if (auto* r = t->as<MRecord>()) {
    std::vector<std::pair<std::string, TypePtr>> fields;
    for (auto& [lbl, f] : r->fields)
      fields.emplace_back(lbl, s.store.fresh_type_uvar(f->pos));
    ProofPtr sub = subtype(s, g, t, t_record(fields, t->pos), c);
    std::vector<ProofPtr> ps{sub};
    for (size_t i = 0; i < r->fields.size(); ++i)
      ps.push_back(check(s, g, r->fields[i].second, fields[i].second));
    return proof_node("×_i", j, std::move(ps));
  }

  if (auto* p = t->as<MProj>()) {
    TypePtr u_s = s.store.fresh_type_uvar(p->t->pos);
    ProofPtr p1 = check(s, g, p->t, u_s);
    TypePtr u = s.store.fresh_type_uvar(t->pos);
    ProofPtr p2 = subtype(s, g, p->t, u_s, t_record({{p->label, u}}, t->pos));
    ProofPtr p3 = subtype(s, g, t, u, c);
    return proof_node("×_e", j, {p1, p2, p3});
  }

  if (auto* ct = t->as<MCtor>()) {
    TypePtr payload = s.store.fresh_type_uvar(ct->payload->pos);
    ProofPtr sub = subtype(s, g, t, t_sum({{ct->name, payload}}, t->pos), c);
    ProofPtr pp = check(s, g, ct->payload, payload);
    return proof_node("+_i", j, {sub, pp});
  }

  if (auto* cs = t->as<MCase>()) {
    TypePtr u_sc = s.store.fresh_type_uvar(cs->scrut->pos);
    ProofPtr p_s = check(s, g, cs->scrut, u_sc);
    TypePtr t_sc = s.store.resolve_head(u_sc);
    PosCtx g2 = g;
    std::vector<ProofPtr> chain;
    TypePtr sum_ty;
    int root = -1;
    if (is_unset_uvar(s, t_sc, &root)) {
      std::vector<std::pair<std::string, TypePtr>> ctors;
      for (auto& br : cs->branches)
        ctors.emplace_back(br.ctor, s.store.fresh_type_uvar(cs->scrut->pos));
      sum_ty = t_sum(std::move(ctors), cs->scrut->pos);
      s.store.bind_type_uvar(root, sum_ty);
    } else {
      UnfoldSum u = unfold_to_sum(s, g, cs->scrut, t_sc);
      sum_ty = u.sum;
      g2 = u.g;
      chain = std::move(u.chain);
    }
    auto* sum = sum_ty->as<TSum>();
    std::vector<ProofPtr> ps;
    if (chain.empty()) {
      ps.push_back(p_s);
    } else {
      std::vector<ProofPtr> sc{p_s};
      sc.insert(sc.end(), chain.begin(), chain.end());
      ps.push_back(
          proof_node("=", Judgment{g2, cs->scrut, sum_ty, nullptr}, sc));
    }
    for (auto& [ctor, payload] : sum->ctors) {
      auto it = std::find_if(cs->branches.begin(), cs->branches.end(),
                             [&](auto& b) { return b.ctor == ctor; });
      if (it == cs->branches.end())
        clash_at(s, t, "match does not cover constructor " + ctor);
      (void)payload;
    }
    for (auto& br : cs->branches) {
      auto it = std::find_if(sum->ctors.begin(), sum->ctors.end(),
                             [&](auto& p) { return p.first == br.ctor; });
      if (it == sum->ctors.end()) continue;  // width: unreachable branch
      TermPtr body = br.body;
      if (!br.var.empty()) {
        TermPtr u = m_eps(br.var, it->second, br.body, c, br.body->pos);
        body = substitute(br.body, br.var, u);
      }
      ps.push_back(check(s, g2, body, c));
    }
    return proof_node("+_e", j, std::move(ps));
  }

  if (t->as<MFix>()) {
    ProofPtr node = proof_leaf("Y", j);
    PendingFixpoint p;
    p.fix = t;
    p.expected = c;
    p.ctx = g;
    p.enclosing_node = s.enclosing_stack.back().node;
    p.enclosing_params = s.enclosing_stack.back().params;
    p.generation = s.current_generation;
    p.node = node;
    p.pos = t->pos;
    s.queue.push_back(std::move(p));
    return node;
  }

  if (auto* ls = t->as<MLetSuchThat>()) {
    clash_at(s, t, "cannot resolve type " + ls->tyname + ": variable " +
                       ls->var + " has no known type here");
  }

  clash_at(s, t, "unhandled term form");
}

// --------------------------------------------------------------------------
// Fixpoint generalisation.
// --------------------------------------------------------------------------

bool has_ord_quantifier(const TypePtr& t) {
  if (t->as<TForallOrd>() || t->as<TExistsOrd>()) return true;
  if (auto* a = t->as<TArrow>())
    return has_ord_quantifier(a->dom) || has_ord_quantifier(a->cod);
  if (auto* r = t->as<TRecord>()) {
    for (auto& [_, f] : r->fields)
      if (has_ord_quantifier(f)) return true;
    return false;
  }
  if (auto* su = t->as<TSum>()) {
    for (auto& [_, f] : su->ctors)
      if (has_ord_quantifier(f)) return true;
    return false;
  }
  if (auto* f = t->as<TForall>()) return has_ord_quantifier(f->body);
  if (auto* e = t->as<TExists>()) return has_ord_quantifier(e->body);
  if (auto* m = t->as<TMu>()) return has_ord_quantifier(m->body);
  if (auto* n = t->as<TNu>()) return has_ord_quantifier(n->body);
  if (auto* me = t->as<TMeet>()) return has_ord_quantifier(me->body);
  if (auto* jo = t->as<TJoin>()) return has_ord_quantifier(jo->body);
  return false;
}

// Replaces inf at negative mu / positive nu positions by marker variables;
// the markers become abstracted holes whose instantiation is inf.
TypePtr decorate_inf(Session& s, const TypePtr& t, bool pos, int& counter) {
  if (auto* a = t->as<TArrow>())
    return t_arrow(decorate_inf(s, a->dom, !pos, counter),
                   decorate_inf(s, a->cod, pos, counter), t->pos);
  if (auto* r = t->as<TRecord>()) {
    std::vector<std::pair<std::string, TypePtr>> fs;
    for (auto& [l, f] : r->fields)
      fs.emplace_back(l, decorate_inf(s, f, pos, counter));
    return t_record(std::move(fs), t->pos);
  }
  if (auto* su = t->as<TSum>()) {
    std::vector<std::pair<std::string, TypePtr>> cs;
    for (auto& [c, f] : su->ctors)
      cs.emplace_back(c, decorate_inf(s, f, pos, counter));
    return t_sum(std::move(cs), t->pos);
  }
  if (auto* f = t->as<TForall>())
    return t_forall(f->name, decorate_inf(s, f->body, pos, counter), t->pos);
  if (auto* e = t->as<TExists>())
    return t_exists(e->name, decorate_inf(s, e->body, pos, counter), t->pos);
  if (auto* m = t->as<TMu>()) {
    OrdPtr size = s.store.resolve(m->size);
    if (size->as<OInf>() && !pos)
      size = o_var("#dec" + std::to_string(counter++));
    return t_mu(size, m->name, decorate_inf(s, m->body, pos, counter), t->pos);
  }
  if (auto* n = t->as<TNu>()) {
    OrdPtr size = s.store.resolve(n->size);
    if (size->as<OInf>() && pos)
      size = o_var("#dec" + std::to_string(counter++));
    return t_nu(size, n->name, decorate_inf(s, n->body, pos, counter), t->pos);
  }
  if (auto* me = t->as<TMeet>())
    return t_meet(decorate_inf(s, me->body, pos, counter), me->facts);
  if (auto* jo = t->as<TJoin>())
    return t_join(decorate_inf(s, jo->body, pos, counter), jo->facts);
  return t;
}

Skeleton pending_skeleton(Session& s, const PendingFixpoint& p) {
  TypePtr ty = s.store.resolve(p.expected);
  if (!has_ord_quantifier(ty)) {
    int counter = 0;
    ty = decorate_inf(s, ty, true, counter);
  }
  Skeleton sk = build_skeleton(s, p.fix, ty, nullptr);
  for (auto& a : sk.args)
    if (auto* v = a->as<OVar>())
      if (v->name.rfind("#dec", 0) == 0) a = o_inf();
  return sk;
}

}  // namespace

int generalise_fix(Session& s, const PendingFixpoint& p, Skeleton* out_skel) {
  Skeleton sk = pending_skeleton(s, p);
  GeneralAbstractSequent gas;
  gas.id = static_cast<int>(s.registry.size());
  gas.is_typing = true;
  gas.skel_term = sk.term;
  gas.skel_lhs = sk.lhs;
  gas.arity = static_cast<int>(sk.args.size());
  gas.reg_args = sk.args;
  gas.node = s.graph.add_node(gas.arity);
  s.graph.add_edge(p.enclosing_node, gas.node,
                   safe_edge_matrix(s, p.ctx, p.enclosing_params, gas.reg_args));
  s.registry.push_back(gas);
  if (out_skel) *out_skel = std::move(sk);
  return gas.id;
}

ProofPtr typecheck(Session& s, const PosCtx& g, const TermPtr& t,
                   const TypePtr& c) {
  return check(s, g, t, c);
}

namespace {

void process_pending(Session& s, PendingFixpoint& p) {
  if (p.generation > s.opts.unroll_depth) {
    std::string detail;
    if (s.last_typing) detail = "last typing judgment: " + show(*s.last_typing);
    throw TypeError(TypeErrorKind::UnrollDepthExceeded, p.pos,
                    "fixpoint unrolled more than " +
                        std::to_string(s.opts.unroll_depth) + " times",
                    detail);
  }
  // Re-strip: the expected type may have been refined since the obligation
  // was queued.
  std::vector<std::string> labels;
  p.expected = strip_quantifiers(s, p.ctx, p.fix, s.store.resolve(p.expected),
                                 labels);

  Skeleton sk = pending_skeleton(s, p);

  if (p.generation > s.opts.hyp_gate) {
    for (auto it = s.registry.rbegin(); it != s.registry.rend(); ++it) {
      const GeneralAbstractSequent& gas = *it;
      if (!gas.is_typing) continue;
      if (gas.arity != static_cast<int>(sk.args.size())) continue;
      if (!alpha_equal(gas.skel_term, sk.term)) continue;
      if (!alpha_equal(gas.skel_lhs, sk.lhs)) continue;
      SCMatrix mat = safe_edge_matrix(s, p.ctx, p.enclosing_params, sk.args);
      s.graph.add_edge(p.enclosing_node, gas.node, mat);
      p.node->rule = "H_" + std::to_string(gas.id + 1);
      p.node->hyp = HypLink{gas.id, mat};
      p.node->premises.clear();
      return;
    }
  }

  GeneralAbstractSequent gas;
  gas.id = static_cast<int>(s.registry.size());
  gas.is_typing = true;
  gas.skel_term = sk.term;
  gas.skel_lhs = sk.lhs;
  gas.arity = static_cast<int>(sk.args.size());
  gas.reg_args = sk.args;
  gas.node = s.graph.add_node(gas.arity);
  s.graph.add_edge(p.enclosing_node, gas.node,
                   safe_edge_matrix(s, p.ctx, p.enclosing_params, gas.reg_args));
  s.registry.push_back(gas);

  auto* fx = p.fix->as<MFix>();
  TermPtr unrolled = substitute(fx->body, fx->name, p.fix);
  EnclosingGuard guard(s, gas.node, gas.reg_args);
  int save_gen = s.current_generation;
  s.current_generation = p.generation + 1;
  ProofPtr sub = check(s, p.ctx, unrolled, p.expected);
  s.current_generation = save_gen;
  p.node->rule = "I_" + std::to_string(gas.id + 1);
  p.node->premises = {sub};
}

}  // namespace

void run_breadth_first(Session& s) {
  while (!s.queue.empty()) {
    PendingFixpoint p = std::move(s.queue.front());
    s.queue.pop_front();
    process_pending(s, p);
  }
}

void require_well_founded(Session& s, SourcePos pos) {
  WfVerdict v = check_well_founded(s.graph);
  if (v.accepted) return;
  std::string detail = "offending loop matrix:\n" + v.witness.dump();
  throw TypeError(TypeErrorKind::NotWellFounded, pos,
                  "recursion is not well-founded (size-change check failed)",
                  detail);
}

}  // namespace szm
