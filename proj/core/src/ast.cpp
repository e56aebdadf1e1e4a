#include "szm/ast.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>

namespace szm {

// ---------------------------------------------------------------------------
// Constructors.
// ---------------------------------------------------------------------------

OrdPtr o_inf() {
  static const OrdPtr inf = std::make_shared<Ordinal>(Ordinal{OInf{}});
  return inf;
}
OrdPtr o_succ(OrdPtr o) {
  if (o->as<OInf>()) return o;  // inf is absorbing under S
  return std::make_shared<Ordinal>(Ordinal{OSucc{std::move(o)}});
}
OrdPtr o_var(std::string name) {
  return std::make_shared<Ordinal>(Ordinal{OVar{std::move(name)}});
}
OrdPtr o_witness(int id, OrdPtr bound) {
  return std::make_shared<Ordinal>(Ordinal{OWitness{id, std::move(bound)}});
}
OrdPtr o_uvar(int id) { return std::make_shared<Ordinal>(Ordinal{OUVar{id}}); }
OrdPtr o_second(int id, std::vector<OrdPtr> args) {
  return std::make_shared<Ordinal>(Ordinal{OSecondOrder{id, std::move(args)}});
}

template <class V>
static TypePtr mk_type(V v, SourcePos p) {
  return std::make_shared<Type>(Type{std::move(v), p});
}

TypePtr t_var(std::string n, SourcePos p) { return mk_type(TVar{std::move(n)}, p); }
TypePtr t_arrow(TypePtr a, TypePtr b, SourcePos p) {
  return mk_type(TArrow{std::move(a), std::move(b)}, p);
}
TypePtr t_record(std::vector<std::pair<std::string, TypePtr>> fs, SourcePos p) {
  return mk_type(TRecord{std::move(fs)}, p);
}
TypePtr t_sum(std::vector<std::pair<std::string, TypePtr>> cs, SourcePos p) {
  return mk_type(TSum{std::move(cs)}, p);
}
TypePtr t_forall(std::string n, TypePtr b, SourcePos p) {
  return mk_type(TForall{std::move(n), std::move(b)}, p);
}
TypePtr t_exists(std::string n, TypePtr b, SourcePos p) {
  return mk_type(TExists{std::move(n), std::move(b)}, p);
}
TypePtr t_forall_ord(std::string n, TypePtr b, SourcePos p) {
  return mk_type(TForallOrd{std::move(n), std::move(b)}, p);
}
TypePtr t_exists_ord(std::string n, TypePtr b, SourcePos p) {
  return mk_type(TExistsOrd{std::move(n), std::move(b)}, p);
}
TypePtr t_mu(OrdPtr size, std::string n, TypePtr b, SourcePos p) {
  return mk_type(TMu{std::move(size), std::move(n), std::move(b)}, p);
}
TypePtr t_nu(OrdPtr size, std::string n, TypePtr b, SourcePos p) {
  return mk_type(TNu{std::move(size), std::move(n), std::move(b)}, p);
}
TypePtr t_eps_in(std::string n, TermPtr t, TypePtr b, SourcePos p) {
  return mk_type(TEpsIn{std::move(n), std::move(t), std::move(b), p}, p);
}
TypePtr t_eps_notin(std::string n, TermPtr t, TypePtr b, SourcePos p) {
  return mk_type(TEpsNotIn{std::move(n), std::move(t), std::move(b), p}, p);
}
TypePtr t_meet(TypePtr b, OrdFacts f) {
  return mk_type(TMeet{std::move(b), std::move(f)}, {});
}
TypePtr t_join(TypePtr b, OrdFacts f) {
  return mk_type(TJoin{std::move(b), std::move(f)}, {});
}
TypePtr t_uvar(int id) { return mk_type(TUVar{id}, {}); }
TypePtr t_second(int id, std::vector<OrdPtr> args) {
  return mk_type(TSecondOrder{id, std::move(args)}, {});
}
TypePtr t_dot(TermPtr h, std::string name, SourcePos p) {
  return mk_type(TDot{std::move(h), std::move(name)}, p);
}

template <class V>
static TermPtr mk_term(V v, SourcePos p) {
  return std::make_shared<Term>(Term{std::move(v), p});
}

TermPtr m_var(std::string n, SourcePos p) { return mk_term(MVar{std::move(n)}, p); }
TermPtr m_lam(std::string n, TermPtr body, SourcePos p,
              std::optional<TypePtr> dom) {
  return mk_term(MLam{std::move(n), std::move(dom), std::move(body)}, p);
}
TermPtr m_app(TermPtr f, TermPtr a, SourcePos p) {
  return mk_term(MApp{std::move(f), std::move(a)}, p);
}
TermPtr m_record(std::vector<std::pair<std::string, TermPtr>> fs, SourcePos p) {
  return mk_term(MRecord{std::move(fs)}, p);
}
TermPtr m_proj(TermPtr t, std::string l, SourcePos p) {
  return mk_term(MProj{std::move(t), std::move(l)}, p);
}
TermPtr m_ctor(std::string c, TermPtr payload, SourcePos p) {
  return mk_term(MCtor{std::move(c), std::move(payload)}, p);
}
TermPtr m_case(TermPtr s, std::vector<MBranch> bs, SourcePos p) {
  return mk_term(MCase{std::move(s), std::move(bs)}, p);
}
TermPtr m_fix(std::string n, TermPtr b, SourcePos p) {
  return mk_term(MFix{std::move(n), std::move(b)}, p);
}
TermPtr m_annot(TermPtr t, TypePtr ty, SourcePos p) {
  return mk_term(MAnnot{std::move(t), std::move(ty)}, p);
}
TermPtr m_ord_abs(std::string n, TermPtr b, SourcePos p) {
  return mk_term(MOrdAbs{std::move(n), std::move(b)}, p);
}
TermPtr m_eps(std::string n, TypePtr in_ty, TermPtr body, TypePtr notin_ty,
              SourcePos p) {
  return mk_term(
      MEps{std::move(n), std::move(in_ty), std::move(body), std::move(notin_ty)},
      p);
}
TermPtr m_def(std::string n, TypePtr ty, TermPtr value, SourcePos p) {
  return mk_term(MDef{std::move(n), std::move(ty), std::move(value)}, p);
}
TermPtr m_let_such_that(std::string tyname, std::string var, TermPtr body,
                        SourcePos p) {
  return mk_term(MLetSuchThat{std::move(tyname), std::move(var), std::move(body)},
                 p);
}

std::string IdSource::fresh_name(const std::string& base) {
  return base + "'" + std::to_string(next_name++);
}

// ---------------------------------------------------------------------------
// Free variables (all three namespaces at once).
// ---------------------------------------------------------------------------

namespace {

struct FreeVars {
  std::set<std::string> terms, types, ords;
};

void free_vars(const TermPtr& t, FreeVars& fv);
void free_vars(const TypePtr& t, FreeVars& fv);

void free_vars(const OrdPtr& o, FreeVars& fv) {
  if (auto* s = o->as<OSucc>()) return free_vars(s->arg, fv);
  if (auto* v = o->as<OVar>()) {
    fv.ords.insert(v->name);
    return;
  }
  if (auto* w = o->as<OWitness>()) return free_vars(w->bound, fv);
  if (auto* so = o->as<OSecondOrder>())
    for (auto& a : so->args) free_vars(a, fv);
}

void free_vars_facts(const OrdFacts& f, FreeVars& fv) {
  for (auto& o : f.nonzero) free_vars(o, fv);
  for (auto& [a, b] : f.strict) {
    free_vars(a, fv);
    free_vars(b, fv);
  }
}

// Runs `body` with `name` removed from one namespace, restoring after.
template <class F>
void without(std::set<std::string>& ns, const std::string& name, F body) {
  bool had = ns.count(name) > 0;
  body();
  if (!had) ns.erase(name);
}

void free_vars(const TypePtr& t, FreeVars& fv) {
  if (auto* v = t->as<TVar>()) {
    fv.types.insert(v->name);
  } else if (auto* a = t->as<TArrow>()) {
    free_vars(a->dom, fv);
    free_vars(a->cod, fv);
  } else if (auto* r = t->as<TRecord>()) {
    for (auto& [_, ft] : r->fields) free_vars(ft, fv);
  } else if (auto* s = t->as<TSum>()) {
    for (auto& [_, ct] : s->ctors) free_vars(ct, fv);
  } else if (auto* f = t->as<TForall>()) {
    FreeVars inner;
    free_vars(f->body, inner);
    inner.types.erase(f->name);
    fv.terms.insert(inner.terms.begin(), inner.terms.end());
    fv.types.insert(inner.types.begin(), inner.types.end());
    fv.ords.insert(inner.ords.begin(), inner.ords.end());
  } else if (auto* e = t->as<TExists>()) {
    FreeVars inner;
    free_vars(e->body, inner);
    inner.types.erase(e->name);
    fv.terms.insert(inner.terms.begin(), inner.terms.end());
    fv.types.insert(inner.types.begin(), inner.types.end());
    fv.ords.insert(inner.ords.begin(), inner.ords.end());
  } else if (auto* fo = t->as<TForallOrd>()) {
    FreeVars inner;
    free_vars(fo->body, inner);
    inner.ords.erase(fo->name);
    fv.terms.insert(inner.terms.begin(), inner.terms.end());
    fv.types.insert(inner.types.begin(), inner.types.end());
    fv.ords.insert(inner.ords.begin(), inner.ords.end());
  } else if (auto* eo = t->as<TExistsOrd>()) {
    FreeVars inner;
    free_vars(eo->body, inner);
    inner.ords.erase(eo->name);
    fv.terms.insert(inner.terms.begin(), inner.terms.end());
    fv.types.insert(inner.types.begin(), inner.types.end());
    fv.ords.insert(inner.ords.begin(), inner.ords.end());
  } else if (auto* m = t->as<TMu>()) {
    free_vars(m->size, fv);
    FreeVars inner;
    free_vars(m->body, inner);
    inner.types.erase(m->name);
    fv.terms.insert(inner.terms.begin(), inner.terms.end());
    fv.types.insert(inner.types.begin(), inner.types.end());
    fv.ords.insert(inner.ords.begin(), inner.ords.end());
  } else if (auto* n = t->as<TNu>()) {
    free_vars(n->size, fv);
    FreeVars inner;
    free_vars(n->body, inner);
    inner.types.erase(n->name);
    fv.terms.insert(inner.terms.begin(), inner.terms.end());
    fv.types.insert(inner.types.begin(), inner.types.end());
    fv.ords.insert(inner.ords.begin(), inner.ords.end());
  } else if (auto* ei = t->as<TEpsIn>()) {
    free_vars(ei->t, fv);
    FreeVars inner;
    free_vars(ei->body, inner);
    inner.types.erase(ei->name);
    fv.terms.insert(inner.terms.begin(), inner.terms.end());
    fv.types.insert(inner.types.begin(), inner.types.end());
    fv.ords.insert(inner.ords.begin(), inner.ords.end());
  } else if (auto* en = t->as<TEpsNotIn>()) {
    free_vars(en->t, fv);
    FreeVars inner;
    free_vars(en->body, inner);
    inner.types.erase(en->name);
    fv.terms.insert(inner.terms.begin(), inner.terms.end());
    fv.types.insert(inner.types.begin(), inner.types.end());
    fv.ords.insert(inner.ords.begin(), inner.ords.end());
  } else if (auto* me = t->as<TMeet>()) {
    free_vars(me->body, fv);
    free_vars_facts(me->facts, fv);
  } else if (auto* jo = t->as<TJoin>()) {
    free_vars(jo->body, fv);
    free_vars_facts(jo->facts, fv);
  } else if (auto* so = t->as<TSecondOrder>()) {
    for (auto& a : so->args) free_vars(a, fv);
  } else if (auto* d = t->as<TDot>()) {
    free_vars(d->h, fv);
  }
}

void free_vars(const TermPtr& t, FreeVars& fv) {
  if (auto* v = t->as<MVar>()) {
    fv.terms.insert(v->name);
  } else if (auto* l = t->as<MLam>()) {
    if (l->dom) free_vars(*l->dom, fv);
    FreeVars inner;
    free_vars(l->body, inner);
    inner.terms.erase(l->name);
    fv.terms.insert(inner.terms.begin(), inner.terms.end());
    fv.types.insert(inner.types.begin(), inner.types.end());
    fv.ords.insert(inner.ords.begin(), inner.ords.end());
  } else if (auto* a = t->as<MApp>()) {
    free_vars(a->fn, fv);
    free_vars(a->arg, fv);
  } else if (auto* r = t->as<MRecord>()) {
    for (auto& [_, ft] : r->fields) free_vars(ft, fv);
  } else if (auto* p = t->as<MProj>()) {
    free_vars(p->t, fv);
  } else if (auto* c = t->as<MCtor>()) {
    free_vars(c->payload, fv);
  } else if (auto* cs = t->as<MCase>()) {
    free_vars(cs->scrut, fv);
    for (auto& br : cs->branches) {
      FreeVars inner;
      free_vars(br.body, inner);
      inner.terms.erase(br.var);
      fv.terms.insert(inner.terms.begin(), inner.terms.end());
      fv.types.insert(inner.types.begin(), inner.types.end());
      fv.ords.insert(inner.ords.begin(), inner.ords.end());
    }
  } else if (auto* f = t->as<MFix>()) {
    FreeVars inner;
    free_vars(f->body, inner);
    inner.terms.erase(f->name);
    fv.terms.insert(inner.terms.begin(), inner.terms.end());
    fv.types.insert(inner.types.begin(), inner.types.end());
    fv.ords.insert(inner.ords.begin(), inner.ords.end());
  } else if (auto* an = t->as<MAnnot>()) {
    free_vars(an->t, fv);
    free_vars(an->ty, fv);
  } else if (auto* oa = t->as<MOrdAbs>()) {
    FreeVars inner;
    free_vars(oa->body, inner);
    inner.ords.erase(oa->name);
    fv.terms.insert(inner.terms.begin(), inner.terms.end());
    fv.types.insert(inner.types.begin(), inner.types.end());
    fv.ords.insert(inner.ords.begin(), inner.ords.end());
  } else if (auto* e = t->as<MEps>()) {
    free_vars(e->in_ty, fv);
    free_vars(e->notin_ty, fv);
    FreeVars inner;
    free_vars(e->body, inner);
    inner.terms.erase(e->name);
    fv.terms.insert(inner.terms.begin(), inner.terms.end());
    fv.types.insert(inner.types.begin(), inner.types.end());
    fv.ords.insert(inner.ords.begin(), inner.ords.end());
  } else if (t->as<MDef>()) {
    // global reference: closed
  } else if (auto* ls = t->as<MLetSuchThat>()) {
    fv.terms.insert(ls->var);
    FreeVars inner;
    free_vars(ls->body, inner);
    inner.types.erase(ls->tyname);
    fv.terms.insert(inner.terms.begin(), inner.terms.end());
    fv.types.insert(inner.types.begin(), inner.types.end());
    fv.ords.insert(inner.ords.begin(), inner.ords.end());
  }
}

std::string freshen(const std::string& base, const std::set<std::string>& avoid) {
  if (!avoid.count(base)) return base;
  for (int i = 0;; ++i) {
    std::string cand = base + "'" + (i ? std::to_string(i) : std::string());
    if (!avoid.count(cand)) return cand;
  }
}

// Names that must not be captured: free variables of every image in s.
FreeVars images_free(const Subst& s) {
  FreeVars fv;
  for (auto& [_, u] : s.terms) free_vars(u, fv);
  for (auto& [_, u] : s.types) free_vars(u, fv);
  for (auto& [_, u] : s.ords) free_vars(u, fv);
  return fv;
}

enum class Ns { Term, Type, Ord };

// Handles one binder: removes it from the substitution; renames it when an
// image would capture it. Returns the (possibly renamed) binder and the
// substitution to use for the body.
std::pair<std::string, Subst> enter_binder(const std::string& name, Ns ns,
                                           const Subst& s) {
  Subst inner = s;
  switch (ns) {
    case Ns::Term: inner.terms.erase(name); break;
    case Ns::Type: inner.types.erase(name); break;
    case Ns::Ord: inner.ords.erase(name); break;
  }
  FreeVars fv = images_free(inner);
  const std::set<std::string>& pool =
      ns == Ns::Term ? fv.terms : (ns == Ns::Type ? fv.types : fv.ords);
  if (!pool.count(name)) return {name, std::move(inner)};
  std::string fresh = freshen(name, pool);
  switch (ns) {
    case Ns::Term: inner.terms[name] = m_var(fresh); break;
    case Ns::Type: inner.types[name] = t_var(fresh); break;
    case Ns::Ord: inner.ords[name] = o_var(fresh); break;
  }
  return {fresh, std::move(inner)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Substitution.
// ---------------------------------------------------------------------------

OrdPtr substitute(const OrdPtr& o, const Subst& s) {
  if (s.empty()) return o;
  if (auto* su = o->as<OSucc>()) {
    OrdPtr a = substitute(su->arg, s);
    return a == su->arg ? o : o_succ(a);
  }
  if (auto* v = o->as<OVar>()) {
    auto it = s.ords.find(v->name);
    return it == s.ords.end() ? o : it->second;
  }
  if (auto* w = o->as<OWitness>()) {
    OrdPtr b = substitute(w->bound, s);
    return b == w->bound ? o : o_witness(w->id, b);
  }
  if (auto* so = o->as<OSecondOrder>()) {
    std::vector<OrdPtr> args;
    bool changed = false;
    for (auto& a : so->args) {
      args.push_back(substitute(a, s));
      changed |= args.back() != a;
    }
    return changed ? o_second(so->id, std::move(args)) : o;
  }
  return o;
}

static OrdFacts substitute(const OrdFacts& f, const Subst& s) {
  OrdFacts out;
  for (auto& o : f.nonzero) out.nonzero.push_back(substitute(o, s));
  for (auto& [a, b] : f.strict)
    out.strict.emplace_back(substitute(a, s), substitute(b, s));
  return out;
}

TypePtr substitute(const TypePtr& t, const Subst& s) {
  if (s.empty()) return t;
  if (auto* v = t->as<TVar>()) {
    auto it = s.types.find(v->name);
    return it == s.types.end() ? t : it->second;
  }
  if (auto* a = t->as<TArrow>())
    return t_arrow(substitute(a->dom, s), substitute(a->cod, s), t->pos);
  if (auto* r = t->as<TRecord>()) {
    std::vector<std::pair<std::string, TypePtr>> fs;
    for (auto& [l, ft] : r->fields) fs.emplace_back(l, substitute(ft, s));
    return t_record(std::move(fs), t->pos);
  }
  if (auto* su = t->as<TSum>()) {
    std::vector<std::pair<std::string, TypePtr>> cs;
    for (auto& [c, ct] : su->ctors) cs.emplace_back(c, substitute(ct, s));
    return t_sum(std::move(cs), t->pos);
  }
  if (auto* f = t->as<TForall>()) {
    auto [n, inner] = enter_binder(f->name, Ns::Type, s);
    return t_forall(n, substitute(f->body, inner), t->pos);
  }
  if (auto* e = t->as<TExists>()) {
    auto [n, inner] = enter_binder(e->name, Ns::Type, s);
    return t_exists(n, substitute(e->body, inner), t->pos);
  }
  if (auto* fo = t->as<TForallOrd>()) {
    auto [n, inner] = enter_binder(fo->name, Ns::Ord, s);
    return t_forall_ord(n, substitute(fo->body, inner), t->pos);
  }
  if (auto* eo = t->as<TExistsOrd>()) {
    auto [n, inner] = enter_binder(eo->name, Ns::Ord, s);
    return t_exists_ord(n, substitute(eo->body, inner), t->pos);
  }
  if (auto* m = t->as<TMu>()) {
    OrdPtr size = substitute(m->size, s);
    auto [n, inner] = enter_binder(m->name, Ns::Type, s);
    return t_mu(size, n, substitute(m->body, inner), t->pos);
  }
  if (auto* nu = t->as<TNu>()) {
    OrdPtr size = substitute(nu->size, s);
    auto [n, inner] = enter_binder(nu->name, Ns::Type, s);
    return t_nu(size, n, substitute(nu->body, inner), t->pos);
  }
  if (auto* ei = t->as<TEpsIn>()) {
    TermPtr tm = substitute(ei->t, s);
    auto [n, inner] = enter_binder(ei->name, Ns::Type, s);
    return t_eps_in(n, tm, substitute(ei->body, inner), ei->pos);
  }
  if (auto* en = t->as<TEpsNotIn>()) {
    TermPtr tm = substitute(en->t, s);
    auto [n, inner] = enter_binder(en->name, Ns::Type, s);
    return t_eps_notin(n, tm, substitute(en->body, inner), en->pos);
  }
  if (auto* me = t->as<TMeet>())
    return t_meet(substitute(me->body, s), substitute(me->facts, s));
  if (auto* jo = t->as<TJoin>())
    return t_join(substitute(jo->body, s), substitute(jo->facts, s));
  if (auto* so = t->as<TSecondOrder>()) {
    std::vector<OrdPtr> args;
    for (auto& a : so->args) args.push_back(substitute(a, s));
    return t_second(so->id, std::move(args));
  }
  if (auto* d = t->as<TDot>()) return t_dot(substitute(d->h, s), d->name, t->pos);
  return t;  // TUVar
}

TermPtr substitute(const TermPtr& t, const Subst& s) {
  if (s.empty()) return t;
  if (auto* v = t->as<MVar>()) {
    auto it = s.terms.find(v->name);
    return it == s.terms.end() ? t : it->second;
  }
  if (auto* l = t->as<MLam>()) {
    std::optional<TypePtr> dom;
    if (l->dom) dom = substitute(*l->dom, s);
    auto [n, inner] = enter_binder(l->name, Ns::Term, s);
    return m_lam(n, substitute(l->body, inner), t->pos, dom);
  }
  if (auto* a = t->as<MApp>())
    return m_app(substitute(a->fn, s), substitute(a->arg, s), t->pos);
  if (auto* r = t->as<MRecord>()) {
    std::vector<std::pair<std::string, TermPtr>> fs;
    for (auto& [lbl, ft] : r->fields) fs.emplace_back(lbl, substitute(ft, s));
    return m_record(std::move(fs), t->pos);
  }
  if (auto* p = t->as<MProj>())
    return m_proj(substitute(p->t, s), p->label, t->pos);
  if (auto* c = t->as<MCtor>())
    return m_ctor(c->name, substitute(c->payload, s), t->pos);
  if (auto* cs = t->as<MCase>()) {
    std::vector<MBranch> bs;
    for (auto& br : cs->branches) {
      auto [n, inner] = enter_binder(br.var, Ns::Term, s);
      bs.push_back(MBranch{br.ctor, n, substitute(br.body, inner)});
    }
    return m_case(substitute(cs->scrut, s), std::move(bs), t->pos);
  }
  if (auto* f = t->as<MFix>()) {
    auto [n, inner] = enter_binder(f->name, Ns::Term, s);
    return m_fix(n, substitute(f->body, inner), t->pos);
  }
  if (auto* an = t->as<MAnnot>())
    return m_annot(substitute(an->t, s), substitute(an->ty, s), t->pos);
  if (auto* oa = t->as<MOrdAbs>()) {
    auto [n, inner] = enter_binder(oa->name, Ns::Ord, s);
    return m_ord_abs(n, substitute(oa->body, inner), t->pos);
  }
  if (auto* e = t->as<MEps>()) {
    TypePtr in_ty = substitute(e->in_ty, s);
    TypePtr notin_ty = substitute(e->notin_ty, s);
    auto [n, inner] = enter_binder(e->name, Ns::Term, s);
    return m_eps(n, in_ty, substitute(e->body, inner), notin_ty, t->pos);
  }
  if (t->as<MDef>()) return t;
  if (auto* ls = t->as<MLetSuchThat>()) {
    // Resolving the sugar: once the named variable is replaced by a term
    // with a known type, the bound type name denotes that type.
    auto it = s.terms.find(ls->var);
    TypePtr named;
    if (it != s.terms.end()) {
      if (auto* e = it->second->as<MEps>()) named = e->in_ty;
      else if (auto* d = it->second->as<MDef>()) named = d->ty;
      else if (auto* an = it->second->as<MAnnot>()) named = an->ty;
    }
    auto [n, inner] = enter_binder(ls->tyname, Ns::Type, s);
    TermPtr body = substitute(ls->body, inner);
    if (named) {
      Subst fix;
      fix.types[n] = named;
      return substitute(body, fix);
    }
    return m_let_such_that(n, ls->var, body, t->pos);
  }
  return t;
}

TermPtr substitute(const TermPtr& t, const std::string& x, const TermPtr& u) {
  Subst s;
  s.terms[x] = u;
  return substitute(t, s);
}
TypePtr subst_type_var(const TypePtr& t, const std::string& x, const TypePtr& u) {
  Subst s;
  s.types[x] = u;
  return substitute(t, s);
}
TypePtr subst_ord_var(const TypePtr& t, const std::string& a, const OrdPtr& o) {
  Subst s;
  s.ords[a] = o;
  return substitute(t, s);
}

// ---------------------------------------------------------------------------
// Alpha-equivalence.
// ---------------------------------------------------------------------------

namespace {

// Correspondences for bound names, innermost last.
struct AlphaEnv {
  std::vector<std::pair<std::string, std::string>> terms, types, ords;

  static bool lookup(const std::vector<std::pair<std::string, std::string>>& v,
                     const std::string& a, const std::string& b) {
    for (auto it = v.rbegin(); it != v.rend(); ++it) {
      if (it->first == a || it->second == b)
        return it->first == a && it->second == b;
    }
    return a == b;  // both free
  }
};

bool aeq(const OrdPtr& a, const OrdPtr& b, AlphaEnv& env);
bool aeq(const TypePtr& a, const TypePtr& b, AlphaEnv& env);
bool aeq(const TermPtr& a, const TermPtr& b, AlphaEnv& env);

bool aeq(const OrdPtr& a, const OrdPtr& b, AlphaEnv& env) {
  if (a.get() == b.get()) return true;
  if (a->v.index() != b->v.index()) return false;
  if (a->as<OInf>()) return true;
  if (auto* s = a->as<OSucc>()) return aeq(s->arg, b->as<OSucc>()->arg, env);
  if (auto* v = a->as<OVar>())
    return AlphaEnv::lookup(env.ords, v->name, b->as<OVar>()->name);
  if (auto* w = a->as<OWitness>()) return w->id == b->as<OWitness>()->id;
  if (auto* u = a->as<OUVar>()) return u->id == b->as<OUVar>()->id;
  auto* sa = a->as<OSecondOrder>();
  auto* sb = b->as<OSecondOrder>();
  if (sa->id != sb->id || sa->args.size() != sb->args.size()) return false;
  for (size_t i = 0; i < sa->args.size(); ++i)
    if (!aeq(sa->args[i], sb->args[i], env)) return false;
  return true;
}

bool aeq_fields(const std::vector<std::pair<std::string, TypePtr>>& a,
                const std::vector<std::pair<std::string, TypePtr>>& b,
                AlphaEnv& env) {
  if (a.size() != b.size()) return false;
  for (auto& [l, ta] : a) {
    auto it = std::find_if(b.begin(), b.end(),
                           [&](auto& p) { return p.first == l; });
    if (it == b.end() || !aeq(ta, it->second, env)) return false;
  }
  return true;
}

bool aeq_facts(const OrdFacts& a, const OrdFacts& b, AlphaEnv& env) {
  if (a.nonzero.size() != b.nonzero.size() || a.strict.size() != b.strict.size())
    return false;
  for (size_t i = 0; i < a.nonzero.size(); ++i)
    if (!aeq(a.nonzero[i], b.nonzero[i], env)) return false;
  for (size_t i = 0; i < a.strict.size(); ++i)
    if (!aeq(a.strict[i].first, b.strict[i].first, env) ||
        !aeq(a.strict[i].second, b.strict[i].second, env))
      return false;
  return true;
}

template <class Vec>
struct ScopedPush {
  Vec& v;
  ScopedPush(Vec& v_, const std::string& a, const std::string& b) : v(v_) {
    v.emplace_back(a, b);
  }
  ~ScopedPush() { v.pop_back(); }
};

bool aeq(const TypePtr& a, const TypePtr& b, AlphaEnv& env) {
  if (a.get() == b.get()) return true;
  if (a->v.index() != b->v.index()) return false;
  if (auto* v = a->as<TVar>())
    return AlphaEnv::lookup(env.types, v->name, b->as<TVar>()->name);
  if (auto* ar = a->as<TArrow>()) {
    auto* br = b->as<TArrow>();
    return aeq(ar->dom, br->dom, env) && aeq(ar->cod, br->cod, env);
  }
  if (auto* r = a->as<TRecord>())
    return aeq_fields(r->fields, b->as<TRecord>()->fields, env);
  if (auto* s = a->as<TSum>())
    return aeq_fields(s->ctors, b->as<TSum>()->ctors, env);
  if (auto* f = a->as<TForall>()) {
    auto* g = b->as<TForall>();
    ScopedPush push(env.types, f->name, g->name);
    return aeq(f->body, g->body, env);
  }
  if (auto* f = a->as<TExists>()) {
    auto* g = b->as<TExists>();
    ScopedPush push(env.types, f->name, g->name);
    return aeq(f->body, g->body, env);
  }
  if (auto* f = a->as<TForallOrd>()) {
    auto* g = b->as<TForallOrd>();
    ScopedPush push(env.ords, f->name, g->name);
    return aeq(f->body, g->body, env);
  }
  if (auto* f = a->as<TExistsOrd>()) {
    auto* g = b->as<TExistsOrd>();
    ScopedPush push(env.ords, f->name, g->name);
    return aeq(f->body, g->body, env);
  }
  if (auto* m = a->as<TMu>()) {
    auto* n = b->as<TMu>();
    if (!aeq(m->size, n->size, env)) return false;
    ScopedPush push(env.types, m->name, n->name);
    return aeq(m->body, n->body, env);
  }
  if (auto* m = a->as<TNu>()) {
    auto* n = b->as<TNu>();
    if (!aeq(m->size, n->size, env)) return false;
    ScopedPush push(env.types, m->name, n->name);
    return aeq(m->body, n->body, env);
  }
  if (auto* e = a->as<TEpsIn>()) {
    auto* f = b->as<TEpsIn>();
    if (!aeq(e->t, f->t, env)) return false;
    ScopedPush push(env.types, e->name, f->name);
    return aeq(e->body, f->body, env);
  }
  if (auto* e = a->as<TEpsNotIn>()) {
    auto* f = b->as<TEpsNotIn>();
    if (!aeq(e->t, f->t, env)) return false;
    ScopedPush push(env.types, e->name, f->name);
    return aeq(e->body, f->body, env);
  }
  if (auto* m = a->as<TMeet>()) {
    auto* n = b->as<TMeet>();
    return aeq(m->body, n->body, env) && aeq_facts(m->facts, n->facts, env);
  }
  if (auto* m = a->as<TJoin>()) {
    auto* n = b->as<TJoin>();
    return aeq(m->body, n->body, env) && aeq_facts(m->facts, n->facts, env);
  }
  if (auto* u = a->as<TUVar>()) return u->id == b->as<TUVar>()->id;
  if (auto* so = a->as<TSecondOrder>()) {
    auto* sb = b->as<TSecondOrder>();
    if (so->id != sb->id || so->args.size() != sb->args.size()) return false;
    for (size_t i = 0; i < so->args.size(); ++i)
      if (!aeq(so->args[i], sb->args[i], env)) return false;
    return true;
  }
  auto* d = a->as<TDot>();
  auto* e = b->as<TDot>();
  return d->name == e->name && aeq(d->h, e->h, env);
}

bool aeq(const TermPtr& a, const TermPtr& b, AlphaEnv& env) {
  if (a.get() == b.get()) return true;
  if (a->v.index() != b->v.index()) return false;
  if (auto* v = a->as<MVar>())
    return AlphaEnv::lookup(env.terms, v->name, b->as<MVar>()->name);
  if (auto* l = a->as<MLam>()) {
    auto* m = b->as<MLam>();
    if (l->dom.has_value() != m->dom.has_value()) return false;
    if (l->dom && !aeq(*l->dom, *m->dom, env)) return false;
    ScopedPush push(env.terms, l->name, m->name);
    return aeq(l->body, m->body, env);
  }
  if (auto* ap = a->as<MApp>()) {
    auto* bp = b->as<MApp>();
    return aeq(ap->fn, bp->fn, env) && aeq(ap->arg, bp->arg, env);
  }
  if (auto* r = a->as<MRecord>()) {
    auto* s = b->as<MRecord>();
    if (r->fields.size() != s->fields.size()) return false;
    for (auto& [l, ta] : r->fields) {
      auto it = std::find_if(s->fields.begin(), s->fields.end(),
                             [&](auto& p) { return p.first == l; });
      if (it == s->fields.end() || !aeq(ta, it->second, env)) return false;
    }
    return true;
  }
  if (auto* p = a->as<MProj>()) {
    auto* q = b->as<MProj>();
    return p->label == q->label && aeq(p->t, q->t, env);
  }
  if (auto* c = a->as<MCtor>()) {
    auto* d = b->as<MCtor>();
    return c->name == d->name && aeq(c->payload, d->payload, env);
  }
  if (auto* cs = a->as<MCase>()) {
    auto* ds = b->as<MCase>();
    if (!aeq(cs->scrut, ds->scrut, env)) return false;
    if (cs->branches.size() != ds->branches.size()) return false;
    for (auto& br : cs->branches) {
      auto it = std::find_if(ds->branches.begin(), ds->branches.end(),
                             [&](auto& x) { return x.ctor == br.ctor; });
      if (it == ds->branches.end()) return false;
      ScopedPush push(env.terms, br.var, it->var);
      if (!aeq(br.body, it->body, env)) return false;
    }
    return true;
  }
  if (auto* f = a->as<MFix>()) {
    auto* g = b->as<MFix>();
    ScopedPush push(env.terms, f->name, g->name);
    return aeq(f->body, g->body, env);
  }
  if (auto* an = a->as<MAnnot>()) {
    auto* bn = b->as<MAnnot>();
    return aeq(an->t, bn->t, env) && aeq(an->ty, bn->ty, env);
  }
  if (auto* oa = a->as<MOrdAbs>()) {
    auto* ob = b->as<MOrdAbs>();
    ScopedPush push(env.ords, oa->name, ob->name);
    return aeq(oa->body, ob->body, env);
  }
  if (auto* e = a->as<MEps>()) {
    auto* f = b->as<MEps>();
    if (!aeq(e->in_ty, f->in_ty, env) || !aeq(e->notin_ty, f->notin_ty, env))
      return false;
    ScopedPush push(env.terms, e->name, f->name);
    return aeq(e->body, f->body, env);
  }
  if (auto* d = a->as<MDef>()) return d->name == b->as<MDef>()->name;
  auto* ls = a->as<MLetSuchThat>();
  auto* ms = b->as<MLetSuchThat>();
  if (!AlphaEnv::lookup(env.terms, ls->var, ms->var)) return false;
  ScopedPush push(env.types, ls->tyname, ms->tyname);
  return aeq(ls->body, ms->body, env);
}

}  // namespace

bool alpha_equal(const TermPtr& a, const TermPtr& b) {
  AlphaEnv env;
  return aeq(a, b, env);
}
bool alpha_equal(const TypePtr& a, const TypePtr& b) {
  AlphaEnv env;
  return aeq(a, b, env);
}
bool ord_equal(const OrdPtr& a, const OrdPtr& b) {
  AlphaEnv env;
  return aeq(a, b, env);
}

bool type_var_free_in(const std::string& x, const TypePtr& t) {
  FreeVars fv;
  free_vars(t, fv);
  return fv.types.count(x) > 0;
}

// ---------------------------------------------------------------------------
// Ordinal collection for generalisation.
// ---------------------------------------------------------------------------

namespace {

struct OrdCollector {
  std::vector<OrdPtr>& out;
  std::set<std::string> bound_ords;

  bool is_closed(const OrdPtr& o) {
    FreeVars fv;
    free_vars(o, fv);
    for (auto& n : fv.ords)
      if (bound_ords.count(n)) return false;
    return true;
  }

  void add(const OrdPtr& o) {
    if (o->as<OInf>()) return;
    if (!is_closed(o)) return;
    for (auto& seen : out)
      if (ord_equal(seen, o)) return;
    out.push_back(o);
  }

  void walk(const OrdPtr& o) { add(o); }
  void walk(const TypePtr& t);
  void walk(const TermPtr& t);
};

void OrdCollector::walk(const TypePtr& t) {
  if (auto* a = t->as<TArrow>()) {
    walk(a->dom);
    walk(a->cod);
  } else if (auto* r = t->as<TRecord>()) {
    for (auto& [_, f] : r->fields) walk(f);
  } else if (auto* s = t->as<TSum>()) {
    for (auto& [_, c] : s->ctors) walk(c);
  } else if (auto* f = t->as<TForall>()) {
    walk(f->body);
  } else if (auto* e = t->as<TExists>()) {
    walk(e->body);
  } else if (auto* fo = t->as<TForallOrd>()) {
    bool had = bound_ords.count(fo->name) > 0;
    bound_ords.insert(fo->name);
    walk(fo->body);
    if (!had) bound_ords.erase(fo->name);
  } else if (auto* eo = t->as<TExistsOrd>()) {
    bool had = bound_ords.count(eo->name) > 0;
    bound_ords.insert(eo->name);
    walk(eo->body);
    if (!had) bound_ords.erase(eo->name);
  } else if (auto* m = t->as<TMu>()) {
    walk(m->size);
    walk(m->body);
  } else if (auto* n = t->as<TNu>()) {
    walk(n->size);
    walk(n->body);
  } else if (auto* ei = t->as<TEpsIn>()) {
    walk(ei->t);
    walk(ei->body);
  } else if (auto* en = t->as<TEpsNotIn>()) {
    walk(en->t);
    walk(en->body);
  } else if (auto* me = t->as<TMeet>()) {
    walk(me->body);
  } else if (auto* jo = t->as<TJoin>()) {
    walk(jo->body);
  } else if (auto* so = t->as<TSecondOrder>()) {
    for (auto& a : so->args) walk(a);
  } else if (auto* d = t->as<TDot>()) {
    walk(d->h);
  }
}

void OrdCollector::walk(const TermPtr& t) {
  if (auto* l = t->as<MLam>()) {
    if (l->dom) walk(*l->dom);
    walk(l->body);
  } else if (auto* a = t->as<MApp>()) {
    walk(a->fn);
    walk(a->arg);
  } else if (auto* r = t->as<MRecord>()) {
    for (auto& [_, f] : r->fields) walk(f);
  } else if (auto* p = t->as<MProj>()) {
    walk(p->t);
  } else if (auto* c = t->as<MCtor>()) {
    walk(c->payload);
  } else if (auto* cs = t->as<MCase>()) {
    walk(cs->scrut);
    for (auto& br : cs->branches) walk(br.body);
  } else if (auto* f = t->as<MFix>()) {
    walk(f->body);
  } else if (auto* an = t->as<MAnnot>()) {
    walk(an->t);
    walk(an->ty);
  } else if (auto* oa = t->as<MOrdAbs>()) {
    bool had = bound_ords.count(oa->name) > 0;
    bound_ords.insert(oa->name);
    walk(oa->body);
    if (!had) bound_ords.erase(oa->name);
  } else if (auto* e = t->as<MEps>()) {
    walk(e->in_ty);
    walk(e->body);
    walk(e->notin_ty);
  } else if (auto* ls = t->as<MLetSuchThat>()) {
    walk(ls->body);
  }
}

}  // namespace

void collect_ordinals(const TypePtr& t, std::vector<OrdPtr>& out) {
  OrdCollector c{out, {}};
  c.walk(t);
}

// ---------------------------------------------------------------------------
// Printing.
// ---------------------------------------------------------------------------

std::string show(const OrdPtr& o) {
  if (o->as<OInf>()) return "inf";
  if (auto* s = o->as<OSucc>()) return "S(" + show(s->arg) + ")";
  if (auto* v = o->as<OVar>()) return v->name;
  if (auto* w = o->as<OWitness>()) return "κ_" + std::to_string(w->id);
  if (auto* u = o->as<OUVar>()) return "?o" + std::to_string(u->id);
  auto* so = o->as<OSecondOrder>();
  std::string s = "?V" + std::to_string(so->id) + "(";
  for (size_t i = 0; i < so->args.size(); ++i) {
    if (i) s += ",";
    s += show(so->args[i]);
  }
  return s + ")";
}

namespace {

std::string show_facts(const OrdFacts& f) {
  std::string s;
  bool first = true;
  for (auto& o : f.nonzero) {
    if (!first) s += ", ";
    s += show(o);
    first = false;
  }
  for (auto& [a, b] : f.strict) {
    if (!first) s += ", ";
    s += show(a) + "<" + show(b);
    first = false;
  }
  return s;
}

// Precedence: 0 = quantifier/binder body; 1 = arrow; 2 = atom.
std::string show_type(const TypePtr& t, int prec);
std::string show_term(const TermPtr& t, int prec);

std::string paren(bool need, const std::string& s) {
  return need ? "(" + s + ")" : s;
}

std::string show_type(const TypePtr& t, int prec) {
  if (auto* v = t->as<TVar>()) return v->name;
  if (auto* a = t->as<TArrow>())
    return paren(prec > 1, show_type(a->dom, 2) + " → " + show_type(a->cod, 1));
  if (auto* r = t->as<TRecord>()) {
    std::string s = "{";
    for (size_t i = 0; i < r->fields.size(); ++i) {
      if (i) s += "; ";
      s += r->fields[i].first + " : " + show_type(r->fields[i].second, 0);
    }
    return s + "}";
  }
  if (auto* su = t->as<TSum>()) {
    std::string s = "[";
    for (size_t i = 0; i < su->ctors.size(); ++i) {
      if (i) s += " | ";
      s += su->ctors[i].first;
      auto* rec = su->ctors[i].second->as<TRecord>();
      if (!(rec && rec->fields.empty()))
        s += " of " + show_type(su->ctors[i].second, 0);
    }
    return s + "]";
  }
  if (auto* f = t->as<TForall>())
    return paren(prec > 0, "∀" + f->name + "." + show_type(f->body, 0));
  if (auto* e = t->as<TExists>())
    return paren(prec > 0, "∃" + e->name + "." + show_type(e->body, 0));
  if (auto* fo = t->as<TForallOrd>())
    return paren(prec > 0, "∀o " + fo->name + "." + show_type(fo->body, 0));
  if (auto* eo = t->as<TExistsOrd>())
    return paren(prec > 0, "∃o " + eo->name + "." + show_type(eo->body, 0));
  if (auto* m = t->as<TMu>()) {
    std::string sz = m->size->as<OInf>() ? "" : "_" + show(m->size);
    return paren(prec > 0, "μ" + sz + " " + m->name + "." + show_type(m->body, 0));
  }
  if (auto* n = t->as<TNu>()) {
    std::string sz = n->size->as<OInf>() ? "" : "_" + show(n->size);
    return paren(prec > 0, "ν" + sz + " " + n->name + "." + show_type(n->body, 0));
  }
  if (t->as<TEpsIn>() || t->as<TEpsNotIn>()) return display_epsilon(t);
  if (auto* me = t->as<TMeet>())
    return paren(prec > 0,
                 show_type(me->body, 2) + " ∧ (" + show_facts(me->facts) + ")");
  if (auto* jo = t->as<TJoin>())
    return paren(prec > 0,
                 show_type(jo->body, 2) + " ∨ (" + show_facts(jo->facts) + ")");
  if (auto* u = t->as<TUVar>()) return "?" + std::to_string(u->id);
  if (auto* so = t->as<TSecondOrder>()) {
    std::string s = "?T" + std::to_string(so->id) + "(";
    for (size_t i = 0; i < so->args.size(); ++i) {
      if (i) s += ",";
      s += show(so->args[i]);
    }
    return s + ")";
  }
  auto* d = t->as<TDot>();
  return show_term(d->h, 2) + "." + d->name;
}

std::string show_term(const TermPtr& t, int prec) {
  if (auto* v = t->as<MVar>()) return v->name;
  if (auto* l = t->as<MLam>()) {
    std::string b = l->name;
    if (l->dom) b = "(" + l->name + " : " + show_type(*l->dom, 0) + ")";
    return paren(prec > 0, "λ" + b + ". " + show_term(l->body, 0));
  }
  if (auto* a = t->as<MApp>())
    return paren(prec > 1, show_term(a->fn, 1) + " " + show_term(a->arg, 2));
  if (auto* r = t->as<MRecord>()) {
    if (r->fields.empty()) return "{}";
    std::string s = "{";
    for (size_t i = 0; i < r->fields.size(); ++i) {
      if (i) s += "; ";
      s += r->fields[i].first + " = " + show_term(r->fields[i].second, 0);
    }
    return s + "}";
  }
  if (auto* p = t->as<MProj>()) return show_term(p->t, 2) + "." + p->label;
  if (auto* c = t->as<MCtor>()) {
    auto* rec = c->payload->as<MRecord>();
    if (rec && rec->fields.empty()) return c->name;
    return paren(prec > 1, c->name + " " + show_term(c->payload, 2));
  }
  if (auto* cs = t->as<MCase>()) {
    std::string s = "case " + show_term(cs->scrut, 1) + " of ";
    for (size_t i = 0; i < cs->branches.size(); ++i) {
      if (i) s += " | ";
      s += cs->branches[i].ctor;
      if (!cs->branches[i].var.empty()) s += " " + cs->branches[i].var;
      s += " → " + show_term(cs->branches[i].body, 0);
    }
    return paren(prec > 0, s);
  }
  if (auto* f = t->as<MFix>())
    return paren(prec > 0, "fix " + f->name + ". " + show_term(f->body, 0));
  if (auto* an = t->as<MAnnot>())
    return "(" + show_term(an->t, 0) + " : " + show_type(an->ty, 0) + ")";
  if (auto* oa = t->as<MOrdAbs>())
    return paren(prec > 0, "Λ" + oa->name + ". " + show_term(oa->body, 0));
  if (t->as<MEps>()) return display_epsilon(t);
  if (auto* d = t->as<MDef>()) return d->name;
  auto* ls = t->as<MLetSuchThat>();
  return paren(prec > 0, "let " + ls->tyname + " such that " + ls->var + " : " +
                             ls->tyname + " in " + show_term(ls->body, 0));
}

}  // namespace

std::string show(const TypePtr& t) { return show_type(t, 0); }
std::string show(const TermPtr& t) { return show_term(t, 0); }

SourcePos position_of(const TermPtr& t) { return t->pos; }
SourcePos position_of(const TypePtr& t) { return t->pos; }

std::string display_epsilon(const TermPtr& t) {
  if (auto* e = t->as<MEps>()) {
    if (!t->pos.known()) return "<internal>";
    return e->name + "@" + t->pos.str();
  }
  return show(t);
}

std::string display_epsilon(const TypePtr& t) {
  const std::string* name = nullptr;
  SourcePos pos;
  if (auto* e = t->as<TEpsIn>()) {
    name = &e->name;
    pos = e->pos;
  } else if (auto* e2 = t->as<TEpsNotIn>()) {
    name = &e2->name;
    pos = e2->pos;
  }
  if (!name) return show(t);
  if (!pos.known()) return "<internal>";
  return *name + "@" + pos.str();
}

}  // namespace szm
