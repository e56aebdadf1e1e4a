#ifndef SZM_AST_HPP
#define SZM_AST_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "szm/pos.hpp"

namespace szm {

struct Ordinal;
struct Type;
struct Term;
using OrdPtr = std::shared_ptr<const Ordinal>;
using TypePtr = std::shared_ptr<const Type>;
using TermPtr = std::shared_ptr<const Term>;

// ---------------------------------------------------------------------------
// Syntactic ordinals: inf, successor, variables, witnesses, unification
// variables and second-order applications.
// ---------------------------------------------------------------------------

struct OInf {};
struct OSucc {
  OrdPtr arg;
};
struct OVar {
  std::string name;  // bound by forall/exists on ordinals or by generalisation
};
struct OWitness {
  int id = 0;      // unique per session
  OrdPtr bound;    // semantically: this < bound
};
struct OUVar {
  int id = 0;
};
struct OSecondOrder {
  int id = 0;
  std::vector<OrdPtr> args;
};

struct Ordinal {
  std::variant<OInf, OSucc, OVar, OWitness, OUVar, OSecondOrder> v;
  template <class T>
  const T* as() const {
    return std::get_if<T>(&v);
  }
};

OrdPtr o_inf();
OrdPtr o_succ(OrdPtr o);  // normalizes S(inf) to inf
OrdPtr o_var(std::string name);
OrdPtr o_witness(int id, OrdPtr bound);
OrdPtr o_uvar(int id);
OrdPtr o_second(int id, std::vector<OrdPtr> args);

// ---------------------------------------------------------------------------
// Types.
// ---------------------------------------------------------------------------

// Ordinal facts carried by the meet/join connectives that mu_l / nu_r insert
// while unfolding; the dedicated elimination steps move them into the
// positivity context.
struct OrdFacts {
  std::vector<OrdPtr> nonzero;
  std::vector<std::pair<OrdPtr, OrdPtr>> strict;  // (w, bound) meaning w < bound
};

struct TVar {
  std::string name;
};
struct TArrow {
  TypePtr dom, cod;
};
struct TRecord {
  std::vector<std::pair<std::string, TypePtr>> fields;  // order preserved
};
struct TSum {
  std::vector<std::pair<std::string, TypePtr>> ctors;
};
struct TForall {
  std::string name;
  TypePtr body;
};
struct TExists {
  std::string name;
  TypePtr body;
};
struct TForallOrd {
  std::string name;
  TypePtr body;
};
struct TExistsOrd {
  std::string name;
  TypePtr body;
};
struct TMu {
  OrdPtr size;
  std::string name;
  TypePtr body;
};
struct TNu {
  OrdPtr size;
  std::string name;
  TypePtr body;
};
struct TEpsIn {  // eps_X(t in body): a type X such that t : body
  std::string name;
  TermPtr t;
  TypePtr body;
  SourcePos pos;
};
struct TEpsNotIn {  // eps_X(t notin body): a type X such that t fails body
  std::string name;
  TermPtr t;
  TypePtr body;
  SourcePos pos;
};
struct TMeet {  // body /\ facts
  TypePtr body;
  OrdFacts facts;
};
struct TJoin {  // body \/ facts
  TypePtr body;
  OrdFacts facts;
};
struct TUVar {
  int id = 0;
};
struct TSecondOrder {
  int id = 0;
  std::vector<OrdPtr> args;
};
// h.T where h is a term; resolved during substitution / normalization once
// h's type is known.
struct TDot {
  TermPtr h;
  std::string name;
};

struct Type {
  std::variant<TVar, TArrow, TRecord, TSum, TForall, TExists, TForallOrd,
               TExistsOrd, TMu, TNu, TEpsIn, TEpsNotIn, TMeet, TJoin, TUVar,
               TSecondOrder, TDot>
      v;
  SourcePos pos;
  template <class T>
  const T* as() const {
    return std::get_if<T>(&v);
  }
};

TypePtr t_var(std::string n, SourcePos p = {});
TypePtr t_arrow(TypePtr a, TypePtr b, SourcePos p = {});
TypePtr t_record(std::vector<std::pair<std::string, TypePtr>> fs,
                 SourcePos p = {});
TypePtr t_sum(std::vector<std::pair<std::string, TypePtr>> cs,
              SourcePos p = {});
TypePtr t_forall(std::string n, TypePtr b, SourcePos p = {});
TypePtr t_exists(std::string n, TypePtr b, SourcePos p = {});
TypePtr t_forall_ord(std::string n, TypePtr b, SourcePos p = {});
TypePtr t_exists_ord(std::string n, TypePtr b, SourcePos p = {});
TypePtr t_mu(OrdPtr size, std::string n, TypePtr b, SourcePos p = {});
TypePtr t_nu(OrdPtr size, std::string n, TypePtr b, SourcePos p = {});
TypePtr t_eps_in(std::string n, TermPtr t, TypePtr b, SourcePos p = {});
TypePtr t_eps_notin(std::string n, TermPtr t, TypePtr b, SourcePos p = {});
TypePtr t_meet(TypePtr b, OrdFacts f);
TypePtr t_join(TypePtr b, OrdFacts f);
TypePtr t_uvar(int id);
TypePtr t_second(int id, std::vector<OrdPtr> args);
TypePtr t_dot(TermPtr h, std::string name, SourcePos p = {});

// ---------------------------------------------------------------------------
// Terms.
// ---------------------------------------------------------------------------

struct MVar {
  std::string name;  // parse-time only; elaborated away before checking
};
struct MLam {
  std::string name;
  std::optional<TypePtr> dom;
  TermPtr body;
};
struct MApp {
  TermPtr fn, arg;
};
struct MRecord {
  std::vector<std::pair<std::string, TermPtr>> fields;
};
struct MProj {
  TermPtr t;
  std::string label;
};
struct MCtor {
  std::string name;
  TermPtr payload;
};
struct MBranch {
  std::string ctor;
  std::string var;
  TermPtr body;
};
struct MCase {
  TermPtr scrut;
  std::vector<MBranch> branches;
};
struct MFix {  // Y x.t
  std::string name;
  TermPtr body;
};
struct MAnnot {
  TermPtr t;
  TypePtr ty;
};
struct MOrdAbs {  // ordinal abstraction, surface annotation form
  std::string name;
  TermPtr body;
};
struct MEps {  // eps_{x in in_ty}(body notin notin_ty)
  std::string name;
  TypePtr in_ty;
  TermPtr body;
  TypePtr notin_ty;
};
// A reference to a previously checked global definition: closed, with a
// known type (choice-operator discipline for top-level names).
struct MDef {
  std::string name;
  TypePtr ty;
  TermPtr value;
};
struct MLetSuchThat {  // let X such that x : X in body
  std::string tyname;
  std::string var;
  TermPtr body;
};

struct Term {
  std::variant<MVar, MLam, MApp, MRecord, MProj, MCtor, MCase, MFix, MAnnot,
               MOrdAbs, MEps, MDef, MLetSuchThat>
      v;
  SourcePos pos;
  template <class T>
  const T* as() const {
    return std::get_if<T>(&v);
  }
};

TermPtr m_var(std::string n, SourcePos p = {});
TermPtr m_lam(std::string n, TermPtr body, SourcePos p = {},
              std::optional<TypePtr> dom = std::nullopt);
TermPtr m_app(TermPtr f, TermPtr a, SourcePos p = {});
TermPtr m_record(std::vector<std::pair<std::string, TermPtr>> fs,
                 SourcePos p = {});
TermPtr m_proj(TermPtr t, std::string l, SourcePos p = {});
TermPtr m_ctor(std::string c, TermPtr payload, SourcePos p = {});
TermPtr m_case(TermPtr s, std::vector<MBranch> bs, SourcePos p = {});
TermPtr m_fix(std::string n, TermPtr b, SourcePos p = {});
TermPtr m_annot(TermPtr t, TypePtr ty, SourcePos p = {});
TermPtr m_ord_abs(std::string n, TermPtr b, SourcePos p = {});
TermPtr m_eps(std::string n, TypePtr in_ty, TermPtr body, TypePtr notin_ty,
              SourcePos p = {});
TermPtr m_def(std::string n, TypePtr ty, TermPtr value, SourcePos p = {});
TermPtr m_let_such_that(std::string tyname, std::string var, TermPtr body,
                        SourcePos p = {});

// ---------------------------------------------------------------------------
// Substitution and alpha-equivalence.
// ---------------------------------------------------------------------------

// Simultaneous capture-avoiding substitution over terms, types and ordinals.
struct Subst {
  std::map<std::string, TermPtr> terms;
  std::map<std::string, TypePtr> types;
  std::map<std::string, OrdPtr> ords;

  bool empty() const { return terms.empty() && types.empty() && ords.empty(); }
};

TermPtr substitute(const TermPtr& t, const Subst& s);
TypePtr substitute(const TypePtr& t, const Subst& s);
OrdPtr substitute(const OrdPtr& o, const Subst& s);

TermPtr substitute(const TermPtr& t, const std::string& x, const TermPtr& u);
TypePtr subst_type_var(const TypePtr& t, const std::string& x,
                       const TypePtr& u);
TypePtr subst_ord_var(const TypePtr& t, const std::string& a, const OrdPtr& o);

bool alpha_equal(const TermPtr& a, const TermPtr& b);
bool alpha_equal(const TypePtr& a, const TypePtr& b);
bool ord_equal(const OrdPtr& a, const OrdPtr& b);

// Free variable queries used by the engines.
bool type_var_free_in(const std::string& x, const TypePtr& t);
// Collects the distinct ordinals annotating mu/nu (and quantifier
// instantiations) in order of first occurrence; `inf` is never collected.
void collect_ordinals(const TypePtr& t, std::vector<OrdPtr>& out);

// Display helpers.
std::string show(const OrdPtr& o);
std::string show(const TypePtr& t);
std::string show(const TermPtr& t);
SourcePos position_of(const TermPtr& t);
SourcePos position_of(const TypePtr& t);
// Choice operators display as "name@file:line:col" only.
std::string display_epsilon(const TermPtr& t);
std::string display_epsilon(const TypePtr& t);

// Fresh-name supply for binder renaming and witness ids.
struct IdSource {
  int next_name = 0;
  int next_witness = 0;
  std::string fresh_name(const std::string& base);
};

}  // namespace szm

#endif
