#ifndef SZM_SESSION_HPP
#define SZM_SESSION_HPP

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "szm/ast.hpp"
#include "szm/ordinal.hpp"
#include "szm/scp.hpp"
#include "szm/uvar.hpp"

namespace szm {

// Typing(g, t, A) when rhs is null, LocalSub(g, t, lhs, rhs) otherwise.
struct Judgment {
  PosCtx ctx;
  TermPtr subject;
  TypePtr lhs;
  TypePtr rhs;  // null for typing judgments

  bool is_typing() const { return rhs == nullptr; }
};

std::string show(const Judgment& j);

struct HypLink {
  int gas_id = -1;
  SCMatrix mat;
};

struct ProofNode;
using ProofPtr = std::shared_ptr<ProofNode>;

struct ProofNode {
  std::string rule;
  Judgment concl;
  std::vector<ProofPtr> premises;
  std::optional<HypLink> hyp;
};

ProofPtr proof_leaf(std::string rule, Judgment concl);
ProofPtr proof_node(std::string rule, Judgment concl,
                    std::vector<ProofPtr> premises);

// A canonicalized, ordinal-abstracted judgment used as a circular-proof
// induction hypothesis. Ordinal holes appear as variables named "#k";
// lifted unification variables as type variables named "#Uk".
struct GeneralAbstractSequent {
  int id = -1;
  bool is_typing = false;
  TermPtr skel_term;  // typing: the fixpoint term (canonicalized)
  TypePtr skel_lhs;
  TypePtr skel_rhs;  // subtyping only
  int arity = 0;
  std::vector<OrdPtr> reg_args;  // instantiation args at registration
  int node = -1;                 // call-graph node
};

struct PendingFixpoint {
  TermPtr fix;
  TypePtr expected;
  PosCtx ctx;
  int enclosing_node = 0;
  std::vector<OrdPtr> enclosing_params;
  int generation = 1;
  ProofPtr node;  // patched when the obligation is discharged
  SourcePos pos;
};

struct CheckOptions {
  long step_budget = 100000;
  int unroll_depth = 8;
  // Fixpoint obligations of generation <= hyp_gate always generalise and
  // unroll; induction hypotheses are only consulted past that depth.
  int hyp_gate = 3;
};

// All the state of one checking run: the unification store, the hypothesis
// registry, the size-change call graph and the breadth-first queue. One
// session per definition, confined to a single thread.
struct Session {
  Store store;
  IdSource ids;
  CheckOptions opts;

  std::vector<GeneralAbstractSequent> registry;
  CallGraph graph;
  struct Enclosing {
    int node = 0;
    std::vector<OrdPtr> params;
  };
  std::vector<Enclosing> enclosing_stack;

  std::deque<PendingFixpoint> queue;
  int current_generation = 1;

  long steps_left = 0;
  std::optional<Judgment> last_typing;
  std::optional<Judgment> last_subtyping;
  SourcePos current_pos;

  // Number of registrations made by the innermost top-level subtype call;
  // exposed for the quantifier-free boundedness property.
  int subtype_registrations = 0;
  int subtype_depth = 0;

  Session();
  explicit Session(CheckOptions o);
};

}  // namespace szm

#endif
