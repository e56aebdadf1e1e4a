#ifndef SZM_TYPECHECK_HPP
#define SZM_TYPECHECK_HPP

#include "szm/subtype.hpp"

namespace szm {

// Derives g |- t : c. Fixpoint obligations are queued for the breadth-first
// pass; their proof nodes are patched in place when discharged.
ProofPtr typecheck(Session& s, const PosCtx& g, const TermPtr& t,
                   const TypePtr& c);

// Drains the pending-fixpoint queue stage by stage: consult the registered
// hypotheses first (past the unrolling gate), otherwise generalise, register
// and unroll once more.
void run_breadth_first(Session& s);

// Forms the general abstract sequent for a fixpoint obligation: with no
// ordinal quantifier in the type, infinite ordinals at negative mu /
// positive nu positions are decorated with fresh variables; otherwise only
// existing ordinal variables are abstracted. Returns the registry id.
int generalise_fix(Session& s, const PendingFixpoint& p, Skeleton* out_skel);

// Runs the size-change well-foundedness verdict on the session call graph,
// throwing TypeError(NotWellFounded) on rejection.
void require_well_founded(Session& s, SourcePos pos);

}  // namespace szm

#endif
