#pragma once

#include <optional>
#include <vector>

#include "csid/separation.hpp"
#include "csid/term.hpp"

namespace csid {

enum class Rule { Input, R1ins, R1del, R2, R3, R4, R5, R6, R7, R8 };

const char* rule_name(Rule r);

// Records how a term was identified: which rule fired, from which parent
// terms, and the data needed to rebuild the formula and the trace.
struct Justification {
  Rule rule = Rule::Input;
  std::vector<Term> parents;        // empty for inputs; 1 or 2 otherwise
  std::optional<CsiQuery> csi;      // verified statement for R1
  VarSet moved_general = 0;         // R1/R2/R3 general variables moved
  Context moved_assigned;           // R1/R3 assigned variables moved
  int var = -1;                     // R5-R8 single variable
  int value = -1;                   // R5/R7/R8 value
};

// Shape operations for the rewrite rules. Each returns the candidate term
// when the instantiation is role-consistent and nothing otherwise; CSI side
// conditions (rule 1) are the caller's responsibility.

// Rule 1, both directions: the conditioning side loses/gains (zg, za).
std::optional<Term> r1_delete(const Term& t, VarSet zg, const Context& za);
std::optional<Term> r1_insert(const Term& t, VarSet zg, const Context& za);
// Statement that licenses either direction between `reduced` and the term
// with (zg, za) added to its conditioning side.
CsiQuery r1_condition(const Term& reduced, VarSet zg, const Context& za);

// Rule 2: marginalize a general joint set out of a known term.
std::optional<Term> r2_marginalize(const Term& t, VarSet z_set);

// Rule 3: move zg plus every assigned joint variable to the conditioning
// side; the remaining joint part must stay nonempty and purely general.
std::optional<Term> r3_condition(const Term& t, VarSet zg);

// Rule 4: P(y|z,x) * P(z|x) -> P(y,z|x); the factor shapes must match
// exactly.
std::optional<Term> r4_combine(const Term& t1, const Term& t2);

// Rule 5: from the general term and the case with one extra joint
// assignment, the complementary case. `var` is the extra variable of
// t_case.
std::optional<Term> r5_complement(const Term& t_general, const Term& t_case, int var);
// Rule 5 with empty general part: P(1-z|x) = 1 - P(z|x).
std::optional<Term> r5_self(const Term& t);

// Rule 6: merge the two cases of `var` into a general joint variable.
std::optional<Term> r6_merge(const Term& t0, const Term& t1, int var);

// Rules 7/8: instantiate a general joint/conditioning variable.
std::optional<Term> r7_instantiate(const Term& t, int var, int value);
std::optional<Term> r8_instantiate(const Term& t, int var, int value);

}  // namespace csid
