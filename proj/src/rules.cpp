#include "csid/rules.hpp"

namespace csid {

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::Input: return "input";
    case Rule::R1ins: return "R1";
    case Rule::R1del: return "R1";
    case Rule::R2: return "R2";
    case Rule::R3: return "R3";
    case Rule::R4: return "R4";
    case Rule::R5: return "R5";
    case Rule::R6: return "R6";
    case Rule::R7: return "R7";
    case Rule::R8: return "R8";
  }
  return "?";
}

namespace {

bool context_subset(const Context& small, const Context& big) {
  return (small.mask & ~big.mask) == 0 && ((small.values ^ big.values) & small.mask) == 0;
}

}  // namespace

std::optional<Term> r1_delete(const Term& t, VarSet zg, const Context& za) {
  if ((zg | za.mask) == 0) return std::nullopt;
  if ((zg & ~t.cg) != 0 || !context_subset(za, t.ca)) return std::nullopt;
  Term out = t;
  out.cg &= ~zg;
  out.ca = Context(t.ca.mask & ~za.mask, t.ca.values & ~za.mask);
  return out;
}

std::optional<Term> r1_insert(const Term& t, VarSet zg, const Context& za) {
  VarSet moved = zg | za.mask;
  if (moved == 0 || (zg & za.mask) != 0) return std::nullopt;
  if ((moved & t.all_vars()) != 0) return std::nullopt;
  Term out = t;
  out.cg |= zg;
  out.ca = t.ca.merged(za);
  return out;
}

CsiQuery r1_condition(const Term& reduced, VarSet zg, const Context& za) {
  CsiQuery q;
  q.y = reduced.joint_vars();
  q.z = zg | za.mask;
  q.cond = reduced.cg;
  q.ctx = reduced.ca;
  return q;
}

std::optional<Term> r2_marginalize(const Term& t, VarSet z_set) {
  if ((z_set & ~t.jg) != 0) return std::nullopt;
  if (z_set == 0) return t;  // summing over nothing
  Term out = t;
  out.jg &= ~z_set;
  if (out.joint_vars() == 0) return std::nullopt;
  return out;
}

std::optional<Term> r3_condition(const Term& t, VarSet zg) {
  if ((zg & ~t.jg) != 0) return std::nullopt;
  if ((zg | t.ja.mask) == 0) return t;  // moving nothing
  Term out = t;
  out.jg &= ~zg;
  if (out.jg == 0) return std::nullopt;  // a general joint part must remain
  out.cg |= zg;
  out.ca = t.ca.merged(t.ja);
  out.ja = Context();
  return out;
}

std::optional<Term> r4_combine(const Term& t1, const Term& t2) {
  // t1 = P(y | z, x), t2 = P(z | x): t2's whole footprint must equal t1's
  // conditioning side, with t2's conditioning a sub-side of it.
  if ((t2.cg & ~t1.cg) != 0 || !context_subset(t2.ca, t1.ca)) return std::nullopt;
  if (t2.jg != (t1.cg & ~t2.cg)) return std::nullopt;
  Context extra(t1.ca.mask & ~t2.ca.mask, t1.ca.values & ~t2.ca.mask);
  if (!(t2.ja == extra)) return std::nullopt;
  Term out;
  out.jg = t1.jg | t2.jg;
  out.ja = t1.ja.merged(t2.ja);
  out.cg = t2.cg;
  out.ca = t2.ca;
  return out;
}

std::optional<Term> r5_complement(const Term& t_general, const Term& t_case, int var) {
  if (!t_case.ja.assigns(var) || t_general.all_vars() & var_bit(var)) return std::nullopt;
  Term shrunk = t_case;
  shrunk.ja.erase(var);
  if (!(shrunk == t_general)) return std::nullopt;
  Term out = t_case;
  out.ja.set(var, 1 - t_case.ja.value(var));
  return out;
}

std::optional<Term> r5_self(const Term& t) {
  if (t.jg != 0 || set_size(t.ja.mask) != 1) return std::nullopt;
  Term out = t;
  int v = lowest_var(t.ja.mask);
  out.ja.set(v, 1 - t.ja.value(v));
  return out;
}

std::optional<Term> r6_merge(const Term& t0, const Term& t1, int var) {
  if (!t0.ja.assigns(var) || !t1.ja.assigns(var)) return std::nullopt;
  if (t0.ja.value(var) != 0 || t1.ja.value(var) != 1) return std::nullopt;
  Term u0 = t0, u1 = t1;
  u0.ja.erase(var);
  u1.ja.erase(var);
  if (!(u0 == u1)) return std::nullopt;
  Term out = u0;
  out.jg |= var_bit(var);
  return out;
}

std::optional<Term> r7_instantiate(const Term& t, int var, int value) {
  if (!has_var(t.jg, var)) return std::nullopt;
  Term out = t;
  out.jg &= ~var_bit(var);
  out.ja.set(var, value);
  return out;
}

std::optional<Term> r8_instantiate(const Term& t, int var, int value) {
  if (!has_var(t.cg, var)) return std::nullopt;
  Term out = t;
  out.cg &= ~var_bit(var);
  out.ca.set(var, value);
  return out;
}

}  // namespace csid
