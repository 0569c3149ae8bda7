#pragma once

#include <string>
#include <string_view>

#include "csid/ldag.hpp"

namespace csid {

// A conditional distribution P(jg, ja | cg, ca) with general variables (jg,
// cg: statements hold for every value) and assigned variables (ja, ca:
// specific values) on each side. The bitmask representation is the
// canonical form: parts are inherently sorted and hash-stable.
struct Term {
  VarSet jg = 0;  // joint, general
  Context ja;     // joint, assigned
  VarSet cg = 0;  // conditioning, general
  Context ca;     // conditioning, assigned

  VarSet joint_vars() const { return jg | ja.mask; }
  VarSet cond_vars() const { return cg | ca.mask; }
  VarSet all_vars() const { return joint_vars() | cond_vars(); }
  VarSet general_vars() const { return jg | cg; }
  Context assigned() const { return ja.merged(ca); }

  // Parts pairwise disjoint and the joint side nonempty.
  bool valid() const {
    VarSet parts[4] = {jg, ja.mask, cg, ca.mask};
    VarSet seen = 0;
    for (VarSet p : parts) {
      if ((p & seen) != 0) return false;
      seen |= p;
    }
    return joint_vars() != 0;
  }

  friend bool operator==(const Term&, const Term&) = default;

  // "P(Y, A=0 | X, I_X=1)"; members listed in ascending variable id.
  std::string to_string(const Ldag& g, bool spaced = true) const;
};

struct TermHash {
  std::size_t operator()(const Term& t) const {
    std::uint64_t h = 0x452821e638d01377ull;
    h = hash_combine(h, t.jg);
    h = hash_combine(h, t.ja.mask);
    h = hash_combine(h, t.ja.values);
    h = hash_combine(h, t.cg);
    h = hash_combine(h, t.ca.mask);
    h = hash_combine(h, t.ca.values);
    return static_cast<std::size_t>(h);
  }
};

// Inverse of Term::to_string on canonical forms.
Term parse_term(std::string_view text, const Ldag& g);

}  // namespace csid
