#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "csid/formula.hpp"
#include "csid/rules.hpp"
#include "csid/separation.hpp"

namespace csid {

// P(outcome | do(do_set), cond...) with every named variable observed.
struct QuerySpec {
  VarSet outcome = 0;
  VarSet do_set = 0;
  VarSet cond_general = 0;
  Context cond_assigned;

  VarSet all_vars() const {
    return outcome | do_set | cond_general | cond_assigned.mask;
  }
};

// Query syntax: P(Y | do(X), Z, W=1) — outcomes are bare names, the do-set
// sits inside do(...), remaining conditioners are bare or assigned.
QuerySpec parse_query(std::string_view text, const Ldag& g);

enum class SearchStatus {
  Identified,
  NotIdentifiable,  // search space exhausted without reaching the target
  LimitReached,     // timeout or expansion cap; distinct from exhaustion
};

struct SearchLimits {
  double timeout_sec = 1800.0;        // half-hour default
  std::uint64_t max_expansions = 0;   // 0 = unlimited
};

struct SearchOptions {
  SearchLimits limits;
  // Baseline mode: every term is fully assigned (no general-variable roles).
  bool full_context_split = false;
  // Largest general set moved or inserted by one rule application.
  int move_cap = 2;
  SeparationOptions separation;
};

struct SearchStats {
  std::uint64_t expansions = 0;
  std::uint64_t identified = 0;
  std::uint64_t rule_firings = 0;
  std::uint64_t csi_checks = 0;
  double wall_ms = 0.0;
};

struct DerivationStep {
  Term term;
  Justification just;
};

// The sub-DAG of identified terms that the target actually needed, in
// identification order (parents always precede dependents).
struct Derivation {
  std::vector<DerivationStep> steps;
  std::string to_dot(const Ldag& g) const;
  std::string to_lines(const Ldag& g) const;
};

struct IdentifyResult {
  SearchStatus status = SearchStatus::NotIdentifiable;
  Ldag graph;      // augmented graph the search ran on (for rendering)
  Term target;     // rewritten query
  Formula formula;         // simplified; null unless identified
  Formula raw_formula;     // direct backtracking result
  Derivation derivation;
  SearchStats stats;
};

// Score ordering the frontier: rewards role-sensitive overlap with the
// target on both sides, penalizes foreign variables and conflicting
// assignments. Higher is closer.
int proximity(const Term& t, const Term& target);

// Runs the rewrite search for the query over g. The graph is label-closed
// and augmented with an intervention node per observed variable before the
// search; the query becomes a conditional with I=1 assignments for the
// do-set. Inputs default to the single joint over the observed variables.
IdentifyResult identify(const Ldag& g, const QuerySpec& query, const SearchOptions& opts = {});
IdentifyResult identify(const Ldag& g, const std::vector<Term>& inputs, const QuerySpec& query,
                        const SearchOptions& opts = {});

}  // namespace csid
