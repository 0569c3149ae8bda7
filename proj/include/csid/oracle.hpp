#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "csid/formula.hpp"
#include "csid/search.hpp"
#include "csid/table.hpp"

namespace csid {

// Positivity floor for CPT entries.
inline constexpr double kProbFloor = 1e-3;

// Full parameterization of an LDAG: per variable, P(V=1 | parent row), with
// rows indexed by packing parent values in ascending parent-id order. Label
// consistency means equated rows hold identical probabilities.
struct DiscreteModel {
  const Ldag* graph = nullptr;
  std::vector<std::vector<double>> p1;

  double row_p1(int v, std::size_t row) const { return p1[v][row]; }
  bool label_consistent(double tol = 0.0) const;

  std::string dump() const;  // one row per line: V | pa-assignment : p0 p1
};

DiscreteModel load_model(std::istream& in, const Ldag& g);

// Per-row-class parameter draw, so every declared local CSI holds exactly.
// Deterministic in the seed.
DiscreteModel random_model(const Ldag& g, std::uint64_t seed);

// Exact joint over all variables (factorization product). Throws above the
// variable cap.
DiscreteTable joint_distribution(const DiscreteModel& m, int max_vars = 20);

// Joint marginalized onto the observed variables.
DiscreteTable observed_joint(const DiscreteModel& m, int max_vars = 20);

// Truncated factorization: intervened variables lose their factors and are
// fixed; latents are summed out. Result ranges over observed \ do.
DiscreteTable interventional(const DiscreteModel& m, const Context& do_assign,
                             int max_vars = 20);

// Defining probability of a term under a model: P(joint | cond) at the
// given binding of its general variables.
double eval_term(const DiscreteTable& joint_all, const Term& t, const Context& binding);

// Largest deviation of P(y,z|x,w) from P(y|x,w)P(z|x,w) over all
// assignments; zero (up to rounding) iff the CSI holds in the model.
double csi_deviation(const DiscreteTable& joint_all, const CsiQuery& q);

struct VerifyReport {
  int trials = 0;
  double max_error = 0.0;
  bool pass = false;
  std::string text() const;
};

// Monte-Carlo-free check of an identifying formula: on `trials` seeded
// models, compares the formula evaluated on the observed joint against the
// truncated-factorization ground truth for the query.
VerifyReport verify_formula(const Ldag& g, const Formula& f, const QuerySpec& query, int trials,
                            double tol);

struct CounterexampleResult {
  bool found = false;
  double obs_gap = 0.0;     // max |P1(W) - P2(W)|
  double effect_gap = 0.0;  // max difference of the queried effect
  std::optional<DiscreteModel> model_a;
  std::optional<DiscreteModel> model_b;
};

struct CounterexampleBudget {
  int restarts = 40;
  int directions_per_restart = 24;
  std::uint64_t seed = 20240;
};

// Best-effort search for two label-consistent models that agree on the
// observed joint (to 1e-9) yet disagree on the causal effect (by more than
// 1e-3). Success certifies non-identifiability; failure says nothing.
CounterexampleResult counterexample_search(const Ldag& g, const QuerySpec& query,
                                           const CounterexampleBudget& budget = {});

}  // namespace csid
