#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csid/varset.hpp"

namespace csid {

struct Variable {
  std::string name;
  bool observed = true;
  // For intervention variables, the id of the base variable they switch;
  // -1 for ordinary variables.
  int intervention_base = -1;

  bool is_intervention() const { return intervention_base >= 0; }
};

// One entry of an edge label: an assignment (with wildcards) to the
// co-parents of the edge's head. `fixed` marks the non-wildcard variables,
// `values` their values. Wildcard variables are the rest of the edge's
// label domain, which is pa(head) \ {tail} and is not stored here.
struct LabelEntry {
  VarSet fixed = 0;
  VarSet values = 0;

  bool covers(const Context& a) const {
    return (fixed & ~a.mask) == 0 && ((values ^ a.values) & fixed) == 0;
  }
  friend bool operator==(const LabelEntry&, const LabelEntry&) = default;
  friend auto operator<=>(const LabelEntry&, const LabelEntry&) = default;
};

struct LdagEdge {
  int tail = -1;
  int head = -1;
  std::vector<LabelEntry> label;  // empty means the edge is never spurious
};

struct ParseError : Error {
  int line = 0;
  int column = 0;
  ParseError(int l, int c, const std::string& msg)
      : Error("line " + std::to_string(l) + ", column " + std::to_string(c) + ": " + msg),
        line(l),
        column(c) {}
};

// Immutable labeled DAG over binary variables. Construct through Builder or
// parse_ldag; all operations on a built graph are pure.
class Ldag {
 public:
  class Builder;

  int var_count() const { return static_cast<int>(vars_.size()); }
  const Variable& var(int v) const { return vars_[v]; }
  const std::vector<Variable>& variables() const { return vars_; }
  int find_var(std::string_view name) const;

  VarSet all_vars() const { return full_set(var_count()); }
  VarSet observed_vars() const { return observed_; }
  VarSet latent_vars() const { return all_vars() & ~observed_; }
  VarSet intervention_vars() const { return intervention_; }

  VarSet parents(int v) const { return parents_[v]; }
  VarSet children(int v) const { return children_[v]; }
  VarSet ancestors_of(VarSet s) const;    // includes s
  VarSet descendants_of(VarSet s) const;  // includes s

  bool has_edge(int tail, int head) const { return edge_index(tail, head) >= 0; }
  int edge_index(int tail, int head) const;
  const std::vector<LdagEdge>& edges() const { return edges_; }
  // Label domain of edge tail->head: pa(head) minus the tail.
  VarSet label_domain(const LdagEdge& e) const { return parents_[e.head] & ~var_bit(e.tail); }

  // Intervention node attached to v, or -1.
  int intervention_node_of(int v) const { return iv_of_[v]; }

  // Edge set (as parent masks) of the context-specific DAG: every edge whose
  // label covers all completions of `ctx` on its domain is dropped.
  std::vector<VarSet> context_dag(const Context& ctx) const;
  bool edge_spurious(const LdagEdge& e, const Context& ctx) const;

  // Number of label-domain assignments consistent with `ctx` that the entry
  // set covers. Counts over the compact wildcard form without expansion.
  static std::uint64_t covered_count(const std::vector<LabelEntry>& entries, VarSet domain,
                                     const Context& ctx);

  // Per-node equivalence classes over parent assignment rows, as implied by
  // the declared labels: row index -> class representative. Rows are indexed
  // by packing parent values in ascending parent-id order.
  std::vector<int> cpt_row_classes(int v) const;

  std::string render() const;

  friend Ldag augment_with_interventions(const Ldag& g, VarSet targets);
  friend Ldag label_closure(const Ldag& g);
  friend Ldag strip_labels(const Ldag& g);

  friend bool operator==(const Ldag&, const Ldag&);

 private:
  std::vector<Variable> vars_;
  std::vector<VarSet> parents_;
  std::vector<VarSet> children_;
  std::vector<int> iv_of_;  // per var: id of its intervention node or -1
  std::vector<LdagEdge> edges_;
  std::vector<int> edge_lookup_;  // var_count^2 matrix of edge indices, -1 absent
  VarSet observed_ = 0;
  VarSet intervention_ = 0;
};

class Ldag::Builder {
 public:
  int add_var(std::string name, bool observed, int intervention_base = -1);
  void add_edge(int tail, int head);
  // Entry assigns `fixed` variables to `values`; wildcards are implicit.
  void add_label_entry(int tail, int head, VarSet fixed, VarSet values);

  // Validates structure (acyclicity, label domains); regularity is only
  // enforced when `require_regular` is set, which load paths should do.
  Ldag build(bool require_regular = true) const;

 private:
  std::vector<Variable> vars_;
  std::vector<LdagEdge> edges_;
};

// Parses the graph DSL. One statement per line, `#` starts a comment:
//   node X            observed variable
//   latent L          unobserved variable
//   X -> Y            edge
//   X -> Y [A=1, L=*; A=0, L=0]
// Every label entry must mention each co-parent of the head exactly once.
Ldag parse_ldag(std::string_view text);

// Adds an intervention node I_X and edge I_X -> X for each target, and
// rewrites labels on other edges into X so that they are spurious whenever
// I_X = 1 (in addition to their previous contexts).
Ldag augment_with_interventions(const Ldag& g, VarSet targets);

// Extends labels to their semantic closure: an entry is added to X -> Y
// whenever the two CPT rows of Y it joins already fall in the same
// row-equivalence class. Idempotent; never drops entries.
Ldag label_closure(const Ldag& g);

// Same graph with every label removed.
Ldag strip_labels(const Ldag& g);

}  // namespace csid
