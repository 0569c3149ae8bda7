#pragma once

#include <vector>

#include "csid/varset.hpp"

namespace csid {

// Dense probability table over a set of binary variables. Entry index packs
// the value of the k-th smallest variable into bit k.
struct DiscreteTable {
  VarSet vars = 0;
  std::vector<double> p;

  DiscreteTable() = default;
  explicit DiscreteTable(VarSet v) : vars(v), p(std::size_t{1} << set_size(v), 0.0) {}

  int rank_of(int v) const {
    assert(has_var(vars, v));
    return set_size(vars & (var_bit(v) - 1));
  }
  std::size_t size() const { return p.size(); }

  std::size_t index_of(const Context& assignment) const {
    assert((vars & ~assignment.mask) == 0);
    std::size_t idx = 0;
    int k = 0;
    for (int v : vars_of(vars)) {
      if (assignment.value(v)) idx |= std::size_t{1} << k;
      ++k;
    }
    return idx;
  }

  // Assignment corresponding to an index.
  Context assignment_of(std::size_t idx) const {
    Context c;
    int k = 0;
    for (int v : vars_of(vars)) {
      c.set(v, (idx >> k) & 1);
      ++k;
    }
    return c;
  }

  double prob(const Context& full) const { return p[index_of(full)]; }

  // Total mass of entries consistent with a partial assignment (variables
  // outside this table are ignored).
  double sum_consistent(const Context& partial) const {
    Context fixed = partial.restricted(vars);
    VarSet free = vars & ~fixed.mask;
    std::size_t base = 0;
    {
      int k = 0;
      for (int v : vars_of(vars)) {
        if (fixed.assigns(v) && fixed.value(v)) base |= std::size_t{1} << k;
        ++k;
      }
    }
    std::size_t free_bits = 0;
    {
      int k = 0;
      for (int v : vars_of(vars)) {
        if (has_var(free, v)) free_bits |= std::size_t{1} << k;
        ++k;
      }
    }
    double total = 0.0;
    std::size_t sub = 0;
    for (;;) {
      total += p[base | sub];
      if (sub == free_bits) break;
      sub = (sub - free_bits) & free_bits;  // next subset of free_bits
    }
    return total;
  }

  DiscreteTable marginal(VarSet keep) const {
    DiscreteTable out(vars & keep);
    for (std::size_t i = 0; i < p.size(); ++i) out.p[out.project(*this, i)] += p[i];
    return out;
  }

  double total() const {
    double t = 0;
    for (double x : p) t += x;
    return t;
  }
  void normalize() {
    double t = total();
    if (t > 0)
      for (double& x : p) x /= t;
  }

 private:
  // Index in this table of the restriction of `src` index i.
  std::size_t project(const DiscreteTable& src, std::size_t i) const {
    std::size_t idx = 0;
    int k = 0;
    for (int v : vars_of(vars)) {
      if ((i >> src.rank_of(v)) & 1) idx |= std::size_t{1} << k;
      ++k;
    }
    return idx;
  }
};

}  // namespace csid
