#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "csid/ldag.hpp"

namespace csid {

// A context-specific independence statement: y ⫫ z | cond, ctx. The four
// parts are pairwise disjoint and y, z are nonempty.
struct CsiQuery {
  VarSet y = 0;
  VarSet z = 0;
  VarSet cond = 0;
  Context ctx;

  bool well_formed() const;
  // Independence is symmetric in (y, z); canonical form fixes their order.
  CsiQuery normalized() const {
    CsiQuery q = *this;
    if (q.z < q.y) std::swap(q.y, q.z);
    return q;
  }
  friend bool operator==(const CsiQuery&, const CsiQuery&) = default;
};

std::string to_string(const CsiQuery& q, const Ldag& g);

// Plain d-separation on an edge set given as parent masks: true iff every
// path between y and z is blocked by cond. Runs a reachability sweep over
// the ancestral closure of the involved variables.
bool d_separated(std::span<const VarSet> parents, VarSet y, VarSet z, VarSet cond);

struct SeparationOptions {
  // Largest auxiliary set tried when the direct criterion fails.
  int max_candidate_size = 2;
  bool use_cache = true;
  // When set, every decided query is dumped as a line
  //   CSI y ⫫ z | cond, ctx -> implied|unknown
  std::ostream* trace = nullptr;
};

struct SeparationStats {
  std::uint64_t queries = 0;      // top-level csi_holds calls
  std::uint64_t evaluations = 0;  // calls actually evaluated (cache misses)
  std::uint64_t dsep_sweeps = 0;
};

// Decision procedure for CSI implication over a fixed LDAG. Sound but
// deliberately incomplete: a false result means "not shown". The graph must
// outlive the engine. Not thread-safe (use one engine per thread).
class SeparationEngine {
 public:
  explicit SeparationEngine(const Ldag& g, SeparationOptions opts = {});

  const Ldag& graph() const { return g_; }

  // d-separation in the context-specific DAG, conditioning on cond plus the
  // context variables.
  bool csi_separated(const CsiQuery& q) const;

  // Layered check: label-encoded local CSI, then csi_separated, then a
  // search for an auxiliary set C such that the statement holds in every
  // representative context over C and one of the four elimination conditions
  // holds recursively. Each variable enters at most one auxiliary set per
  // recursion branch.
  bool csi_holds(const CsiQuery& q);

  // One context per equivalence class of val(c_set) under "same
  // context-specific DAG" (relative to the base context).
  std::vector<Context> representatives(VarSet c_set, const Context& base) const;

  // True when the query is exactly a local CSI recorded on an edge.
  bool label_encoded(const CsiQuery& q) const;

  const SeparationStats& stats() const { return stats_; }
  void clear_cache() { cache_.clear(); }

 private:
  struct CacheKey {
    VarSet y, z, cond, ctx_mask, ctx_values, forbidden;
    friend bool operator==(const CacheKey&, const CacheKey&) = default;
  };
  struct CacheKeyHash {
    std::size_t operator()(const CacheKey& k) const {
      std::uint64_t h = 0x243f6a8885a308d3ull;
      h = hash_combine(h, k.y);
      h = hash_combine(h, k.z);
      h = hash_combine(h, k.cond);
      h = hash_combine(h, k.ctx_mask);
      h = hash_combine(h, k.ctx_values);
      h = hash_combine(h, k.forbidden);
      return static_cast<std::size_t>(h);
    }
  };

  bool holds_impl(const CsiQuery& q, VarSet forbidden);
  void trace_verdict(const CsiQuery& q, bool verdict) const;

  const Ldag& g_;
  SeparationOptions opts_;
  mutable SeparationStats stats_;
  std::unordered_map<CacheKey, bool, CacheKeyHash> cache_;
};

}  // namespace csid
