#include "csid/separation.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace csid {

bool CsiQuery::well_formed() const {
  if (y == 0 || z == 0) return false;
  VarSet parts[4] = {y, z, cond, ctx.mask};
  VarSet seen = 0;
  for (VarSet p : parts) {
    if ((p & seen) != 0) return false;
    seen |= p;
  }
  return true;
}

std::string to_string(const CsiQuery& q, const Ldag& g) {
  auto names = [&](VarSet s) {
    if (s == 0) return std::string("-");
    std::string out;
    for (int v : vars_of(s)) {
      if (!out.empty()) out += ",";
      out += g.var(v).name;
    }
    return out;
  };
  std::string ctx;
  for (int v : vars_of(q.ctx.mask)) {
    if (!ctx.empty()) ctx += ",";
    ctx += g.var(v).name + "=" + std::to_string(q.ctx.value(v));
  }
  if (ctx.empty()) ctx = "-";
  return names(q.y) + " ⫫ " + names(q.z) + " | " + names(q.cond) + ", " + ctx;
}

bool d_separated(std::span<const VarSet> parents, VarSet y, VarSet z, VarSet cond) {
  int n = static_cast<int>(parents.size());
  auto ancestors = [&](VarSet s) {
    VarSet acc = s;
    for (;;) {
      VarSet next = acc;
      for (int v : vars_of(acc)) next |= parents[v];
      if (next == acc) return acc;
      acc = next;
    }
  };
  // Only the ancestral closure of the involved variables is relevant.
  VarSet relevant = ancestors(y | z | cond);
  std::vector<VarSet> children(n, 0);
  for (int v : vars_of(relevant))
    for (int p : vars_of(parents[v] & relevant)) children[p] |= var_bit(v);

  VarSet cond_anc = ancestors(cond);  // nodes with self-or-descendant in cond

  // Ball passing: "up" states were entered from a child, "down" states from
  // a parent. y starts in the up state (free to move anywhere).
  VarSet visited_up = 0, visited_down = 0;
  std::vector<std::pair<int, bool>> stack;  // (node, entered_from_child)
  for (int v : vars_of(y)) stack.push_back({v, true});
  while (!stack.empty()) {
    auto [v, up] = stack.back();
    stack.pop_back();
    VarSet bit = var_bit(v);
    if (up) {
      if (visited_up & bit) continue;
      visited_up |= bit;
    } else {
      if (visited_down & bit) continue;
      visited_down |= bit;
    }
    if (has_var(z, v)) return false;
    if (up) {
      if (!has_var(cond, v)) {
        for (int p : vars_of(parents[v] & relevant)) stack.push_back({p, true});
        for (int c : vars_of(children[v])) stack.push_back({c, false});
      }
    } else {
      if (has_var(cond_anc, v))
        for (int p : vars_of(parents[v] & relevant)) stack.push_back({p, true});
      if (!has_var(cond, v))
        for (int c : vars_of(children[v])) stack.push_back({c, false});
    }
  }
  return true;
}

SeparationEngine::SeparationEngine(const Ldag& g, SeparationOptions opts)
    : g_(g), opts_(opts) {}

bool SeparationEngine::csi_separated(const CsiQuery& q) const {
  ++stats_.dsep_sweeps;
  std::vector<VarSet> pa = g_.context_dag(q.ctx);
  return d_separated(pa, q.y, q.z, q.cond | q.ctx.mask);
}

bool SeparationEngine::label_encoded(const CsiQuery& q) const {
  if (set_size(q.y) != 1 || set_size(q.z) != 1) return false;
  int a = lowest_var(q.y), b = lowest_var(q.z);
  for (auto [tail, head] : {std::pair{a, b}, std::pair{b, a}}) {
    int ei = g_.edge_index(tail, head);
    if (ei < 0) continue;
    const LdagEdge& e = g_.edges()[ei];
    VarSet domain = g_.label_domain(e);
    // The statement must condition on exactly the co-parents; assigned ones
    // come from the context, the rest range over both values and every
    // completion has to be covered.
    if ((q.cond | q.ctx.mask) != domain) continue;
    if (e.label.empty()) continue;
    VarSet free = domain & ~q.ctx.mask;
    if (Ldag::covered_count(e.label, domain, q.ctx) == (std::uint64_t{1} << set_size(free)))
      return true;
  }
  return false;
}

std::vector<Context> SeparationEngine::representatives(VarSet c_set, const Context& base) const {
  if ((c_set & base.mask) != 0) throw Error("representative set overlaps base context");
  std::vector<int> cs(vars_of(c_set).begin(), vars_of(c_set).end());
  if (cs.size() > 20) throw Error("representative set too large");
  std::vector<Context> reps;
  std::vector<std::vector<VarSet>> seen_dags;
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << cs.size()); ++i) {
    Context c;
    for (size_t k = 0; k < cs.size(); ++k) c.set(cs[k], (i >> k) & 1);
    std::vector<VarSet> dag = g_.context_dag(base.merged(c));
    bool fresh = std::find(seen_dags.begin(), seen_dags.end(), dag) == seen_dags.end();
    if (fresh) {
      seen_dags.push_back(std::move(dag));
      reps.push_back(c);
    }
  }
  return reps;
}

void SeparationEngine::trace_verdict(const CsiQuery& q, bool verdict) const {
  if (opts_.trace)
    *opts_.trace << "CSI " << to_string(q, g_) << " -> " << (verdict ? "implied" : "unknown")
                 << "\n";
}

bool SeparationEngine::csi_holds(const CsiQuery& q) {
  if (!q.well_formed()) throw Error("malformed CSI query");
  ++stats_.queries;
  return holds_impl(q.normalized(), 0);
}

bool SeparationEngine::holds_impl(const CsiQuery& q, VarSet forbidden) {
  CacheKey key{q.y, q.z, q.cond, q.ctx.mask, q.ctx.values, forbidden};
  if (opts_.use_cache) {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  ++stats_.evaluations;

  bool result = label_encoded(q) || csi_separated(q);
  if (!result) {
    // Hunt for an auxiliary set C: the statement must separate in every
    // representative context over C, and C itself must be removable via one
    // of the four elimination conditions, checked recursively.
    VarSet pool = g_.all_vars() & ~(q.y | q.z | q.cond | q.ctx.mask | forbidden);
    std::vector<int> pool_vars(vars_of(pool).begin(), vars_of(pool).end());
    // Singletons first, then pairs, etc., lexicographic within a size.
    std::vector<VarSet> candidates;
    int cap = std::min<int>(opts_.max_candidate_size, static_cast<int>(pool_vars.size()));
    std::vector<int> combo;
    auto enumerate = [&](auto&& self, int next, int want) -> void {
      if (static_cast<int>(combo.size()) == want) {
        VarSet s = 0;
        for (int v : combo) s |= var_bit(v);
        candidates.push_back(s);
        return;
      }
      for (int i = next; i < static_cast<int>(pool_vars.size()); ++i) {
        combo.push_back(pool_vars[i]);
        self(self, i + 1, want);
        combo.pop_back();
      }
    };
    for (int size = 1; size <= cap; ++size) enumerate(enumerate, 0, size);

    for (VarSet c_set : candidates) {
      if (result) break;
      bool in_all = true;
      for (const Context& rep : representatives(c_set, q.ctx)) {
        CsiQuery split = q;
        split.ctx = q.ctx.merged(rep);
        if (!csi_separated(split)) {
          in_all = false;
          break;
        }
      }
      if (!in_all) continue;
      VarSet forbidden2 = forbidden | c_set;
      const CsiQuery conditions[4] = {
          {q.y, c_set, q.cond, q.ctx},          // y ⫫ C | cond, ctx
          {c_set, q.z, q.cond, q.ctx},          // C ⫫ z | cond, ctx
          {q.y, c_set, q.cond | q.z, q.ctx},    // y ⫫ C | cond ∪ z, ctx
          {q.z, c_set, q.cond | q.y, q.ctx},    // z ⫫ C | cond ∪ y, ctx
      };
      for (const CsiQuery& cond_q : conditions)
        if (holds_impl(cond_q.normalized(), forbidden2)) {
          result = true;
          break;
        }
    }
  }

  if (opts_.use_cache) cache_.emplace(key, result);
  trace_verdict(q, result);
  return result;
}

}  // namespace csid
