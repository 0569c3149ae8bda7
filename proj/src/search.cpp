#include "csid/search.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <queue>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace csid {

// ---------------------------------------------------------------------------
// Query parsing

QuerySpec parse_query(std::string_view text, const Ldag& g) {
  size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto fail = [&](const std::string& msg) -> void {
    throw Error("bad query '" + std::string(text) + "': " + msg);
  };
  auto ident = [&]() -> std::string {
    skip_ws();
    size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    if (pos == start) fail("expected identifier");
    return std::string(text.substr(start, pos - start));
  };
  auto accept = [&](char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  };
  auto lookup = [&](const std::string& name) {
    int v = g.find_var(name);
    if (v < 0) fail("unknown variable " + name);
    return v;
  };

  QuerySpec q;
  skip_ws();
  if (!accept('P')) fail("expected P(");
  if (!accept('(')) fail("expected P(");
  do {
    q.outcome |= var_bit(lookup(ident()));
  } while (accept(','));
  if (accept('|')) {
    do {
      std::string name = ident();
      if (name == "do") {
        if (!accept('(')) fail("expected do(");
        do {
          q.do_set |= var_bit(lookup(ident()));
        } while (accept(','));
        if (!accept(')')) fail("unterminated do(");
      } else {
        int v = lookup(name);
        if (accept('=')) {
          skip_ws();
          if (pos >= text.size() || (text[pos] != '0' && text[pos] != '1'))
            fail("expected 0 or 1");
          q.cond_assigned.set(v, text[pos++] - '0');
        } else {
          q.cond_general |= var_bit(v);
        }
      }
    } while (accept(','));
  }
  if (!accept(')')) fail("expected closing )");
  skip_ws();
  if (pos != text.size()) fail("trailing input");
  return q;
}

// ---------------------------------------------------------------------------
// Proximity

int proximity(const Term& t, const Term& target) {
  int joint = set_size(t.jg & target.jg) +
              set_size(t.ja.mask & target.ja.mask & ~(t.ja.values ^ target.ja.values));
  int cond = set_size(t.cg & target.cg) +
             set_size(t.ca.mask & target.ca.mask & ~(t.ca.values ^ target.ca.values));
  int extra = set_size(t.all_vars() & ~target.all_vars());
  Context at = t.assigned(), ag = target.assigned();
  int conflicts = set_size((at.values ^ ag.values) & at.mask & ag.mask);
  return 2 * (joint + cond) - extra - conflicts;
}

// ---------------------------------------------------------------------------
// Derivation export

std::string Derivation::to_dot(const Ldag& g) const {
  std::unordered_map<Term, int, TermHash> ids;
  std::ostringstream out;
  out << "digraph derivation {\n  rankdir=TB;\n  node [shape=box];\n";
  for (size_t i = 0; i < steps.size(); ++i) {
    ids[steps[i].term] = static_cast<int>(i);
    out << "  n" << i << " [label=\"" << steps[i].term.to_string(g, false) << "\"];\n";
  }
  for (size_t i = 0; i < steps.size(); ++i) {
    const Justification& j = steps[i].just;
    std::string label = rule_name(j.rule);
    if (j.csi) label += std::string(": ") + to_string(*j.csi, g);
    for (const Term& p : j.parents)
      out << "  n" << ids.at(p) << " -> n" << i << " [label=\"" << label << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::string Derivation::to_lines(const Ldag& g) const {
  std::ostringstream out;
  for (const DerivationStep& s : steps) {
    out << s.term.to_string(g, false) << " | " << rule_name(s.just.rule);
    for (const Term& p : s.just.parents) out << " | " << p.to_string(g, false);
    if (s.just.csi) out << " | " << to_string(*s.just.csi, g);
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// The search proper

namespace {

struct SideKey {
  VarSet gen = 0;
  VarSet am = 0;
  VarSet av = 0;
  friend bool operator==(const SideKey&, const SideKey&) = default;
};
struct SideKeyHash {
  std::size_t operator()(const SideKey& k) const {
    std::uint64_t h = 0x9216d5d98979fb1bull;
    h = hash_combine(h, k.gen);
    h = hash_combine(h, k.am);
    h = hash_combine(h, k.av);
    return static_cast<std::size_t>(h);
  }
};

SideKey cond_key(const Term& t) { return {t.cg, t.ca.mask, t.ca.values}; }
SideKey footprint_key(const Term& t) {
  Context a = t.assigned();
  return {t.jg | t.cg, a.mask, a.values};
}

// One movable piece for rule 1 enumeration: a general variable or an
// assigned value.
struct MoveItem {
  VarSet zg = 0;
  Context za;
};

class Searcher {
 public:
  Searcher(const Ldag& g, std::vector<Term> inputs, Term target, const SearchOptions& opts)
      : g_(g), sep_(g, opts.separation), opts_(opts), target_(target), inputs_(std::move(inputs)) {
    if (opts_.full_context_split) {
      for (std::uint64_t i = 0; i < (std::uint64_t{1} << set_size(target_.general_vars())); ++i)
        remaining_.insert(instantiate(target_, i));
    }
    compute_insert_pool();
  }

  SearchStatus run() {
    auto start = std::chrono::steady_clock::now();
    deadline_ = opts_.limits.timeout_sec > 0
                    ? start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                  std::chrono::duration<double>(opts_.limits.timeout_sec))
                    : std::chrono::steady_clock::time_point::max();

    SearchStatus status = SearchStatus::NotIdentifiable;
    seed_inputs();
    if (done()) {
      status = SearchStatus::Identified;
    } else {
      while (!frontier_.empty()) {
        if (expired()) {
          status = SearchStatus::LimitReached;
          break;
        }
        if (opts_.limits.max_expansions && stats_.expansions >= opts_.limits.max_expansions) {
          status = SearchStatus::LimitReached;
          break;
        }
        auto [score, neg_order] = frontier_.top();
        frontier_.pop();
        ++stats_.expansions;
        expand(static_cast<int>(-neg_order));
        if (done()) {
          status = SearchStatus::Identified;
          break;
        }
      }
    }
    stats_.identified = terms_.size();
    stats_.csi_checks = sep_.stats().queries;
    stats_.wall_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    return status;
  }

  // Backtracks the chain of justifications into a formula plus the needed
  // sub-derivation.
  Formula backtrack(Derivation* derivation) {
    std::unordered_map<int, Formula> memo;
    std::vector<char> needed(terms_.size(), 0);
    Formula f;
    if (!opts_.full_context_split) {
      f = build_formula(index_.at(target_), memo, needed);
    } else {
      std::vector<int> general(vars_of(target_.general_vars()).begin(),
                               vars_of(target_.general_vars()).end());
      f = build_split(target_, general, 0, memo, needed);
    }
    if (derivation) {
      derivation->steps.clear();
      for (size_t i = 0; i < terms_.size(); ++i)
        if (needed[i]) derivation->steps.push_back({terms_[i], justs_[i]});
    }
    return f;
  }

  const SearchStats& stats() const { return stats_; }

 private:
  using Clock = std::chrono::steady_clock;

  bool expired() {
    if ((++tick_ & 0x3f) != 0) return false;
    return Clock::now() >= deadline_;
  }

  bool done() const {
    if (opts_.full_context_split) return remaining_.empty();
    return found_target_;
  }

  static Term instantiate(const Term& t, std::uint64_t bits) {
    Term out = t;
    int k = 0;
    for (int v : vars_of(t.general_vars())) {
      int val = (bits >> k) & 1;
      ++k;
      if (has_var(t.jg, v)) {
        out.jg &= ~var_bit(v);
        out.ja.set(v, val);
      } else {
        out.cg &= ~var_bit(v);
        out.ca.set(v, val);
      }
    }
    return out;
  }

  void compute_insert_pool() {
    VarSet qvars = target_.all_vars() & ~g_.intervention_vars();
    VarSet mediators = g_.descendants_of(qvars) & g_.ancestors_of(qvars) & ~qvars;
    insert_pool_ = qvars | mediators | g_.intervention_vars();
  }

  void seed_inputs() {
    for (const Term& input : inputs_) {
      if (!opts_.full_context_split) {
        commit(input, Justification{});
      } else {
        for (std::uint64_t i = 0; i < (std::uint64_t{1} << set_size(input.general_vars())); ++i)
          commit(instantiate(input, i), Justification{});
      }
    }
  }

  void commit(const Term& t, Justification j) {
    if (!t.valid()) return;
    ++stats_.rule_firings;
    if (index_.count(t)) return;  // previously identified terms stay put
    int id = static_cast<int>(terms_.size());
    terms_.push_back(t);
    justs_.push_back(std::move(j));
    index_.emplace(t, id);
    by_cond_[cond_key(t)].push_back(id);
    by_union_[footprint_key(t)].push_back(id);
    if (opts_.full_context_split) {
      remaining_.erase(t);
    } else if (t == target_) {
      found_target_ = true;
    }
    frontier_.push({proximity(t, target_), -static_cast<long long>(id)});
  }

  const Term* lookup(const Term& t) const {
    auto it = index_.find(t);
    return it == index_.end() ? nullptr : &terms_[it->second];
  }

  // --- rule 1 -------------------------------------------------------------

  std::vector<MoveItem> delete_items(const Term& t) const {
    std::vector<MoveItem> items;
    for (int v : vars_of(t.cg)) items.push_back({var_bit(v), Context()});
    for (int v : vars_of(t.ca.mask)) {
      Context c;
      c.set(v, t.ca.value(v));
      items.push_back({0, c});
    }
    return items;
  }

  std::vector<MoveItem> insert_items(const Term& t) const {
    std::vector<MoveItem> items;
    for (int v : vars_of(insert_pool_ & ~t.all_vars())) {
      if (g_.var(v).is_intervention()) {
        Context c;
        c.set(v, 1);  // passive state is implicit; I=0 never appears in terms
        items.push_back({0, c});
      } else {
        if (!opts_.full_context_split) items.push_back({var_bit(v), Context()});
        for (int val = 0; val < 2; ++val) {
          Context c;
          c.set(v, val);
          items.push_back({0, c});
        }
      }
    }
    return items;
  }

  template <typename Fn>
  void for_move_combos(const std::vector<MoveItem>& items, Fn&& fn) {
    int n = static_cast<int>(items.size());
    for (int i = 0; i < n; ++i) fn(items[i].zg, items[i].za);
    if (opts_.move_cap < 2) return;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        VarSet zg = items[i].zg | items[j].zg;
        VarSet vars_i = items[i].zg | items[i].za.mask;
        VarSet vars_j = items[j].zg | items[j].za.mask;
        if ((vars_i & vars_j) != 0) continue;  // same variable, two roles/values
        fn(zg, items[i].za.merged(items[j].za));
      }
    // combinations beyond pairs are reached by chaining rule applications
  }

  void generate_r1(const Term& t) {
    for_move_combos(insert_items(t), [&](VarSet zg, const Context& za) {
      auto cand = r1_insert(t, zg, za);
      if (!cand || index_.count(*cand)) return;
      CsiQuery q = r1_condition(t, zg, za);
      if (!q.well_formed() || !sep_.csi_holds(q)) return;
      Justification j;
      j.rule = Rule::R1ins;
      j.parents = {t};
      j.csi = q;
      j.moved_general = zg;
      j.moved_assigned = za;
      commit(*cand, std::move(j));
    });
    for_move_combos(delete_items(t), [&](VarSet zg, const Context& za) {
      auto cand = r1_delete(t, zg, za);
      if (!cand || index_.count(*cand)) return;
      CsiQuery q = r1_condition(*cand, zg, za);
      if (!q.well_formed() || !sep_.csi_holds(q)) return;
      Justification j;
      j.rule = Rule::R1del;
      j.parents = {t};
      j.csi = q;
      j.moved_general = zg;
      j.moved_assigned = za;
      commit(*cand, std::move(j));
    });
  }

  // --- rules 2 and 3 ------------------------------------------------------

  template <typename Fn>
  void for_subsets(VarSet pool, int min_size, int max_size, Fn&& fn) {
    std::vector<int> vars(vars_of(pool).begin(), vars_of(pool).end());
    int n = static_cast<int>(vars.size());
    if (min_size <= 0) fn(VarSet{0});
    if (max_size >= 1)
      for (int i = 0; i < n; ++i) {
        fn(var_bit(vars[i]));
        if (max_size >= 2)
          for (int j = i + 1; j < n; ++j) fn(var_bit(vars[i]) | var_bit(vars[j]));
      }
  }

  void generate_r2(const Term& t) {
    if (!opts_.full_context_split) {
      for_subsets(t.jg, 1, opts_.move_cap, [&](VarSet z) {
        if (auto cand = r2_marginalize(t, z)) {
          Justification j;
          j.rule = Rule::R2;
          j.parents = {t};
          j.moved_general = z;
          commit(*cand, std::move(j));
        }
      });
      return;
    }
    // Context-split form: both value cases must be identified; their sum is
    // the marginal.
    for (int v : vars_of(t.ja.mask)) {
      Term drop = t;
      drop.ja.erase(v);
      if (drop.joint_vars() == 0 || index_.count(drop)) continue;
      Term zero = t, one = t;
      zero.ja.set(v, 0);
      one.ja.set(v, 1);
      if (!lookup(zero) || !lookup(one)) continue;
      Justification j;
      j.rule = Rule::R2;
      j.parents = {zero, one};
      j.var = v;
      commit(drop, std::move(j));
    }
  }

  void generate_r3(const Term& t) {
    if (!opts_.full_context_split) {
      // With nothing assigned, moving the empty set is the identity.
      for_subsets(t.jg, t.ja.mask == 0 ? 1 : 0, opts_.move_cap, [&](VarSet zg) {
        if (auto cand = r3_condition(t, zg)) {
          Justification j;
          j.rule = Rule::R3;
          j.parents = {t};
          j.moved_general = zg;
          j.moved_assigned = t.ja;
          commit(*cand, std::move(j));
        }
      });
      return;
    }
    // Context-split form: quotient of two identified assigned terms.
    auto emit = [&](const Term& num, const Term& den) {
      // num = P(rest, moved | x), den = P(moved | x)
      Context moved = den.ja;
      Term cand;
      cand.ja = Context(num.ja.mask & ~moved.mask, num.ja.values & ~moved.mask);
      cand.cg = num.cg;
      cand.ca = num.ca.merged(moved);
      if (cand.joint_vars() == 0 || index_.count(cand)) return;
      Justification j;
      j.rule = Rule::R3;
      j.parents = {num, den};
      j.moved_assigned = moved;
      commit(cand, std::move(j));
    };
    // t as the numerator: move a sub-assignment out.
    for_subsets(t.ja.mask, 1, opts_.move_cap, [&](VarSet moved_mask) {
      if (moved_mask == t.ja.mask) return;  // a joint part must remain
      Term den;
      den.ja = t.ja.restricted(moved_mask);
      den.cg = t.cg;
      den.ca = t.ca;
      if (lookup(den)) emit(t, den);
    });
    // t as the denominator: find numerators extending t's joint assignment.
    auto it = by_cond_.find(cond_key(t));
    if (it != by_cond_.end())
      for (int id : it->second) {
        const Term& num = terms_[id];
        if (num.ja.mask == t.ja.mask || (t.ja.mask & ~num.ja.mask) != 0) continue;
        if (((num.ja.values ^ t.ja.values) & t.ja.mask) != 0) continue;
        if (set_size(t.ja.mask) > opts_.move_cap) continue;
        emit(num, t);
      }
  }

  // --- rule 4 ---------------------------------------------------------------

  void generate_r4(const Term& t) {
    // t as the conditional factor P(y | z, x): partners are terms whose
    // whole footprint equals t's conditioning side.
    auto it = by_union_.find(SideKey{t.cg, t.ca.mask, t.ca.values});
    if (it != by_union_.end())
      for (int id : it->second)
        if (auto cand = r4_combine(t, terms_[id])) {
          Justification j;
          j.rule = Rule::R4;
          j.parents = {t, terms_[id]};
          commit(*cand, std::move(j));
        }
    // t as the marginal factor P(z | x): partners condition on exactly t's
    // footprint.
    auto it2 = by_cond_.find(footprint_key(t));
    if (it2 != by_cond_.end())
      for (int id : it2->second)
        if (auto cand = r4_combine(terms_[id], t)) {
          Justification j;
          j.rule = Rule::R4;
          j.parents = {terms_[id], t};
          commit(*cand, std::move(j));
        }
  }

  // --- rules 5 and 6 --------------------------------------------------------

  void generate_r5(const Term& t) {
    // P(1-z | x) = 1 - P(z | x)
    if (auto cand = r5_self(t); cand && !index_.count(*cand)) {
      Justification j;
      j.rule = Rule::R5;
      j.parents = {t};
      j.var = lowest_var(t.ja.mask);
      j.value = cand->ja.value(j.var);
      commit(*cand, std::move(j));
    }
    // t as the case term: the general parent must be identified.
    for (int v : vars_of(t.ja.mask)) {
      Term general = t;
      general.ja.erase(v);
      if (general.joint_vars() == 0 || !lookup(general)) continue;
      if (auto cand = r5_complement(general, t, v); cand && !index_.count(*cand)) {
        Justification j;
        j.rule = Rule::R5;
        j.parents = {general, t};
        j.var = v;
        j.value = cand->ja.value(v);
        commit(*cand, std::move(j));
      }
    }
    // t as the general term: probe for identified cases.
    for (int v = 0; v < g_.var_count(); ++v) {
      if (has_var(t.all_vars(), v) || g_.var(v).is_intervention()) continue;
      for (int val = 0; val < 2; ++val) {
        Term kase = t;
        kase.ja.set(v, val);
        if (!lookup(kase)) continue;
        if (auto cand = r5_complement(t, kase, v); cand && !index_.count(*cand)) {
          Justification j;
          j.rule = Rule::R5;
          j.parents = {t, kase};
          j.var = v;
          j.value = cand->ja.value(v);
          commit(*cand, std::move(j));
        }
      }
    }
  }

  void generate_r6(const Term& t) {
    for (int v : vars_of(t.ja.mask)) {
      Term other = t;
      other.ja.set(v, 1 - t.ja.value(v));
      if (!lookup(other)) continue;
      const Term& t0 = t.ja.value(v) == 0 ? t : other;
      const Term& t1 = t.ja.value(v) == 0 ? other : t;
      if (auto cand = r6_merge(t0, t1, v); cand && !index_.count(*cand)) {
        Justification j;
        j.rule = Rule::R6;
        j.parents = {t0, t1};
        j.var = v;
        commit(*cand, std::move(j));
      }
    }
  }

  // --- rules 7 and 8 ----------------------------------------------------------

  void generate_r78(const Term& t) {
    for (int v : vars_of(t.jg))
      for (int val = 0; val < 2; ++val)
        if (auto cand = r7_instantiate(t, v, val)) {
          Justification j;
          j.rule = Rule::R7;
          j.parents = {t};
          j.var = v;
          j.value = val;
          commit(*cand, std::move(j));
        }
    for (int v : vars_of(t.cg))
      for (int val = 0; val < 2; ++val)
        if (auto cand = r8_instantiate(t, v, val)) {
          Justification j;
          j.rule = Rule::R8;
          j.parents = {t};
          j.var = v;
          j.value = val;
          commit(*cand, std::move(j));
        }
  }

  void expand(int id) {
    Term t = terms_[id];  // by value: vectors may reallocate during commits
    generate_r1(t);
    if (done()) return;
    generate_r2(t);
    if (done()) return;
    generate_r3(t);
    if (done()) return;
    generate_r4(t);
    if (done()) return;
    generate_r5(t);
    if (done()) return;
    if (!opts_.full_context_split) {
      generate_r6(t);
      if (done()) return;
      generate_r78(t);
    }
  }

  // --- backtracking -----------------------------------------------------------

  Formula build_formula(int id, std::unordered_map<int, Formula>& memo,
                        std::vector<char>& needed) {
    auto it = memo.find(id);
    if (it != memo.end()) return it->second;
    needed[id] = 1;
    const Justification& j = justs_[id];
    const Term& term = terms_[id];
    std::vector<Formula> pf;
    pf.reserve(j.parents.size());
    for (const Term& p : j.parents) pf.push_back(build_formula(index_.at(p), memo, needed));

    Formula f;
    switch (j.rule) {
      case Rule::Input:
        f = f_leaf(term);
        break;
      case Rule::R1ins:
        f = pf[0];
        break;
      case Rule::R1del:
        // The verified statement makes the parent constant in the deleted
        // general variables, so pin them to keep the expression closed.
        f = pf[0];
        for (int v : vars_of(j.moved_general & free_vars(f))) f = f_substitute(v, 0, f);
        break;
      case Rule::R2:
        if (pf.size() == 2) {
          f = f_add({pf[0], pf[1]});
        } else {
          f = pf[0];
          std::vector<int> vs(vars_of(j.moved_general).begin(), vars_of(j.moved_general).end());
          for (auto v = vs.rbegin(); v != vs.rend(); ++v) f = f_sum(*v, f);
        }
        break;
      case Rule::R3:
        if (pf.size() == 2) {
          f = f_quotient(pf[0], pf[1]);
        } else {
          Formula den = pf[0];
          std::vector<int> vs(vars_of(term.jg).begin(), vars_of(term.jg).end());
          for (auto v = vs.rbegin(); v != vs.rend(); ++v) den = f_sum(*v, den);
          f = f_quotient(pf[0], den);
        }
        break;
      case Rule::R4:
        f = f_product({pf[0], pf[1]});
        break;
      case Rule::R5:
        f = pf.size() == 2 ? f_difference(pf[0], pf[1]) : f_difference(f_one(), pf[0]);
        break;
      case Rule::R6:
        f = f_piecewise(j.var, pf[0], pf[1]);
        break;
      case Rule::R7:
      case Rule::R8:
        f = f_substitute(j.var, j.value, pf[0]);
        break;
    }
    memo.emplace(id, f);
    return f;
  }

  Formula build_split(const Term& shape, const std::vector<int>& general, size_t k,
                      std::unordered_map<int, Formula>& memo, std::vector<char>& needed) {
    if (k == general.size()) return build_formula(index_.at(shape), memo, needed);
    int v = general[k];
    auto assign = [&](int val) {
      Term t = shape;
      if (has_var(t.jg, v)) {
        t.jg &= ~var_bit(v);
        t.ja.set(v, val);
      } else {
        t.cg &= ~var_bit(v);
        t.ca.set(v, val);
      }
      return t;
    };
    return f_piecewise(v, build_split(assign(0), general, k + 1, memo, needed),
                       build_split(assign(1), general, k + 1, memo, needed));
  }

  const Ldag& g_;
  SeparationEngine sep_;
  SearchOptions opts_;
  Term target_;
  std::vector<Term> inputs_;
  VarSet insert_pool_ = 0;

  std::vector<Term> terms_;
  std::vector<Justification> justs_;
  std::unordered_map<Term, int, TermHash> index_;
  std::unordered_map<SideKey, std::vector<int>, SideKeyHash> by_cond_;
  std::unordered_map<SideKey, std::vector<int>, SideKeyHash> by_union_;
  std::priority_queue<std::pair<long long, long long>> frontier_;
  std::unordered_set<Term, TermHash> remaining_;  // full-CS targets left
  bool found_target_ = false;

  SearchStats stats_;
  Clock::time_point deadline_;
  std::uint64_t tick_ = 0;
};

}  // namespace

IdentifyResult identify(const Ldag& g, const QuerySpec& query, const SearchOptions& opts) {
  Term joint;
  joint.jg = g.observed_vars();
  return identify(g, {joint}, query, opts);
}

IdentifyResult identify(const Ldag& g, const std::vector<Term>& inputs, const QuerySpec& query,
                        const SearchOptions& opts) {
  if (query.outcome == 0) throw Error("query has no outcome variables");
  VarSet qvars = query.all_vars();
  if ((qvars & ~g.all_vars()) != 0) throw Error("query variable outside the graph");
  if ((qvars & ~g.observed_vars()) != 0) throw Error("query variable is latent");
  VarSet parts[4] = {query.outcome, query.do_set, query.cond_general, query.cond_assigned.mask};
  VarSet seen = 0;
  for (VarSet p : parts) {
    if ((p & seen) != 0) throw Error("query parts overlap");
    seen |= p;
  }
  for (int v : vars_of(qvars))
    if (g.var(v).is_intervention()) throw Error("query names an intervention node");
  if (inputs.empty()) throw Error("no input distributions");
  for (const Term& input : inputs) {
    if (!input.valid()) throw Error("malformed input term");
    if ((input.all_vars() & ~g.observed_vars()) != 0)
      throw Error("input term mentions an unobserved variable");
  }

  // Interventions become conditioning once every observed variable gets a
  // switch node; closing labels first keeps recorded CSIs maximal.
  Ldag augmented = label_closure(augment_with_interventions(label_closure(g), g.observed_vars()));

  Term target;
  target.jg = query.outcome;
  target.cg = query.do_set | query.cond_general;
  target.ca = query.cond_assigned;
  for (int x : vars_of(query.do_set)) target.ca.set(augmented.intervention_node_of(x), 1);

  Searcher searcher(augmented, inputs, target, opts);
  IdentifyResult result;
  result.status = searcher.run();
  result.target = target;
  if (result.status == SearchStatus::Identified) {
    result.raw_formula = searcher.backtrack(&result.derivation);
    result.formula = simplify(result.raw_formula);
  }
  result.stats = searcher.stats();
  result.graph = std::move(augmented);
  return result;
}

}  // namespace csid
