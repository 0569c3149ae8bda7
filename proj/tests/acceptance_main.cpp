// Acceptance suite: end-to-end checks of the identification engine against
// its numeric ground truth. Each criterion prints one PASS/FAIL line; the
// process exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include "csid/bench.hpp"
#include "csid/oracle.hpp"
#include "csid/search.hpp"
#include "fixtures.hpp"
#include "id_oracle.hpp"
#include "test_util.hpp"

using namespace csid;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
  std::cout << "criterion " << number << " [" << name << "]: " << (pass ? "PASS" : "FAIL")
            << (detail.empty() ? "" : " (" + detail + ")") << std::endl;
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Formula leaf(const Ldag& g, const char* text) { return f_leaf(parse_term(text, g)); }

// Max |f - g| over all bindings of `general` across `trials` seeded models.
double max_formula_gap(const Ldag& g, const Formula& a, const Formula& b, VarSet general,
                       int trials) {
  double worst = 0;
  std::vector<int> vars(vars_of(general).begin(), vars_of(general).end());
  for (int trial = 1; trial <= trials; ++trial) {
    DiscreteModel m = random_model(g, trial);
    DiscreteTable pw = observed_joint(m);
    std::vector<DiscreteTable> tables = {pw};
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << vars.size()); ++bits) {
      Context binding;
      for (size_t k = 0; k < vars.size(); ++k) binding.set(vars[k], (bits >> k) & 1);
      worst = std::max(worst,
                       std::abs(evaluate(a, tables, binding) - evaluate(b, tables, binding)));
    }
  }
  return worst;
}

int env_jobs() {
  if (const char* env = std::getenv("CSID_ACCEPT_JOBS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 4;
}

// ---------------------------------------------------------------------------

void criterion_1() {
  auto start = std::chrono::steady_clock::now();
  Ldag g = fixtures::switch_confounder();
  QuerySpec q = parse_query("P(Y | do(X))", g);
  IdentifyResult res = identify(g, q);
  double elapsed = seconds_since(start);

  if (res.status != SearchStatus::Identified) {
    report(1, "split-adjustment reproduction", false, "identification failed");
    return;
  }
  VerifyReport check = verify_formula(g, res.formula, q, 200, 1e-9);

  // The literal split-adjustment expression.
  Formula expected = f_add({f_product({leaf(g, "P(Y | A=0, X)"), leaf(g, "P(A=0)")}),
                            f_product({leaf(g, "P(Y | A=1)"), leaf(g, "P(A=1)")})});
  double gap = max_formula_gap(g, res.formula, expected, q.outcome | q.do_set, 200);

  std::ostringstream detail;
  detail << "max_err=" << check.max_error << " literal_gap=" << gap << " time=" << elapsed
         << "s";
  report(1, "split-adjustment reproduction",
         check.pass && gap < 1e-9 && elapsed < 10.0, detail.str());
}

void criterion_2() {
  auto start = std::chrono::steady_clock::now();
  struct Fixture {
    const char* name;
    const char* src;
    Formula target;
    Ldag graph;
  };

  std::vector<Fixture> fixtures_list;
  {
    Ldag g = fixtures::gated_backdoor();
    Formula t = leaf(g, "P(Y | W=1, X)");
    fixtures_list.push_back({"gated_backdoor", fixtures::gated_backdoor_src(), t, std::move(g)});
  }
  {
    Ldag g = fixtures::label_severed();
    Formula t = leaf(g, "P(Y)");
    fixtures_list.push_back({"label_severed", fixtures::label_severed_src(), t, std::move(g)});
  }
  {
    Ldag g = fixtures::context_split_adjustment();
    Formula t = f_add({f_product({leaf(g, "P(Y | X, Z=0)"), leaf(g, "P(Z=0)")}),
                       f_product({leaf(g, "P(Y | Z=1)"), leaf(g, "P(Z=1)")})});
    fixtures_list.push_back(
        {"context_split_adjustment", fixtures::context_split_adjustment_src(), t, std::move(g)});
  }
  {
    Ldag g = fixtures::backfront_mix();
    int X = g.find_var("X"), W = g.find_var("W"), Z = g.find_var("Z");
    Formula adjust = f_product(
        {leaf(g, "P(A=1)"),
         f_sum(W, f_product({leaf(g, "P(Y | A=1, W, X)"), leaf(g, "P(W | A=1)")}))});
    Formula mediate = f_product(
        {leaf(g, "P(A=0)"),
         f_sum(Z, f_product({leaf(g, "P(Z | A=0, X)"),
                             f_sum(X, f_product({leaf(g, "P(Y | A=0, X, Z)"),
                                                 leaf(g, "P(X | A=0)")}))}))});
    fixtures_list.push_back({"backfront_mix", fixtures::backfront_mix_src(),
                             f_add({adjust, mediate}), std::move(g)});
  }
  {
    Ldag g = fixtures::context_backdoor_chain();
    Formula t = f_sum(g.find_var("Z"),
                      f_product({leaf(g, "P(Z | A=0)"), leaf(g, "P(Y | A=0, Z, X)")}));
    fixtures_list.push_back(
        {"context_backdoor_chain", fixtures::context_backdoor_chain_src(), t, std::move(g)});
  }

  bool pass = true;
  std::ostringstream detail;
  for (Fixture& fx : fixtures_list) {
    QuerySpec q = parse_query("P(Y | do(X))", fx.graph);
    IdentifyResult res = identify(fx.graph, q);
    bool ok = res.status == SearchStatus::Identified;
    double max_err = -1, target_gap = -1;
    bool stripped_na = false;
    if (ok) {
      VerifyReport check = verify_formula(fx.graph, res.formula, q, 200, 1e-9);
      max_err = check.max_error;
      target_gap =
          max_formula_gap(fx.graph, res.formula, fx.target, q.outcome | q.do_set, 200);
      Ldag bare = strip_labels(fx.graph);
      IdentifyResult na = identify(bare, q);
      stripped_na = na.status == SearchStatus::NotIdentifiable;
      ok = check.pass && target_gap < 1e-9 && stripped_na;
    }
    if (!ok) {
      pass = false;
      detail << fx.name << ": FAIL(err=" << max_err << ",gap=" << target_gap
             << ",stripped_na=" << stripped_na << ") ";
    }
  }
  double elapsed = seconds_since(start);
  detail << "time=" << elapsed << "s";
  report(2, "labeled-graph suite", pass && elapsed < 300.0, detail.str());
}

void criterion_3() {
  bool pass = true;
  std::ostringstream detail;

  for (const char* src : {fixtures::backdoor_src(), fixtures::frontdoor_src()}) {
    Ldag g = parse_ldag(src);
    QuerySpec q = parse_query("P(Y | do(X))", g);
    IdentifyResult res = identify(g, q);
    bool ok = res.status == SearchStatus::Identified;
    if (ok) {
      VerifyReport check = verify_formula(g, res.formula, q, 200, 1e-9);
      ok = check.pass;
      detail << "err=" << check.max_error << " ";
    }
    if (!ok) pass = false;
  }

  Ldag bow = fixtures::bow();
  QuerySpec q = parse_query("P(Y | do(X))", bow);
  IdentifyResult res = identify(bow, q);
  bool na = res.status == SearchStatus::NotIdentifiable;
  CounterexampleResult ce = counterexample_search(bow, q);
  detail << "bow_na=" << na << " counterexample=" << ce.found
         << " obs_gap=" << ce.obs_gap << " effect_gap=" << ce.effect_gap;
  if (!na || !ce.found) pass = false;

  report(3, "classic-graph coverage", pass, detail.str());
}

void criterion_4() {
  int disagreements = 0;
  int evaluated = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Ldag g = test_util::random_ldag(6, 0.5, 0.7, 1, seed);
    SeparationEngine eng(g);
    test_util::SplitMix rng(seed * 2654435761ull);
    for (int round = 0; round < 10; ++round) {
      VarSet y = var_bit(rng.below(6)), z = var_bit(rng.below(6));
      if (y & z) continue;
      VarSet cond = 0;
      Context ctx;
      if (int c = rng.below(6); !has_var(y | z, c)) cond |= var_bit(c);
      if (int c = rng.below(6); !has_var(y | z | cond, c) && rng.below(2)) ctx.set(c, rng.below(2));
      VarSet pool = g.all_vars() & ~(y | z | cond | ctx.mask);
      if (set_size(pool) < 2) continue;
      std::vector<int> pv(vars_of(pool).begin(), vars_of(pool).end());
      VarSet c_set = var_bit(pv[rng.below(static_cast<int>(pv.size()))]) |
                     var_bit(pv[rng.below(static_cast<int>(pv.size()))]);

      CsiQuery q{y, z, cond, ctx};
      bool via_reps = true;
      for (const Context& rep : eng.representatives(c_set, q.ctx)) {
        CsiQuery split = q;
        split.ctx = q.ctx.merged(rep);
        if (!eng.csi_separated(split)) {
          via_reps = false;
          break;
        }
      }
      bool via_all = true;
      std::vector<int> cs(vars_of(c_set).begin(), vars_of(c_set).end());
      for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << cs.size()); ++bits) {
        CsiQuery split = q;
        Context c;
        for (size_t k = 0; k < cs.size(); ++k) c.set(cs[k], (bits >> k) & 1);
        split.ctx = q.ctx.merged(c);
        if (!eng.csi_separated(split)) {
          via_all = false;
          break;
        }
      }
      ++evaluated;
      if (via_reps != via_all) ++disagreements;
    }
  }
  std::ostringstream detail;
  detail << "queries=" << evaluated << " disagreements=" << disagreements;
  report(4, "representative-context equivalence", disagreements == 0 && evaluated > 500,
         detail.str());
}

void criterion_5() {
  int confirmed = 0, violations = 0;
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Ldag g = test_util::random_ldag(6, 0.5, 0.7, 1, seed);
    SeparationEngine eng(g);
    std::vector<DiscreteTable> joints;
    test_util::SplitMix rng(seed * 11400714819323198485ull);
    for (int round = 0; round < 12; ++round) {
      VarSet y = var_bit(rng.below(6)), z = var_bit(rng.below(6));
      if (y & z) continue;
      VarSet cond = 0;
      Context ctx;
      if (int c = rng.below(6); !has_var(y | z, c)) cond |= var_bit(c);
      if (int c = rng.below(6); !has_var(y | z | cond, c) && rng.below(2))
        ctx.set(c, rng.below(2));
      CsiQuery q{y, z, cond, ctx};
      if (!eng.csi_holds(q)) continue;
      if (joints.empty())
        for (std::uint64_t m = 1; m <= 100; ++m)
          joints.push_back(joint_distribution(random_model(g, seed * 4096 + m)));
      ++confirmed;
      for (const DiscreteTable& joint : joints) {
        double dev = csi_deviation(joint, q);
        worst = std::max(worst, dev);
        if (dev > 1e-9) ++violations;
      }
    }
  }
  std::ostringstream detail;
  detail << "verdicts=" << confirmed << " violations=" << violations << " worst=" << worst;
  report(5, "separation soundness", violations == 0 && confirmed > 50, detail.str());
}

void criterion_6() {
  // For each rule, at least 1000 random (model, instantiation) pairs whose
  // output matches the defining arithmetic within 1e-9.
  const int kNeed = 1000;
  struct Counter {
    int checked = 0;
    int failed = 0;
  };
  Counter c1, c2, c3, c4, c5, c6, c7, c8;

  std::vector<Ldag> graphs;
  graphs.push_back(fixtures::switch_confounder());
  graphs.push_back(fixtures::context_split_adjustment());
  for (std::uint64_t s = 1; s <= 4; ++s) graphs.push_back(test_util::random_ldag(5, 0.5, 0.7, 1, s));
  std::vector<Ldag> augmented;
  for (const Ldag& g : graphs)
    augmented.push_back(augment_with_interventions(label_closure(g), g.observed_vars()));

  auto random_term_over = [](const Ldag& g, VarSet allowed, test_util::SplitMix& rng) {
    for (;;) {
      Term t;
      for (int v : vars_of(allowed)) switch (rng.below(6)) {
          case 0:
            t.jg |= var_bit(v);
            break;
          case 1:
            t.ja.set(v, rng.below(2));
            break;
          case 2:
            t.cg |= var_bit(v);
            break;
          case 3:
            t.ca.set(v, rng.below(2));
            break;
          default:
            break;
        }
      if (t.valid() && t.joint_vars() != 0) return t;
    }
  };

  auto gap_all_bindings = [](const DiscreteTable& joint, const Term& out, auto&& expected) {
    std::vector<int> vars(vars_of(out.general_vars()).begin(),
                          vars_of(out.general_vars()).end());
    double worst = 0;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << vars.size()); ++bits) {
      Context b;
      for (size_t k = 0; k < vars.size(); ++k) b.set(vars[k], (bits >> k) & 1);
      worst = std::max(worst, std::abs(eval_term(joint, out, b) - expected(b)));
    }
    return worst;
  };
  auto tally = [](Counter& c, double gap) {
    ++c.checked;
    if (gap > 1e-9) ++c.failed;
  };

  test_util::SplitMix rng(271828);
  int spins = 0;
  while ((c1.checked < kNeed || c2.checked < kNeed || c3.checked < kNeed ||
          c4.checked < kNeed || c5.checked < kNeed || c6.checked < kNeed ||
          c7.checked < kNeed || c8.checked < kNeed) &&
         spins < 1000000) {
    ++spins;
    size_t gi = rng.below(static_cast<int>(augmented.size()));
    const Ldag& ag = augmented[gi];
    SeparationEngine eng(ag);
    DiscreteModel m = random_model(ag, 1000 + spins % 23);
    DiscreteTable joint = joint_distribution(m);
    // Keep terms over the base variables so every role is exercised.
    Term t = random_term_over(ag, graphs[gi].all_vars(), rng);

    // Rule 1: insertion first, deletion of the inserted piece after.
    if (c1.checked < kNeed) {
      VarSet outside = ag.all_vars() & ~t.all_vars();
      if (outside) {
        int pick = rng.below(set_size(outside));
        int v = 0;
        for (int u : vars_of(outside))
          if (pick-- == 0) v = u;
        VarSet zg = 0;
        Context za;
        bool is_switch = ag.var(v).is_intervention();
        if (is_switch || rng.below(2))
          za.set(v, is_switch ? 1 : rng.below(2));
        else
          zg = var_bit(v);
        CsiQuery cond = r1_condition(t, zg, za);
        if (cond.well_formed() && eng.csi_holds(cond)) {
          Term in = *r1_insert(t, zg, za);
          double gap = gap_all_bindings(joint, in, [&](const Context& b) {
            Context bb = b;
            // the inserted general variable may need a value on the parent
            return eval_term(joint, t, bb);
          });
          tally(c1, gap);
        }
      }
    }

    if (t.jg != 0 && c2.checked < kNeed) {
      int v = lowest_var(t.jg);
      if (auto out = r2_marginalize(t, var_bit(v))) {
        double gap = gap_all_bindings(joint, *out, [&](const Context& b) {
          Context b0 = b, b1 = b;
          b0.set(v, 0);
          b1.set(v, 1);
          return eval_term(joint, t, b0) + eval_term(joint, t, b1);
        });
        tally(c2, gap);
      }
    }

    if (t.jg != 0 && c3.checked < kNeed) {
      VarSet zg = set_size(t.jg) > 1 ? var_bit(lowest_var(t.jg)) : 0;
      if (auto out = r3_condition(t, zg)) {
        double gap = gap_all_bindings(joint, *out, [&](const Context& b) {
          std::vector<int> rest(vars_of(out->jg).begin(), vars_of(out->jg).end());
          double den = 0;
          for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << rest.size()); ++bits) {
            Context bb = b;
            for (size_t k = 0; k < rest.size(); ++k) bb.set(rest[k], (bits >> k) & 1);
            den += eval_term(joint, t, bb);
          }
          return eval_term(joint, t, b) / den;
        });
        tally(c3, gap);
      }
    }

    if (t.cond_vars() != 0 && c4.checked < kNeed) {
      Term t2;
      t2.jg = t.cg;
      t2.ja = t.ca;
      if (t2.joint_vars() != 0) {
        if (auto out = r4_combine(t, t2)) {
          double gap = gap_all_bindings(joint, *out, [&](const Context& b) {
            return eval_term(joint, t, b) * eval_term(joint, t2, b);
          });
          tally(c4, gap);
        }
      }
    }

    if (t.ja.mask != 0) {
      int v = lowest_var(t.ja.mask);
      Term general = t;
      general.ja.erase(v);
      if (general.joint_vars() != 0 && c5.checked < kNeed) {
        if (auto out = r5_complement(general, t, v)) {
          double gap = gap_all_bindings(joint, *out, [&](const Context& b) {
            return eval_term(joint, general, b) - eval_term(joint, t, b);
          });
          tally(c5, gap);
        }
      }
      if (c6.checked < kNeed) {
        Term other = t;
        other.ja.set(v, 1 - t.ja.value(v));
        const Term& t0 = t.ja.value(v) == 0 ? t : other;
        const Term& t1 = t.ja.value(v) == 0 ? other : t;
        if (auto merged = r6_merge(t0, t1, v)) {
          double gap = gap_all_bindings(joint, *merged, [&](const Context& b) {
            return eval_term(joint, b.value(v) == 0 ? t0 : t1, b);
          });
          tally(c6, gap);
        }
      }
    }
    if (t.jg == 0 && set_size(t.ja.mask) == 1 && c5.checked < kNeed) {
      if (auto self = r5_self(t)) {
        double gap = gap_all_bindings(joint, *self, [&](const Context& b) {
          return 1.0 - eval_term(joint, t, b);
        });
        tally(c5, gap);
      }
    }

    if (t.jg != 0 && c7.checked < kNeed) {
      int v = lowest_var(t.jg);
      int val = rng.below(2);
      Term out = *r7_instantiate(t, v, val);
      double gap = gap_all_bindings(joint, out, [&](const Context& b) {
        Context bb = b;
        bb.set(v, val);
        return eval_term(joint, t, bb);
      });
      tally(c7, gap);
    }
    if (t.cg != 0 && c8.checked < kNeed) {
      int v = lowest_var(t.cg);
      int val = rng.below(2);
      Term out = *r8_instantiate(t, v, val);
      double gap = gap_all_bindings(joint, out, [&](const Context& b) {
        Context bb = b;
        bb.set(v, val);
        return eval_term(joint, t, bb);
      });
      tally(c8, gap);
    }
  }

  std::ostringstream detail;
  bool pass = true;
  const Counter* all[] = {&c1, &c2, &c3, &c4, &c5, &c6, &c7, &c8};
  for (int i = 0; i < 8; ++i) {
    detail << "r" << (i + 1) << "=" << all[i]->checked << "/" << all[i]->failed << " ";
    if (all[i]->checked < kNeed || all[i]->failed > 0) pass = false;
  }
  report(6, "per-rule equalities", pass, detail.str());
}

void criterion_7() {
  BenchConfig cfg;
  cfg.node_counts = {7};
  cfg.instances = 100;
  cfg.timeout_sec = 1800.0;
  cfg.seed = 1;
  cfg.jobs = env_jobs();
  auto start = std::chrono::steady_clock::now();
  std::vector<BenchRow> rows = run_bench(cfg);

  std::vector<double> combined, full_cs;
  int terminal_combined = 0;
  for (const BenchRow& r : rows) {
    if (r.mode == "combined") {
      combined.push_back(r.wall_ms);
      if (r.status != "limit") ++terminal_combined;
    } else {
      full_cs.push_back(r.wall_ms);
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v.empty() ? 0.0 : v[v.size() / 2];
  };
  double med_combined = median(combined), med_full = median(full_cs);
  bool pass = terminal_combined >= 60 && med_combined < med_full;
  std::ostringstream detail;
  detail << "terminal=" << terminal_combined << "/100 median_combined=" << med_combined
         << "ms median_full_cs=" << med_full << "ms time=" << seconds_since(start) << "s";
  report(7, "benchmark ordering", pass, detail.str());
}

void criterion_8() {
  std::vector<std::pair<const char*, const char*>> cases = {
      {"switch_confounder", fixtures::switch_confounder_src()},
      {"gated_backdoor", fixtures::gated_backdoor_src()},
      {"label_severed", fixtures::label_severed_src()},
      {"context_split_adjustment", fixtures::context_split_adjustment_src()},
      {"backfront_mix", fixtures::backfront_mix_src()},
      {"context_backdoor_chain", fixtures::context_backdoor_chain_src()},
      {"backdoor", fixtures::backdoor_src()},
      {"frontdoor", fixtures::frontdoor_src()},
  };
  bool pass = true;
  std::ostringstream detail;
  for (auto [name, src] : cases) {
    Ldag g = parse_ldag(src);
    QuerySpec q = parse_query("P(Y | do(X))", g);
    IdentifyResult a = identify(g, q);
    IdentifyResult b = identify(g, q);
    bool same = a.status == b.status;
    if (a.status == SearchStatus::Identified && same) {
      same = render(a.formula, a.graph) == render(b.formula, b.graph) &&
             a.derivation.to_lines(a.graph) == b.derivation.to_lines(b.graph) &&
             a.derivation.to_dot(a.graph) == b.derivation.to_dot(b.graph);
    }
    if (!same) {
      pass = false;
      detail << name << " diverged ";
    }
  }
  report(8, "derivation determinism", pass, detail.str());
}

}  // namespace

int main() {
  auto start = std::chrono::steady_clock::now();
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  std::cout << (failures == 0 ? "all criteria passed" : "criteria failed") << " in "
            << seconds_since(start) << "s" << std::endl;
  return failures == 0 ? 0 : 1;
}
