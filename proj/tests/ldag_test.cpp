#include "csid/ldag.hpp"

#include "doctest.h"
#include "fixtures.hpp"
#include "test_util.hpp"

using namespace csid;

namespace {

VarSet mask_of(const Ldag& g, std::initializer_list<const char*> names) {
  VarSet s = 0;
  for (const char* n : names) {
    int v = g.find_var(n);
    REQUIRE(v >= 0);
    s |= var_bit(v);
  }
  return s;
}

Context ctx_of(const Ldag& g, std::initializer_list<std::pair<const char*, int>> items) {
  Context c;
  for (auto [n, val] : items) c.set(g.find_var(n), val);
  return c;
}

bool same_edges(const std::vector<VarSet>& a, const std::vector<VarSet>& b) { return a == b; }

}  // namespace

TEST_CASE("parser reads the switch-confounder graph") {
  Ldag g = fixtures::switch_confounder();
  CHECK(g.var_count() == 4);
  CHECK(g.edges().size() == 5);
  int labeled = 0;
  for (const LdagEdge& e : g.edges())
    if (!e.label.empty()) ++labeled;
  CHECK(labeled == 2);
  CHECK(g.var(g.find_var("L")).observed == false);
  CHECK(set_size(g.observed_vars()) == 3);

  // The label on X -> Y mentions exactly {A, L}.
  const LdagEdge& xy = g.edges()[g.edge_index(g.find_var("X"), g.find_var("Y"))];
  CHECK(g.label_domain(xy) == mask_of(g, {"A", "L"}));
  REQUIRE(xy.label.size() == 1);
  CHECK(xy.label[0].fixed == mask_of(g, {"A"}));
  CHECK(xy.label[0].values == mask_of(g, {"A"}));
}

TEST_CASE("single node graph parses") {
  Ldag g = parse_ldag("node X\n");
  CHECK(g.var_count() == 1);
  CHECK(g.edges().empty());
}

TEST_CASE("parser reports errors") {
  CHECK_THROWS_WITH_AS(parse_ldag("node X\nnode Y\nX -> Y\nY -> X\n"),
                       doctest::Contains("cycle"), ParseError);
  CHECK_THROWS_WITH_AS(parse_ldag("node X\nnod Y\n"), doctest::Contains("expected"),
                       ParseError);
  // Label mentioning a non-co-parent.
  CHECK_THROWS_WITH_AS(parse_ldag("node X\nnode Y\nnode Z\nX -> Y [Z=0]\n"),
                       doctest::Contains("co-parent"), ParseError);
  // Label whose entries cover every co-parent assignment.
  CHECK_THROWS_WITH_AS(
      parse_ldag("node X\nnode Y\nnode A\nA -> Y\nX -> Y [A=0; A=1]\n"),
      doctest::Contains("regularity"), ParseError);
  CHECK_THROWS_WITH_AS(parse_ldag("node X\nnode X\n"), doctest::Contains("duplicate"),
                       ParseError);
  CHECK_THROWS_WITH_AS(parse_ldag("node I_X\n"), doctest::Contains("reserved"), ParseError);
  CHECK_THROWS_WITH_AS(parse_ldag("node X\nnode Y\nnode A\nA -> Y\nX -> Y [A=0, A=1]\n"),
                       doctest::Contains("twice"), ParseError);
  // Entry must mention every co-parent.
  CHECK_THROWS_WITH_AS(
      parse_ldag("node X\nnode Y\nnode A\nnode B\nA -> Y\nB -> Y\nX -> Y [A=0]\n"),
      doctest::Contains("every co-parent"), ParseError);
  CHECK_THROWS_WITH_AS(parse_ldag("node X\nnode Y\nX -> Y\nX -> Y\n"),
                       doctest::Contains("duplicate edge"), ParseError);
}

TEST_CASE("parse error carries position") {
  try {
    parse_ldag("node X\nnode Y\nX - Y\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
    CHECK(e.column > 0);
  }
}

TEST_CASE("context projection drops the advertised edges") {
  Ldag g = fixtures::switch_confounder();
  int A = g.find_var("A"), X = g.find_var("X"), Y = g.find_var("Y"), L = g.find_var("L");

  std::vector<VarSet> base = g.context_dag(Context());
  for (int v = 0; v < 4; ++v) CHECK(base[v] == g.parents(v));

  // A=1 removes X -> Y and nothing else.
  std::vector<VarSet> a1 = g.context_dag(ctx_of(g, {{"A", 1}}));
  CHECK(a1[Y] == (g.parents(Y) & ~var_bit(X)));
  CHECK(a1[X] == g.parents(X));

  // A=0 removes L -> X and nothing else.
  std::vector<VarSet> a0 = g.context_dag(ctx_of(g, {{"A", 0}}));
  CHECK(a0[X] == (g.parents(X) & ~var_bit(L)));
  CHECK(a0[Y] == g.parents(Y));
  CHECK(A >= 0);
}

TEST_CASE("projection properties on random graphs") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    Ldag g = test_util::random_ldag(5, 0.5, 0.7, 1, seed);
    test_util::SplitMix rng(seed * 977);
    Context ctx;
    for (int v = 0; v < g.var_count(); ++v)
      if (rng.below(3) == 0) ctx.set(v, rng.below(2));

    // Matches the expansion-based reference.
    std::vector<VarSet> fast = g.context_dag(ctx);
    CHECK(same_edges(fast, test_util::brute_context_dag(g, ctx)));

    // Projection only ever removes edges.
    for (int v = 0; v < g.var_count(); ++v) CHECK((fast[v] & ~g.parents(v)) == 0);

    // Extending the context on label-free variables changes nothing.
    VarSet in_labels = 0;
    for (const LdagEdge& e : g.edges())
      if (!e.label.empty()) in_labels |= g.label_domain(e);
    Context extended = ctx;
    for (int v = 0; v < g.var_count(); ++v)
      if (!has_var(in_labels, v) && !ctx.assigns(v)) extended.set(v, 1);
    CHECK(same_edges(fast, g.context_dag(extended)));
  }
}

TEST_CASE("empty context removes nothing on a regular graph") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Ldag g = test_util::random_ldag(5, 0.5, 0.7, 1, seed);
    std::vector<VarSet> pa = g.context_dag(Context());
    for (int v = 0; v < g.var_count(); ++v) CHECK(pa[v] == g.parents(v));
  }
}

TEST_CASE("intervention augmentation rewrites labels") {
  Ldag g = fixtures::switch_confounder();
  Ldag ag = augment_with_interventions(g, mask_of(g, {"X"}));

  int ix = ag.find_var("I_X");
  REQUIRE(ix >= 0);
  CHECK(ag.var(ix).observed);
  CHECK(ag.var(ix).intervention_base == ag.find_var("X"));
  CHECK(ag.intervention_node_of(ag.find_var("X")) == ix);
  CHECK(ag.var_count() == 5);
  CHECK(ag.edges().size() == 6);

  // L -> X now reads: A=0 with the switch anywhere, or switch=1 anywhere.
  const LdagEdge& lx = ag.edges()[ag.edge_index(ag.find_var("L"), ag.find_var("X"))];
  REQUIRE(lx.label.size() == 2);
  VarSet a = var_bit(ag.find_var("A")), i = var_bit(ix);
  CHECK(((lx.label[0].fixed == a && lx.label[0].values == 0 && lx.label[1].fixed == i &&
          lx.label[1].values == i) ||
         (lx.label[1].fixed == a && lx.label[1].values == 0 && lx.label[0].fixed == i &&
          lx.label[0].values == i)));

  // A -> X was unlabeled and now carries only the switch entry.
  const LdagEdge& ax = ag.edges()[ag.edge_index(ag.find_var("A"), ag.find_var("X"))];
  REQUIRE(ax.label.size() == 1);
  CHECK(ax.label[0].fixed == i);
  CHECK(ax.label[0].values == i);

  // X -> Y (an edge into an unaugmented head) is untouched.
  const LdagEdge& xy = ag.edges()[ag.edge_index(ag.find_var("X"), ag.find_var("Y"))];
  CHECK(xy.label.size() == 1);

  // Projecting onto switch=1 removes every incoming edge of X but the
  // switch itself.
  Context on;
  on.set(ix, 1);
  std::vector<VarSet> dag = ag.context_dag(on);
  CHECK(dag[ag.find_var("X")] == var_bit(ix));
}

TEST_CASE("augmentation with no targets is the identity") {
  Ldag g = fixtures::switch_confounder();
  CHECK(augment_with_interventions(g, 0) == g);
}

TEST_CASE("augmenting a parentless node only adds the switch") {
  Ldag g = parse_ldag("node X\nnode Y\nX -> Y\n");
  Ldag ag = augment_with_interventions(g, var_bit(g.find_var("X")));
  CHECK(ag.var_count() == 3);
  CHECK(ag.edges().size() == 2);
  for (const LdagEdge& e : ag.edges())
    if (e.head == ag.find_var("Y")) CHECK(e.label.empty());
}

TEST_CASE("switch-context property holds on random graphs") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    Ldag g = test_util::random_ldag(5, 0.5, 0.6, 1, seed);
    Ldag ag = augment_with_interventions(g, g.observed_vars());
    for (int x : vars_of(g.observed_vars())) {
      int ix = ag.intervention_node_of(x);
      Context on;
      on.set(ix, 1);
      std::vector<VarSet> dag = ag.context_dag(on);
      CHECK(dag[x] == var_bit(ix));
      CHECK(same_edges(dag, test_util::brute_context_dag(ag, on)));
    }
  }
}

TEST_CASE("label closure leaves a maximal graph unchanged") {
  Ldag g = fixtures::switch_confounder();
  CHECK(label_closure(g) == g);
}

TEST_CASE("label closure completes an implied entry") {
  // Y has parents A and B. The entry A=0 on B -> Y covers both B rows and
  // the entries on A -> Y cover both A rows, so all four CPT rows of Y
  // collapse into one class and A=1 on B -> Y follows.
  Ldag::Builder b;
  int a = b.add_var("A", true);
  int bb = b.add_var("B", true);
  int y = b.add_var("Y", true);
  b.add_edge(a, y);
  b.add_edge(bb, y);
  b.add_label_entry(bb, y, var_bit(a), 0);           // A=0
  b.add_label_entry(a, y, var_bit(bb), 0);           // B=0
  b.add_label_entry(a, y, var_bit(bb), var_bit(bb)); // B=1
  Ldag g = b.build(false);  // intentionally not regular

  Ldag closed = label_closure(g);
  const LdagEdge& by = closed.edges()[closed.edge_index(bb, y)];
  bool has_a1 = false;
  for (const LabelEntry& e : by.label)
    if (e.fixed == var_bit(a) && e.values == var_bit(a)) has_a1 = true;
  CHECK(has_a1);
}

TEST_CASE("label closure without labels is the identity") {
  Ldag g = fixtures::bow();
  CHECK(label_closure(g) == g);
}

TEST_CASE("label closure is idempotent and only adds") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Ldag g = test_util::random_ldag(5, 0.6, 0.8, 1, seed);
    Ldag once = label_closure(g);
    Ldag twice = label_closure(once);
    CHECK(once == twice);
    for (const LdagEdge& e : g.edges()) {
      const LdagEdge& ce = once.edges()[once.edge_index(e.tail, e.head)];
      for (const LabelEntry& entry : e.label)
        CHECK(std::find(ce.label.begin(), ce.label.end(), entry) != ce.label.end());
    }
  }
}

TEST_CASE("render and parse round-trip") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Ldag g = test_util::random_ldag(6, 0.5, 0.7, 2, seed);
    Ldag back = parse_ldag(g.render());
    CHECK(back == g);
    CHECK(back.render() == g.render());
  }
  Ldag g = fixtures::backfront_mix();
  CHECK(parse_ldag(g.render()) == g);
}

TEST_CASE("cover counting agrees with expansion") {
  test_util::SplitMix rng(4242);
  for (int round = 0; round < 200; ++round) {
    int dn = 1 + rng.below(4);
    VarSet domain = full_set(dn);
    std::vector<LabelEntry> entries;
    int m = 1 + rng.below(3);
    for (int e = 0; e < m; ++e) {
      VarSet fixed = 0, values = 0;
      for (int d = 0; d < dn; ++d) switch (rng.below(3)) {
          case 0:
            fixed |= var_bit(d);
            break;
          case 1:
            fixed |= var_bit(d);
            values |= var_bit(d);
            break;
          default:
            break;
        }
      entries.push_back({fixed, values});
    }
    Context ctx;
    for (int d = 0; d < dn; ++d)
      if (rng.below(3) == 0) ctx.set(d, rng.below(2));

    std::uint64_t brute = 0;
    VarSet free = domain & ~ctx.mask;
    std::vector<int> fv(vars_of(free).begin(), vars_of(free).end());
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << fv.size()); ++bits) {
      Context assign = ctx;
      for (size_t k = 0; k < fv.size(); ++k) assign.set(fv[k], (bits >> k) & 1);
      for (const LabelEntry& e : entries)
        if (e.covers(assign)) {
          ++brute;
          break;
        }
    }
    CHECK(Ldag::covered_count(entries, domain, ctx) == brute);
  }
}
