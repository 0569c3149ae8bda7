#include "csid/bench.hpp"

#include <sstream>

#include "doctest.h"
#include "test_util.hpp"

using namespace csid;

TEST_CASE("bench config parsing") {
  BenchConfig d = parse_bench_config("");
  CHECK(d.node_counts == std::vector<int>{7, 8, 9});
  CHECK(d.instances == 100);
  CHECK(d.avg_degree == doctest::Approx(3.0));
  CHECK(d.label_prob == doctest::Approx(0.5));
  CHECK(d.latent_count == 2);
  CHECK(d.timeout_sec == doctest::Approx(1800.0));

  BenchConfig c = parse_bench_config("n=7,instances=5,seed=9,label_prob=0.25,jobs=2");
  CHECK(c.node_counts == std::vector<int>{7});
  CHECK(c.instances == 5);
  CHECK(c.seed == 9);
  CHECK(c.label_prob == doctest::Approx(0.25));
  CHECK(c.jobs == 2);

  CHECK_THROWS_AS(parse_bench_config("bogus=1"), Error);
  CHECK_THROWS_AS(parse_bench_config("n"), Error);
  CHECK_THROWS_AS(parse_bench_config("jobs=0"), Error);
}

TEST_CASE("random instances are deterministic and well-formed") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    BenchInstance a = random_instance(7, 3.0, 0.5, 2, false, seed);
    BenchInstance b = random_instance(7, 3.0, 0.5, 2, false, seed);
    CHECK(a.graph == b.graph);
    CHECK(a.query.outcome == b.query.outcome);
    CHECK(a.query.do_set == b.query.do_set);

    CHECK(a.graph.var_count() == 7);
    CHECK(set_size(a.graph.latent_vars()) == 2);
    // Query nodes are observed and distinct.
    CHECK((a.query.outcome & a.graph.observed_vars()) == a.query.outcome);
    CHECK((a.query.do_set & a.graph.observed_vars()) == a.query.do_set);
    CHECK((a.query.outcome & a.query.do_set) == 0);
  }
  // Different seeds vary the draw.
  CHECK(!(random_instance(7, 3.0, 0.5, 2, false, 1).graph ==
          random_instance(7, 3.0, 0.5, 2, false, 2).graph));
}

TEST_CASE("path-constrained instances have a directed route") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    BenchInstance inst = random_instance(7, 3.0, 0.5, 2, true, seed);
    int x = lowest_var(inst.query.do_set);
    CHECK(has_var(inst.graph.descendants_of(var_bit(x)), lowest_var(inst.query.outcome)));
  }
}

TEST_CASE("bench rows come out sorted with the fixed schema") {
  BenchConfig cfg = parse_bench_config("n=5,instances=2,seed=3,timeout=120,jobs=2");
  std::vector<BenchRow> rows = run_bench(cfg);
  REQUIRE(rows.size() == 4);  // two instances, two modes
  for (size_t i = 1; i < rows.size(); ++i)
    CHECK(std::tie(rows[i - 1].n, rows[i - 1].seed, rows[i - 1].mode) <=
          std::tie(rows[i].n, rows[i].seed, rows[i].mode));
  for (const BenchRow& r : rows) {
    CHECK((r.mode == "combined" || r.mode == "full_cs"));
    CHECK((r.status == "identified" || r.status == "na" || r.status == "limit"));
  }

  std::ostringstream csv;
  write_csv(rows, csv);
  CHECK(csv.str().rfind("seed,n,mode,status,wall_ms,expansions,csi_checks\n", 0) == 0);
}

TEST_CASE("zero instances produce a header-only CSV") {
  BenchConfig cfg = parse_bench_config("n=5,instances=0");
  std::vector<BenchRow> rows = run_bench(cfg);
  CHECK(rows.empty());
  std::ostringstream csv;
  write_csv(rows, csv);
  CHECK(csv.str() == "seed,n,mode,status,wall_ms,expansions,csi_checks\n");
}
