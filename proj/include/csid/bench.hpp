#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "csid/search.hpp"

namespace csid {

struct BenchConfig {
  std::vector<int> node_counts = {7, 8, 9};
  double avg_degree = 3.0;
  double label_prob = 0.5;
  int latent_count = 2;
  int instances = 100;
  double timeout_sec = 1800.0;
  std::uint64_t seed = 1;
  bool require_path = false;  // constrain the query to Y a descendant of X
  int jobs = 1;
};

// "n=7,instances=100,seed=1,..." (keys: n, instances, seed, avg_degree,
// label_prob, latents, timeout, require_path, jobs).
BenchConfig parse_bench_config(std::string_view text);

struct BenchInstance {
  Ldag graph;
  QuerySpec query;
};

// Random LDAG plus a P(Y | do(X)) query over two observed nodes. Edges are
// forward edges of a fixed order, each present with probability
// avg_degree/(n-1); labeled edges draw one entry over their co-parents with
// non-regular draws rejected.
BenchInstance random_instance(int n, double avg_degree, double label_prob, int latent_count,
                              bool require_path, std::uint64_t seed);

struct BenchRow {
  std::uint64_t seed;
  int n;
  std::string mode;  // "combined" or "full_cs"
  std::string status;
  double wall_ms;
  std::uint64_t expansions;
  std::uint64_t csi_checks;
};

// Runs every (instance, mode) pair and emits sorted CSV rows; the header is
// always written. Instances run on a worker pool of config.jobs threads.
std::vector<BenchRow> run_bench(const BenchConfig& config);
void write_csv(const std::vector<BenchRow>& rows, std::ostream& out);

}  // namespace csid
