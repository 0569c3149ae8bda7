#include "csid/bench.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace csid {

namespace {

struct SplitMix {
  std::uint64_t state;
  explicit SplitMix(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
};

}  // namespace

BenchConfig parse_bench_config(std::string_view text) {
  BenchConfig cfg;
  size_t start = 0;
  bool n_given = false;
  while (start < text.size()) {
    size_t end = text.find(',', start);
    std::string_view item =
        text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = end == std::string_view::npos ? text.size() : end + 1;
    if (item.empty()) continue;
    size_t eq = item.find('=');
    if (eq == std::string_view::npos) throw Error("bench config item needs key=value");
    std::string key(item.substr(0, eq));
    std::string value(item.substr(eq + 1));
    try {
      if (key == "n") {
        cfg.node_counts = {std::stoi(value)};
        n_given = true;
      } else if (key == "instances") {
        cfg.instances = std::stoi(value);
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "avg_degree") {
        cfg.avg_degree = std::stod(value);
      } else if (key == "label_prob") {
        cfg.label_prob = std::stod(value);
      } else if (key == "latents") {
        cfg.latent_count = std::stoi(value);
      } else if (key == "timeout") {
        cfg.timeout_sec = std::stod(value);
      } else if (key == "require_path") {
        cfg.require_path = std::stoi(value) != 0;
      } else if (key == "jobs") {
        cfg.jobs = std::stoi(value);
      } else {
        throw Error("unknown bench config key: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw Error("bad bench config value for " + key);
    }
  }
  (void)n_given;
  if (cfg.instances < 0 || cfg.latent_count < 0 || cfg.jobs < 1)
    throw Error("bench config out of range");
  return cfg;
}

BenchInstance random_instance(int n, double avg_degree, double label_prob, int latent_count,
                              bool require_path, std::uint64_t seed) {
  if (n < 3) throw Error("bench graphs need at least 3 nodes");
  if (latent_count > n - 2) throw Error("too many latents");
  SplitMix rng(mix64(seed ^ 0x8c9f3b1a2d4e5f60ull));
  double p = avg_degree / (n - 1);

  for (int attempt = 0; attempt < 1000; ++attempt) {
    // Forward edges over a fixed topological order.
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.uniform() < p) edges.push_back({i, j});

    std::vector<VarSet> parents(n, 0);
    for (auto [t, h] : edges) parents[h] |= var_bit(t);

    // Query nodes, then latents among the rest.
    int x = rng.below(n);
    int y = rng.below(n);
    if (x == y) continue;
    std::vector<int> others;
    for (int v = 0; v < n; ++v)
      if (v != x && v != y) others.push_back(v);
    VarSet latent = 0;
    for (int k = 0; k < latent_count; ++k) {
      int pick = rng.below(static_cast<int>(others.size()));
      latent |= var_bit(others[pick]);
      others.erase(others.begin() + pick);
    }

    Ldag::Builder b;
    for (int v = 0; v < n; ++v)
      b.add_var("V" + std::to_string(v), !has_var(latent, v));
    for (auto [t, h] : edges) b.add_edge(t, h);

    // One entry per labeled edge, drawn over the co-parents; a draw with
    // every position wild would make the edge vacuous and is redrawn.
    for (auto [t, h] : edges) {
      VarSet domain = parents[h] & ~var_bit(t);
      if (domain == 0 || rng.uniform() >= label_prob) continue;
      for (int tries = 0; tries < 32; ++tries) {
        VarSet fixed = 0, values = 0;
        for (int d : vars_of(domain)) {
          switch (rng.below(3)) {
            case 0:
              fixed |= var_bit(d);
              break;
            case 1:
              fixed |= var_bit(d);
              values |= var_bit(d);
              break;
            default:
              break;  // wildcard
          }
        }
        if (fixed == 0) continue;  // covers everything
        b.add_label_entry(t, h, fixed, values);
        break;
      }
    }

    Ldag g = b.build(true);
    if (require_path && !has_var(g.descendants_of(var_bit(x)), y)) continue;

    BenchInstance inst{std::move(g), {}};
    inst.query.outcome = var_bit(y);
    inst.query.do_set = var_bit(x);
    return inst;
  }
  throw Error("could not sample a bench instance");
}

std::vector<BenchRow> run_bench(const BenchConfig& config) {
  struct Task {
    int n;
    std::uint64_t seed;
    bool full_cs;
  };
  std::vector<Task> tasks;
  for (int n : config.node_counts)
    for (int i = 0; i < config.instances; ++i) {
      std::uint64_t seed = config.seed + static_cast<std::uint64_t>(i);
      tasks.push_back({n, seed, false});
      tasks.push_back({n, seed, true});
    }

  std::vector<BenchRow> rows(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      BenchInstance inst =
          random_instance(task.n, config.avg_degree, config.label_prob, config.latent_count,
                          config.require_path, task.seed * 1315423911ull + task.n);
      SearchOptions opts;
      opts.limits.timeout_sec = config.timeout_sec;
      opts.full_context_split = task.full_cs;
      IdentifyResult res = identify(inst.graph, inst.query, opts);
      const char* status = res.status == SearchStatus::Identified       ? "identified"
                           : res.status == SearchStatus::NotIdentifiable ? "na"
                                                                         : "limit";
      rows[i] = BenchRow{task.seed,           task.n,
                         task.full_cs ? "full_cs" : "combined",
                         status,              res.stats.wall_ms,
                         res.stats.expansions, res.stats.csi_checks};
    }
  };

  int width = std::max(1, config.jobs);
  std::vector<std::thread> pool;
  for (int t = 0; t < width - 1; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tie(a.n, a.seed, a.mode) < std::tie(b.n, b.seed, b.mode);
  });
  return rows;
}

void write_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "seed,n,mode,status,wall_ms,expansions,csi_checks\n";
  for (const BenchRow& r : rows)
    out << r.seed << "," << r.n << "," << r.mode << "," << r.status << "," << r.wall_ms << ","
        << r.expansions << "," << r.csi_checks << "\n";
}

}  // namespace csid
