// csid — identifies causal effects from observational data over labeled
// DAGs, with identification search, numeric verification, and a benchmark
// harness. See README.md for the graph DSL and examples.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "csid/bench.hpp"
#include "csid/oracle.hpp"
#include "csid/search.hpp"

namespace {

constexpr int kExitIdentified = 0;
constexpr int kExitNotIdentified = 1;
constexpr int kExitLimit = 2;
constexpr int kExitUsage = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw csid::Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw csid::Error("cannot write " + path);
  out << content;
}

double default_timeout() {
  if (const char* env = std::getenv("CSID_TIMEOUT")) {
    char* end = nullptr;
    double v = std::strtod(env, &end);
    if (end != env && v > 0) return v;
  }
  return 1800.0;
}

struct IdentifyArgs {
  std::string graph_file;
  std::string query;
  bool latex = false;
  bool strip = false;
  bool full_cs = false;
  bool debug_csi = false;
  std::string trace_file;
  std::string trace_lines_file;
  std::string json_file;
  double timeout = 0;
  std::uint64_t max_expansions = 0;
};

int run_identify(const IdentifyArgs& args) {
  csid::Ldag g = csid::parse_ldag(read_file(args.graph_file));
  if (args.strip) g = csid::strip_labels(g);
  csid::QuerySpec query = csid::parse_query(args.query, g);

  csid::SearchOptions opts;
  opts.limits.timeout_sec = args.timeout > 0 ? args.timeout : default_timeout();
  opts.limits.max_expansions = args.max_expansions;
  opts.full_context_split = args.full_cs;
  if (args.debug_csi) opts.separation.trace = &std::cerr;

  csid::IdentifyResult res = csid::identify(g, query, opts);
  std::cerr << "status="
            << (res.status == csid::SearchStatus::Identified       ? "identified"
                : res.status == csid::SearchStatus::NotIdentifiable ? "na"
                                                                    : "limit")
            << " expansions=" << res.stats.expansions << " csi_checks=" << res.stats.csi_checks
            << " wall_ms=" << res.stats.wall_ms << "\n";

  if (res.status != csid::SearchStatus::Identified)
    return res.status == csid::SearchStatus::NotIdentifiable ? kExitNotIdentified : kExitLimit;

  std::cout << csid::render(res.formula, res.graph,
                            args.latex ? csid::RenderStyle::Latex : csid::RenderStyle::Plain)
            << "\n";
  if (!args.trace_file.empty()) write_file(args.trace_file, res.derivation.to_dot(res.graph));
  if (!args.trace_lines_file.empty())
    write_file(args.trace_lines_file, res.derivation.to_lines(res.graph));
  if (!args.json_file.empty())
    write_file(args.json_file, csid::formula_to_json(res.formula, res.graph) + "\n");
  return kExitIdentified;
}

struct VerifyArgs {
  std::string graph_file;
  std::string query;
  std::string formula_file;
  int trials = 100;
  double tol = 1e-9;
  bool strip = false;
  double timeout = 0;
};

int run_verify(const VerifyArgs& args) {
  csid::Ldag g = csid::parse_ldag(read_file(args.graph_file));
  csid::Ldag search_graph = args.strip ? csid::strip_labels(g) : g;
  csid::QuerySpec query = csid::parse_query(args.query, g);

  csid::Formula formula;
  if (!args.formula_file.empty()) {
    // An externally supplied formula is checked against the ground truth
    // directly. Leaves must be evaluable from the observed joint, so base
    // variable names are the namespace.
    formula = csid::formula_from_json(read_file(args.formula_file), g);
  } else {
    csid::SearchOptions opts;
    opts.limits.timeout_sec = args.timeout > 0 ? args.timeout : default_timeout();
    csid::IdentifyResult res = csid::identify(search_graph, query, opts);
    if (res.status != csid::SearchStatus::Identified) {
      std::cerr << "identification failed; nothing to verify\n";
      return res.status == csid::SearchStatus::NotIdentifiable ? kExitNotIdentified : kExitLimit;
    }
    formula = res.formula;
  }

  csid::VerifyReport report = csid::verify_formula(g, formula, query, args.trials, args.tol);
  std::cout << report.text() << "\n";
  return report.pass ? 0 : 1;
}

struct BenchArgs {
  std::string config = "";
  std::string csv_file;
};

int run_bench_cmd(const BenchArgs& args) {
  csid::BenchConfig cfg = csid::parse_bench_config(args.config);
  if (cfg.timeout_sec <= 0) cfg.timeout_sec = default_timeout();
  std::vector<csid::BenchRow> rows = csid::run_bench(cfg);
  if (args.csv_file.empty()) {
    csid::write_csv(rows, std::cout);
  } else {
    std::ofstream out(args.csv_file);
    if (!out) throw csid::Error("cannot write " + args.csv_file);
    csid::write_csv(rows, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causal effect identification over labeled DAGs"};
  app.require_subcommand(1);

  IdentifyArgs id_args;
  CLI::App* id_cmd = app.add_subcommand("identify", "derive an identifying formula");
  id_cmd->add_option("--graph", id_args.graph_file, "graph DSL file")->required();
  id_cmd->add_option("--query", id_args.query, "query, e.g. \"P(Y | do(X))\"")->required();
  id_cmd->add_flag("--latex", id_args.latex, "emit LaTeX instead of plain text");
  id_cmd->add_option("--trace", id_args.trace_file, "write the derivation as DOT");
  id_cmd->add_option("--trace-lines", id_args.trace_lines_file,
                     "write the derivation as line records");
  id_cmd->add_option("--json", id_args.json_file, "write the formula AST as JSON");
  id_cmd->add_option("--timeout", id_args.timeout, "timeout in seconds");
  id_cmd->add_option("--max-expansions", id_args.max_expansions, "expansion cap (0 = none)");
  id_cmd->add_flag("--strip-labels", id_args.strip, "drop all labels before searching");
  id_cmd->add_flag("--full-cs", id_args.full_cs, "baseline mode: split every context");
  id_cmd->add_flag("--debug-csi", id_args.debug_csi, "dump evaluated CSI queries to stderr");

  VerifyArgs v_args;
  CLI::App* v_cmd = app.add_subcommand("verify", "identify, then check numerically");
  v_cmd->add_option("--graph", v_args.graph_file, "graph DSL file")->required();
  v_cmd->add_option("--query", v_args.query, "query")->required();
  v_cmd->add_option("--trials", v_args.trials, "number of random models");
  v_cmd->add_option("--tol", v_args.tol, "max absolute error accepted");
  v_cmd->add_option("--formula", v_args.formula_file, "verify this JSON formula instead");
  v_cmd->add_flag("--strip-labels", v_args.strip, "drop labels before identification");
  v_cmd->add_option("--timeout", v_args.timeout, "timeout in seconds");

  BenchArgs b_args;
  CLI::App* b_cmd = app.add_subcommand("bench", "random-graph benchmark");
  b_cmd->add_option("--bench", b_args.config, "config, e.g. n=7,instances=100,seed=1");
  b_cmd->add_option("--csv", b_args.csv_file, "CSV output file (default stdout)");

  try {
    app.parse(argc, argv);
    if (id_cmd->parsed()) return run_identify(id_args);
    if (v_cmd->parsed()) return run_verify(v_args);
    if (b_cmd->parsed()) return run_bench_cmd(b_args);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
