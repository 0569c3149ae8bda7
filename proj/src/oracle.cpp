#include "csid/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>

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
};

std::vector<int> parent_list(const Ldag& g, int v) {
  VarSet pa = g.parents(v);
  return std::vector<int>(vars_of(pa).begin(), vars_of(pa).end());
}

std::size_t row_of(const std::vector<int>& parents, std::uint64_t assignment) {
  std::size_t row = 0;
  for (std::size_t r = 0; r < parents.size(); ++r)
    if ((assignment >> parents[r]) & 1) row |= std::size_t{1} << r;
  return row;
}

}  // namespace

bool DiscreteModel::label_consistent(double tol) const {
  const Ldag& g = *graph;
  for (int v = 0; v < g.var_count(); ++v) {
    std::vector<int> cls = g.cpt_row_classes(v);
    for (std::size_t r = 0; r < cls.size(); ++r)
      if (std::abs(p1[v][r] - p1[v][cls[r]]) > tol) return false;
  }
  return true;
}

std::string DiscreteModel::dump() const {
  const Ldag& g = *graph;
  std::ostringstream out;
  out.precision(17);
  for (int v = 0; v < g.var_count(); ++v) {
    std::vector<int> parents = parent_list(g, v);
    for (std::size_t row = 0; row < p1[v].size(); ++row) {
      out << g.var(v).name << " | ";
      if (parents.empty()) {
        out << "-";
      } else {
        for (std::size_t r = 0; r < parents.size(); ++r) {
          if (r) out << ",";
          out << g.var(parents[r]).name << "=" << ((row >> r) & 1);
        }
      }
      out << " : " << (1.0 - p1[v][row]) << " " << p1[v][row] << "\n";
    }
  }
  return out.str();
}

DiscreteModel load_model(std::istream& in, const Ldag& g) {
  DiscreteModel m;
  m.graph = &g;
  m.p1.resize(g.var_count());
  for (int v = 0; v < g.var_count(); ++v)
    m.p1[v].assign(std::size_t{1} << set_size(g.parents(v)), -1.0);

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (size_t hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string name, bar, assign, colon;
    double p0, p1v;
    if (!(ls >> name >> bar >> assign >> colon >> p0 >> p1v) || bar != "|" || colon != ":")
      throw Error("model line " + std::to_string(line_no) + ": malformed row");
    int v = g.find_var(name);
    if (v < 0) throw Error("model line " + std::to_string(line_no) + ": unknown variable");
    std::vector<int> parents = parent_list(g, v);
    std::size_t row = 0;
    if (assign != "-") {
      std::istringstream as(assign);
      std::string item;
      while (std::getline(as, item, ',')) {
        size_t eq = item.find('=');
        if (eq == std::string::npos)
          throw Error("model line " + std::to_string(line_no) + ": bad assignment");
        int p = g.find_var(item.substr(0, eq));
        auto it = std::find(parents.begin(), parents.end(), p);
        if (it == parents.end())
          throw Error("model line " + std::to_string(line_no) + ": not a parent");
        if (item.substr(eq + 1) == "1") row |= std::size_t{1} << (it - parents.begin());
      }
    }
    if (std::abs(p0 + p1v - 1.0) > 1e-9)
      throw Error("model line " + std::to_string(line_no) + ": row does not sum to 1");
    m.p1[v][row] = p1v;
  }
  for (int v = 0; v < g.var_count(); ++v)
    for (double x : m.p1[v])
      if (x < 0) throw Error("model misses a row for " + g.var(v).name);
  return m;
}

DiscreteModel random_model(const Ldag& g, std::uint64_t seed) {
  DiscreteModel m;
  m.graph = &g;
  m.p1.resize(g.var_count());
  SplitMix rng(mix64(seed ^ 0x5ca1ab1edeadbeefull));
  for (int v = 0; v < g.var_count(); ++v) {
    std::vector<int> cls = g.cpt_row_classes(v);
    std::size_t rows = cls.size();
    m.p1[v].assign(rows, 0.0);
    std::vector<double> class_p(rows, -1.0);
    for (std::size_t r = 0; r < rows; ++r) {
      if (class_p[cls[r]] < 0)
        class_p[cls[r]] = kProbFloor + (1.0 - 2.0 * kProbFloor) * rng.uniform();
      m.p1[v][r] = class_p[cls[r]];
    }
  }
  return m;
}

DiscreteTable joint_distribution(const DiscreteModel& m, int max_vars) {
  const Ldag& g = *m.graph;
  int n = g.var_count();
  if (n > max_vars) throw Error("variable count exceeds the joint-table cap");
  std::vector<std::vector<int>> parents(n);
  for (int v = 0; v < n; ++v) parents[v] = parent_list(g, v);

  DiscreteTable table(g.all_vars());
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << n); ++a) {
    double p = 1.0;
    for (int v = 0; v < n; ++v) {
      double pv1 = m.p1[v][row_of(parents[v], a)];
      p *= ((a >> v) & 1) ? pv1 : 1.0 - pv1;
    }
    table.p[a] = p;  // index == assignment since all vars are present
  }
  return table;
}

DiscreteTable observed_joint(const DiscreteModel& m, int max_vars) {
  return joint_distribution(m, max_vars).marginal(m.graph->observed_vars());
}

DiscreteTable interventional(const DiscreteModel& m, const Context& do_assign, int max_vars) {
  const Ldag& g = *m.graph;
  int n = g.var_count();
  if (n > max_vars) throw Error("variable count exceeds the joint-table cap");
  if ((do_assign.mask & ~g.all_vars()) != 0) throw Error("intervention outside the graph");
  std::vector<std::vector<int>> parents(n);
  for (int v = 0; v < n; ++v) parents[v] = parent_list(g, v);

  DiscreteTable full(g.all_vars());
  for (std::uint64_t a = 0; a < (std::uint64_t{1} << n); ++a) {
    Context c = full.assignment_of(a);
    if (!c.agrees_with(do_assign)) continue;
    double p = 1.0;
    for (int v = 0; v < n; ++v) {
      if (do_assign.assigns(v)) continue;  // truncated factor
      double pv1 = m.p1[v][row_of(parents[v], a)];
      p *= ((a >> v) & 1) ? pv1 : 1.0 - pv1;
    }
    full.p[a] = p;
  }
  return full.marginal(g.observed_vars() & ~do_assign.mask);
}

double eval_term(const DiscreteTable& joint_all, const Term& t, const Context& binding) {
  if ((t.general_vars() & ~binding.mask) != 0) throw Error("unbound general variable");
  Context all = t.assigned().merged(binding.restricted(t.general_vars()));
  double den = t.cond_vars() ? joint_all.sum_consistent(all.restricted(t.cond_vars()))
                             : joint_all.total();
  if (den <= 0) throw Error("conditioning event has zero mass");
  return joint_all.sum_consistent(all) / den;
}

double csi_deviation(const DiscreteTable& joint_all, const CsiQuery& q) {
  double worst = 0.0;
  std::vector<int> cond_vars(vars_of(q.cond).begin(), vars_of(q.cond).end());
  std::vector<int> y_vars(vars_of(q.y).begin(), vars_of(q.y).end());
  std::vector<int> z_vars(vars_of(q.z).begin(), vars_of(q.z).end());
  for (std::uint64_t c = 0; c < (std::uint64_t{1} << cond_vars.size()); ++c) {
    Context base = q.ctx;
    for (std::size_t k = 0; k < cond_vars.size(); ++k) base.set(cond_vars[k], (c >> k) & 1);
    double pbase = joint_all.sum_consistent(base);
    if (pbase <= 0) continue;
    for (std::uint64_t yi = 0; yi < (std::uint64_t{1} << y_vars.size()); ++yi) {
      Context with_y = base;
      for (std::size_t k = 0; k < y_vars.size(); ++k) with_y.set(y_vars[k], (yi >> k) & 1);
      double py = joint_all.sum_consistent(with_y) / pbase;
      for (std::uint64_t zi = 0; zi < (std::uint64_t{1} << z_vars.size()); ++zi) {
        Context with_z = base;
        for (std::size_t k = 0; k < z_vars.size(); ++k) with_z.set(z_vars[k], (zi >> k) & 1);
        double pz = joint_all.sum_consistent(with_z) / pbase;
        Context both = with_y;
        for (std::size_t k = 0; k < z_vars.size(); ++k) both.set(z_vars[k], (zi >> k) & 1);
        double pyz = joint_all.sum_consistent(both) / pbase;
        worst = std::max(worst, std::abs(pyz - py * pz));
      }
    }
  }
  return worst;
}

std::string VerifyReport::text() const {
  std::ostringstream out;
  out << "trials=" << trials << " max_error=" << max_error << " status="
      << (pass ? "PASS" : "FAIL");
  return out.str();
}

VerifyReport verify_formula(const Ldag& g, const Formula& f, const QuerySpec& query, int trials,
                            double tol) {
  VerifyReport report;
  report.trials = trials;
  VarSet general = query.outcome | query.do_set | query.cond_general;
  std::vector<int> gen_vars(vars_of(general).begin(), vars_of(general).end());

  for (int trial = 0; trial < trials; ++trial) {
    DiscreteModel m = random_model(g, static_cast<std::uint64_t>(trial) + 1);
    DiscreteTable pw = observed_joint(m);
    std::vector<DiscreteTable> inputs = {pw};

    // Ground truth per do-assignment, conditioned on the query's own
    // conditioning side.
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << gen_vars.size()); ++bits) {
      Context binding;
      for (std::size_t k = 0; k < gen_vars.size(); ++k) binding.set(gen_vars[k], (bits >> k) & 1);
      Context do_ctx = binding.restricted(query.do_set);
      DiscreteTable it = interventional(m, do_ctx);
      Context cond =
          query.cond_assigned.merged(binding.restricted(query.cond_general));
      Context outcome_and_cond = cond.merged(binding.restricted(query.outcome));
      double den = cond.mask ? it.sum_consistent(cond) : 1.0;
      if (den <= 0) continue;
      double truth = it.sum_consistent(outcome_and_cond) / den;
      double predicted = evaluate(f, inputs, binding);
      report.max_error = std::max(report.max_error, std::abs(predicted - truth));
    }
  }
  report.pass = report.max_error < tol;
  return report;
}

// ---------------------------------------------------------------------------
// Counterexample search

namespace {

// Free parameters: one probability per CPT row class, for every variable.
struct ParamSpace {
  struct Slot {
    int var;
    std::size_t row;  // class representative row
  };
  std::vector<Slot> slots;
  std::vector<std::vector<int>> classes;  // per var: row -> class rep

  explicit ParamSpace(const Ldag& g) {
    classes.resize(g.var_count());
    for (int v = 0; v < g.var_count(); ++v) {
      classes[v] = g.cpt_row_classes(v);
      for (std::size_t r = 0; r < classes[v].size(); ++r)
        if (classes[v][r] == static_cast<int>(r)) slots.push_back({v, r});
    }
  }

  Eigen::VectorXd extract(const DiscreteModel& m) const {
    Eigen::VectorXd theta(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) theta[i] = m.p1[slots[i].var][slots[i].row];
    return theta;
  }

  DiscreteModel materialize(const Ldag& g, const Eigen::VectorXd& theta) const {
    DiscreteModel m;
    m.graph = &g;
    m.p1.resize(g.var_count());
    std::vector<std::vector<double>> by_rep(g.var_count());
    for (int v = 0; v < g.var_count(); ++v)
      by_rep[v].assign(classes[v].size(), 0.0);
    for (std::size_t i = 0; i < slots.size(); ++i) by_rep[slots[i].var][slots[i].row] = theta[i];
    for (int v = 0; v < g.var_count(); ++v) {
      m.p1[v].resize(classes[v].size());
      for (std::size_t r = 0; r < classes[v].size(); ++r)
        m.p1[v][r] = by_rep[v][classes[v][r]];
    }
    return m;
  }
};

Eigen::VectorXd flatten(const DiscreteTable& t) {
  Eigen::VectorXd v(t.p.size());
  for (std::size_t i = 0; i < t.p.size(); ++i) v[i] = t.p[i];
  return v;
}

Eigen::VectorXd effect_vector(const DiscreteModel& m, const QuerySpec& q) {
  std::vector<double> vals;
  std::vector<int> do_vars(vars_of(q.do_set).begin(), vars_of(q.do_set).end());
  VarSet rest = q.outcome | q.cond_general;
  std::vector<int> rest_vars(vars_of(rest).begin(), vars_of(rest).end());
  for (std::uint64_t xb = 0; xb < (std::uint64_t{1} << do_vars.size()); ++xb) {
    Context do_ctx;
    for (std::size_t k = 0; k < do_vars.size(); ++k) do_ctx.set(do_vars[k], (xb >> k) & 1);
    DiscreteTable it = interventional(m, do_ctx);
    for (std::uint64_t rb = 0; rb < (std::uint64_t{1} << rest_vars.size()); ++rb) {
      Context binding;
      for (std::size_t k = 0; k < rest_vars.size(); ++k)
        binding.set(rest_vars[k], (rb >> k) & 1);
      Context cond = q.cond_assigned.merged(binding.restricted(q.cond_general));
      double den = cond.mask ? it.sum_consistent(cond) : 1.0;
      vals.push_back(den > 0
                         ? it.sum_consistent(cond.merged(binding.restricted(q.outcome))) / den
                         : 0.0);
    }
  }
  Eigen::VectorXd v(vals.size());
  for (std::size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
  return v;
}

}  // namespace

CounterexampleResult counterexample_search(const Ldag& g, const QuerySpec& query,
                                           const CounterexampleBudget& budget) {
  CounterexampleResult result;
  if (g.var_count() > 8) throw Error("counterexample search supports at most 8 variables");
  ParamSpace space(g);
  const int np = static_cast<int>(space.slots.size());
  const double lo = kProbFloor, hi = 1.0 - kProbFloor;

  auto obs_of = [&](const Eigen::VectorXd& theta) {
    DiscreteModel m = space.materialize(g, theta);
    return flatten(observed_joint(m));
  };
  auto jacobian = [&](const Eigen::VectorXd& theta) {
    const double h = 1e-6;
    Eigen::VectorXd base = obs_of(theta);
    Eigen::MatrixXd J(base.size(), np);
    for (int i = 0; i < np; ++i) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp[i] = std::min(hi, theta[i] + h);
      tm[i] = std::max(lo, theta[i] - h);
      J.col(i) = (obs_of(tp) - obs_of(tm)) / (tp[i] - tm[i]);
    }
    return J;
  };
  auto clip = [&](Eigen::VectorXd theta) {
    for (int i = 0; i < np; ++i) theta[i] = std::clamp(theta[i], lo, hi);
    return theta;
  };

  SplitMix rng(budget.seed);
  for (int restart = 0; restart < budget.restarts; ++restart) {
    DiscreteModel base = random_model(g, budget.seed * 1000003 + restart);
    Eigen::VectorXd theta0 = space.extract(base);
    Eigen::VectorXd obs0 = obs_of(theta0);
    Eigen::VectorXd eff0 = effect_vector(base, query);

    Eigen::MatrixXd J = jacobian(theta0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeFullV);
    double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    std::vector<int> null_cols;
    for (int i = 0; i < svd.matrixV().cols(); ++i)
      if (i >= svd.singularValues().size() || svd.singularValues()[i] < 1e-9 * std::max(1.0, smax))
        null_cols.push_back(i);
    if (null_cols.empty()) continue;  // observationally rigid around this point

    for (int dir = 0; dir < budget.directions_per_restart; ++dir) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(np);
      for (int c : null_cols) d += (2.0 * rng.uniform() - 1.0) * svd.matrixV().col(c);
      if (d.norm() < 1e-12) continue;
      d.normalize();

      Eigen::VectorXd theta = theta0;
      for (int step = 0; step < 8; ++step) {
        theta = clip(theta + 0.08 * d);
        // Gauss-Newton correction back onto the observational fiber.
        bool converged = false;
        for (int it = 0; it < 60; ++it) {
          Eigen::VectorXd res = obs_of(theta) - obs0;
          double rinf = res.lpNorm<Eigen::Infinity>();
          if (rinf < 1e-13) {
            converged = true;
            break;
          }
          Eigen::MatrixXd Jc = jacobian(theta);
          Eigen::VectorXd delta = Jc.completeOrthogonalDecomposition().solve(res);
          if (delta.lpNorm<Eigen::Infinity>() < 1e-16) break;
          theta = clip(theta - delta);
        }
        if (!converged) break;
        DiscreteModel cand = space.materialize(g, theta);
        double effect_gap =
            (effect_vector(cand, query) - eff0).lpNorm<Eigen::Infinity>();
        double obs_gap = (obs_of(theta) - obs0).lpNorm<Eigen::Infinity>();
        if (obs_gap < 1e-9 && effect_gap > 1e-3) {
          result.found = true;
          result.obs_gap = obs_gap;
          result.effect_gap = effect_gap;
          result.model_a = base;
          result.model_b = cand;
          return result;
        }
      }
    }
  }
  return result;
}

}  // namespace csid
