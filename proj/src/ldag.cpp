#include "csid/ldag.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace csid {

namespace {

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool reserved_name(std::string_view name) {
  return name.size() > 2 && name.substr(0, 2) == "I_";
}

// Disjoint-set over CPT rows.
class Dsu {
 public:
  explicit Dsu(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

int Ldag::find_var(std::string_view name) const {
  for (int i = 0; i < var_count(); ++i)
    if (vars_[i].name == name) return i;
  return -1;
}

int Ldag::edge_index(int tail, int head) const {
  return edge_lookup_[tail * var_count() + head];
}

VarSet Ldag::ancestors_of(VarSet s) const {
  VarSet acc = s;
  for (;;) {
    VarSet next = acc;
    for (int v : vars_of(acc)) next |= parents_[v];
    if (next == acc) return acc;
    acc = next;
  }
}

VarSet Ldag::descendants_of(VarSet s) const {
  VarSet acc = s;
  for (;;) {
    VarSet next = acc;
    for (int v : vars_of(acc)) next |= children_[v];
    if (next == acc) return acc;
    acc = next;
  }
}

std::uint64_t Ldag::covered_count(const std::vector<LabelEntry>& entries, VarSet domain,
                                  const Context& ctx) {
  // Keep entries compatible with the context, restricted to the free part of
  // the domain, then count their union by Shannon expansion over the cubes.
  VarSet free = domain & ~ctx.mask;
  std::vector<LabelEntry> live;
  live.reserve(entries.size());
  for (const LabelEntry& e : entries) {
    VarSet bound = e.fixed & ctx.mask;
    if (((e.values ^ ctx.values) & bound) != 0) continue;
    live.push_back({e.fixed & free, e.values & free});
  }

  struct Counter {
    static std::uint64_t count(std::vector<LabelEntry> cubes, VarSet free) {
      if (cubes.empty()) return 0;
      for (const LabelEntry& c : cubes)
        if ((c.fixed & free) == 0) return std::uint64_t{1} << set_size(free);
      VarSet split_candidates = 0;
      for (const LabelEntry& c : cubes) split_candidates |= c.fixed & free;
      int v = lowest_var(split_candidates);
      VarSet rest = free & ~var_bit(v);
      std::uint64_t total = 0;
      for (int val = 0; val < 2; ++val) {
        std::vector<LabelEntry> sub;
        sub.reserve(cubes.size());
        for (const LabelEntry& c : cubes) {
          if (has_var(c.fixed, v) && (has_var(c.values, v) ? 1 : 0) != val) continue;
          sub.push_back({c.fixed & rest, c.values & rest});
        }
        total += count(std::move(sub), rest);
      }
      return total;
    }
  };
  return Counter::count(std::move(live), free);
}

bool Ldag::edge_spurious(const LdagEdge& e, const Context& ctx) const {
  // An assignment I_head = 1 severs every other incoming edge of the head.
  int iv = iv_of_[e.head];
  if (iv >= 0 && e.tail != iv && ctx.assigns(iv) && ctx.value(iv) == 1) return true;
  if (e.label.empty()) return false;
  VarSet domain = label_domain(e);
  VarSet free = domain & ~ctx.mask;
  return covered_count(e.label, domain, ctx) == (std::uint64_t{1} << set_size(free));
}

std::vector<VarSet> Ldag::context_dag(const Context& ctx) const {
  std::vector<VarSet> pa = parents_;
  for (const LdagEdge& e : edges_)
    if (edge_spurious(e, ctx)) pa[e.head] &= ~var_bit(e.tail);
  return pa;
}

std::vector<int> Ldag::cpt_row_classes(int v) const {
  VarSet pa = parents_[v];
  int k = set_size(pa);
  if (k > 24) throw Error("too many parents for row enumeration: " + vars_[v].name);
  std::vector<int> pa_list(vars_of(pa).begin(), vars_of(pa).end());
  auto rank_of = [&](int p) {
    return static_cast<int>(std::lower_bound(pa_list.begin(), pa_list.end(), p) - pa_list.begin());
  };

  int rows = 1 << k;
  Dsu dsu(rows);
  for (const LdagEdge& e : edges_) {
    if (e.head != v || e.label.empty()) continue;
    int tail_rank = rank_of(e.tail);
    VarSet domain = label_domain(e);
    std::vector<int> dom_list(vars_of(domain).begin(), vars_of(domain).end());
    for (const LabelEntry& entry : e.label) {
      // Enumerate the concrete assignments of this entry's cube.
      std::vector<int> wild;
      for (int d : dom_list)
        if (!has_var(entry.fixed, d)) wild.push_back(d);
      for (std::uint64_t w = 0; w < (std::uint64_t{1} << wild.size()); ++w) {
        int row = 0;
        for (int d : dom_list) {
          int val;
          if (has_var(entry.fixed, d))
            val = has_var(entry.values, d) ? 1 : 0;
          else {
            int wi = static_cast<int>(std::find(wild.begin(), wild.end(), d) - wild.begin());
            val = (w >> wi) & 1;
          }
          if (val) row |= 1 << rank_of(d);
        }
        dsu.unite(row, row | (1 << tail_rank));
      }
    }
  }
  std::vector<int> cls(rows);
  for (int r = 0; r < rows; ++r) cls[r] = dsu.find(r);
  return cls;
}

// ---------------------------------------------------------------------------
// Builder

int Ldag::Builder::add_var(std::string name, bool observed, int intervention_base) {
  vars_.push_back({std::move(name), observed, intervention_base});
  return static_cast<int>(vars_.size()) - 1;
}

void Ldag::Builder::add_edge(int tail, int head) { edges_.push_back({tail, head, {}}); }

void Ldag::Builder::add_label_entry(int tail, int head, VarSet fixed, VarSet values) {
  for (LdagEdge& e : edges_)
    if (e.tail == tail && e.head == head) {
      e.label.push_back({fixed, values & fixed});
      return;
    }
  throw Error("label references a missing edge");
}

Ldag Ldag::Builder::build(bool require_regular) const {
  Ldag g;
  g.vars_ = vars_;
  int n = g.var_count();
  if (n == 0) throw Error("graph has no variables");
  if (n > kMaxVars) throw Error("too many variables (max 64)");

  std::set<std::string> names;
  for (const Variable& v : g.vars_) {
    if (v.name.empty()) throw Error("empty variable name");
    if (!names.insert(v.name).second) throw Error("duplicate variable name: " + v.name);
  }

  g.parents_.assign(n, 0);
  g.children_.assign(n, 0);
  g.iv_of_.assign(n, -1);
  g.edge_lookup_.assign(n * n, -1);
  g.edges_ = edges_;
  for (int i = 0; i < static_cast<int>(g.edges_.size()); ++i) {
    const LdagEdge& e = g.edges_[i];
    if (e.tail < 0 || e.tail >= n || e.head < 0 || e.head >= n || e.tail == e.head)
      throw Error("invalid edge");
    if (g.edge_lookup_[e.tail * n + e.head] >= 0) throw Error("duplicate edge");
    g.edge_lookup_[e.tail * n + e.head] = i;
    g.parents_[e.head] |= var_bit(e.tail);
    g.children_[e.tail] |= var_bit(e.head);
  }
  for (int v = 0; v < n; ++v) {
    if (g.vars_[v].observed) g.observed_ |= var_bit(v);
    int base = g.vars_[v].intervention_base;
    if (base >= 0) {
      g.intervention_ |= var_bit(v);
      g.iv_of_[base] = v;
    }
  }

  // Acyclicity via Kahn's algorithm.
  {
    std::vector<int> indeg(n);
    for (int v = 0; v < n; ++v) indeg[v] = set_size(g.parents_[v]);
    std::vector<int> queue;
    for (int v = 0; v < n; ++v)
      if (indeg[v] == 0) queue.push_back(v);
    int seen = 0;
    while (!queue.empty()) {
      int v = queue.back();
      queue.pop_back();
      ++seen;
      for (int c : vars_of(g.children_[v]))
        if (--indeg[c] == 0) queue.push_back(c);
    }
    if (seen != n) throw Error("cycle detected");
  }

  for (const LdagEdge& e : g.edges_) {
    VarSet domain = g.label_domain(e);
    for (const LabelEntry& entry : e.label) {
      if ((entry.fixed & ~domain) != 0)
        throw Error("label on " + g.vars_[e.tail].name + " -> " + g.vars_[e.head].name +
                    " mentions a non-co-parent");
      if ((entry.values & ~entry.fixed) != 0) throw Error("malformed label entry");
    }
    if (require_regular && !e.label.empty()) {
      std::uint64_t covered = covered_count(e.label, domain, Context());
      if (covered == (std::uint64_t{1} << set_size(domain)))
        throw Error("regularity violation: label on " + g.vars_[e.tail].name + " -> " +
                    g.vars_[e.head].name + " covers every co-parent assignment");
    }
  }
  return g;
}

bool operator==(const Ldag& a, const Ldag& b) {
  if (a.var_count() != b.var_count()) return false;
  for (int v = 0; v < a.var_count(); ++v) {
    if (a.vars_[v].name != b.vars_[v].name || a.vars_[v].observed != b.vars_[v].observed ||
        a.vars_[v].intervention_base != b.vars_[v].intervention_base)
      return false;
  }
  if (a.parents_ != b.parents_) return false;
  for (const LdagEdge& e : a.edges_) {
    int j = b.edge_index(e.tail, e.head);
    if (j < 0) return false;
    std::vector<LabelEntry> la = e.label;
    std::vector<LabelEntry> lb = b.edges_[j].label;
    std::sort(la.begin(), la.end());
    std::sort(lb.begin(), lb.end());
    if (la != lb) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class LineParser {
 public:
  LineParser(std::string_view text, int line) : text_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }
  bool done() {
    skip_ws();
    return pos_ >= text_.size();
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  bool accept_arrow() {
    skip_ws();
    if (pos_ + 1 < text_.size() && text_[pos_] == '-' && text_[pos_ + 1] == '>') {
      pos_ += 2;
      return true;
    }
    return false;
  }
  std::string ident() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    if (pos_ == start) fail("expected identifier");
    return std::string(text_.substr(start, pos_ - start));
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(line_, static_cast<int>(pos_) + 1, msg);
  }
  size_t pos() const { return pos_; }

 private:
  std::string_view text_;
  int line_;
  size_t pos_ = 0;
};

struct RawLabelItem {
  std::string name;
  int value;  // 0, 1, or -1 for wildcard
};
struct RawLabel {
  int line;
  int column;
  std::string tail, head;
  std::vector<std::vector<RawLabelItem>> entries;
};

}  // namespace

Ldag parse_ldag(std::string_view text) {
  struct RawEdge {
    int line;
    std::string tail, head;
  };
  std::vector<std::pair<std::string, bool>> decls;  // name, observed
  std::vector<int> decl_lines;
  std::vector<RawEdge> raw_edges;
  std::vector<RawLabel> raw_labels;

  int line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? end : end - start);
    ++line_no;
    if (size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    LineParser p(line, line_no);
    if (!p.done()) {
      std::string first = p.ident();
      if (first == "node" || first == "latent") {
        std::string name = p.ident();
        if (!p.done()) p.fail("trailing input after declaration");
        if (reserved_name(name)) p.fail("variable name '" + name + "' is reserved");
        decls.emplace_back(name, first == "node");
        decl_lines.push_back(line_no);
      } else {
        std::string tail = first;
        if (!p.accept_arrow()) p.fail("expected '->'");
        std::string head = p.ident();
        raw_edges.push_back({line_no, tail, head});
        if (p.accept('[')) {
          RawLabel lab{line_no, static_cast<int>(p.pos()) + 1, tail, head, {}};
          do {
            std::vector<RawLabelItem> entry;
            do {
              std::string var = p.ident();
              p.expect('=');
              int value;
              if (p.accept('*'))
                value = -1;
              else if (p.accept('0'))
                value = 0;
              else if (p.accept('1'))
                value = 1;
              else
                p.fail("expected 0, 1 or *");
              entry.push_back({var, value});
            } while (p.accept(','));
            lab.entries.push_back(std::move(entry));
          } while (p.accept(';'));
          p.expect(']');
          raw_labels.push_back(std::move(lab));
        }
        if (!p.done()) p.fail("trailing input after edge");
      }
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }

  Ldag::Builder builder;
  std::map<std::string, int> ids;
  for (size_t i = 0; i < decls.size(); ++i) {
    if (ids.count(decls[i].first))
      throw ParseError(decl_lines[i], 1, "duplicate variable name: " + decls[i].first);
    ids[decls[i].first] = builder.add_var(decls[i].first, decls[i].second);
  }
  auto lookup = [&](const std::string& name, int line) {
    auto it = ids.find(name);
    if (it == ids.end()) throw ParseError(line, 1, "unknown variable: " + name);
    return it->second;
  };
  std::set<std::pair<int, int>> seen_edges;
  std::vector<VarSet> parent_acc(decls.size(), 0);
  for (const auto& e : raw_edges) {
    int t = lookup(e.tail, e.line), h = lookup(e.head, e.line);
    if (t == h) throw ParseError(e.line, 1, "self loop on " + e.tail);
    if (!seen_edges.insert({t, h}).second)
      throw ParseError(e.line, 1, "duplicate edge " + e.tail + " -> " + e.head);
    parent_acc[h] |= var_bit(t);
    builder.add_edge(t, h);
  }
  for (const auto& lab : raw_labels) {
    int t = lookup(lab.tail, lab.line), h = lookup(lab.head, lab.line);
    VarSet domain = parent_acc[h] & ~var_bit(t);
    for (const auto& entry : lab.entries) {
      VarSet fixed = 0, values = 0, mentioned = 0;
      for (const RawLabelItem& item : entry) {
        int v = lookup(item.name, lab.line);
        if (!has_var(domain, v))
          throw ParseError(lab.line, lab.column,
                           "label variable " + item.name + " is not a co-parent of " + lab.head);
        if (has_var(mentioned, v))
          throw ParseError(lab.line, lab.column, "label mentions " + item.name + " twice");
        mentioned |= var_bit(v);
        if (item.value >= 0) {
          fixed |= var_bit(v);
          if (item.value == 1) values |= var_bit(v);
        }
      }
      if (mentioned != domain)
        throw ParseError(lab.line, lab.column,
                         "label entry must mention every co-parent of " + lab.head);
      builder.add_label_entry(t, h, fixed, values);
    }
  }

  try {
    return builder.build(true);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line_no, 1, e.what());
  }
}

// ---------------------------------------------------------------------------
// Renderer

std::string Ldag::render() const {
  std::ostringstream out;
  for (const Variable& v : vars_) out << (v.observed ? "node " : "latent ") << v.name << "\n";
  std::vector<const LdagEdge*> sorted;
  sorted.reserve(edges_.size());
  for (const LdagEdge& e : edges_) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](const LdagEdge* a, const LdagEdge* b) {
    return std::pair(a->tail, a->head) < std::pair(b->tail, b->head);
  });
  for (const LdagEdge* e : sorted) {
    out << vars_[e->tail].name << " -> " << vars_[e->head].name;
    if (!e->label.empty()) {
      std::vector<LabelEntry> entries = e->label;
      std::sort(entries.begin(), entries.end());
      out << " [";
      VarSet domain = label_domain(*e);
      for (size_t i = 0; i < entries.size(); ++i) {
        if (i) out << "; ";
        bool first = true;
        for (int v : vars_of(domain)) {
          if (!first) out << ", ";
          first = false;
          out << vars_[v].name << "=";
          if (!has_var(entries[i].fixed, v))
            out << "*";
          else
            out << (has_var(entries[i].values, v) ? "1" : "0");
        }
      }
      out << "]";
    }
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Graph transforms

Ldag augment_with_interventions(const Ldag& g, VarSet targets) {
  if ((targets & ~g.all_vars()) != 0) throw Error("augmentation target not in graph");
  for (int t : vars_of(targets))
    if (g.var(t).is_intervention()) throw Error("cannot augment an intervention node");

  Ldag::Builder b;
  for (const Variable& v : g.vars_) b.add_var(v.name, v.observed, v.intervention_base);
  std::vector<int> iv(g.var_count(), -1);
  for (int t : vars_of(targets)) iv[t] = b.add_var("I_" + g.var(t).name, true, t);

  for (const LdagEdge& e : g.edges_) {
    b.add_edge(e.tail, e.head);
    bool head_augmented = iv[e.head] >= 0;
    for (const LabelEntry& entry : e.label) {
      // With I_head unassigned the entry keeps its old meaning (the new
      // dimension is a wildcard).
      b.add_label_entry(e.tail, e.head, entry.fixed, entry.values);
    }
    if (head_augmented) {
      VarSet ibit = var_bit(iv[e.head]);
      b.add_label_entry(e.tail, e.head, ibit, ibit);  // I_head = 1, rest = *
    }
  }
  for (int t : vars_of(targets)) b.add_edge(iv[t], t);
  return b.build(false);
}

Ldag label_closure(const Ldag& g) {
  Ldag::Builder b;
  for (const Variable& v : g.vars_) b.add_var(v.name, v.observed, v.intervention_base);
  for (const LdagEdge& e : g.edges_) b.add_edge(e.tail, e.head);

  for (int h = 0; h < g.var_count(); ++h) {
    VarSet pa = g.parents(h);
    if (pa == 0) continue;
    std::vector<int> cls = g.cpt_row_classes(h);
    std::vector<int> pa_list(vars_of(pa).begin(), vars_of(pa).end());
    auto rank_of = [&](int p) {
      return static_cast<int>(std::lower_bound(pa_list.begin(), pa_list.end(), p) -
                              pa_list.begin());
    };
    for (int t : vars_of(pa)) {
      const LdagEdge& e = g.edges()[g.edge_index(t, h)];
      for (const LabelEntry& entry : e.label) b.add_label_entry(t, h, entry.fixed, entry.values);

      VarSet domain = g.label_domain(e);
      std::vector<int> dom_list(vars_of(domain).begin(), vars_of(domain).end());
      int tr = rank_of(t);
      // Concrete co-parent assignments whose two rows are equated but which
      // no declared entry covers yet.
      std::vector<LabelEntry> missing;
      for (std::uint64_t d = 0; d < (std::uint64_t{1} << dom_list.size()); ++d) {
        Context assign;
        int row = 0;
        for (size_t i = 0; i < dom_list.size(); ++i) {
          int val = (d >> i) & 1;
          assign.set(dom_list[i], val);
          if (val) row |= 1 << rank_of(dom_list[i]);
        }
        if (cls[row] != cls[row | (1 << tr)]) continue;
        bool covered = false;
        for (const LabelEntry& entry : e.label)
          if (entry.covers(assign)) {
            covered = true;
            break;
          }
        if (!covered) missing.push_back({assign.mask, assign.values});
      }
      // Compact the missing cubes by merging pairs that differ in one
      // variable, so wildcard notation is preserved where possible.
      bool merged = true;
      while (merged) {
        merged = false;
        std::sort(missing.begin(), missing.end());
        missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
        for (size_t i = 0; i < missing.size() && !merged; ++i)
          for (size_t j = i + 1; j < missing.size() && !merged; ++j) {
            if (missing[i].fixed != missing[j].fixed) continue;
            VarSet diff = missing[i].values ^ missing[j].values;
            if (set_size(diff) != 1) continue;
            LabelEntry joined{missing[i].fixed & ~diff, missing[i].values & ~diff};
            missing.erase(missing.begin() + j);
            missing.erase(missing.begin() + i);
            missing.push_back(joined);
            merged = true;
          }
      }
      std::sort(missing.begin(), missing.end());
      for (const LabelEntry& entry : missing) b.add_label_entry(t, h, entry.fixed, entry.values);
    }
  }
  return b.build(false);
}

Ldag strip_labels(const Ldag& g) {
  Ldag::Builder b;
  for (const Variable& v : g.vars_) b.add_var(v.name, v.observed, v.intervention_base);
  for (const LdagEdge& e : g.edges_) b.add_edge(e.tail, e.head);
  return b.build(false);
}

}  // namespace csid
