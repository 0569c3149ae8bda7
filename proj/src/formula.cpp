#include "csid/formula.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

namespace csid {

namespace {

Formula make(FKind kind, std::vector<Formula> kids = {}, int var = -1, int value = -1) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = kind;
  n->kids = std::move(kids);
  n->var = var;
  n->value = value;
  return n;
}

}  // namespace

Formula f_leaf(const Term& t) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = FKind::Leaf;
  n->leaf = t;
  return n;
}
Formula f_one() { return make(FKind::One); }
Formula f_sum(int var, Formula body) { return make(FKind::Sum, {std::move(body)}, var); }
Formula f_product(std::vector<Formula> factors) { return make(FKind::Product, std::move(factors)); }
Formula f_quotient(Formula num, Formula den) {
  return make(FKind::Quotient, {std::move(num), std::move(den)});
}
Formula f_difference(Formula left, Formula right) {
  return make(FKind::Difference, {std::move(left), std::move(right)});
}
Formula f_piecewise(int var, Formula if0, Formula if1) {
  return make(FKind::Piecewise, {std::move(if0), std::move(if1)}, var);
}
Formula f_substitute(int var, int value, Formula body) {
  return make(FKind::Substitute, {std::move(body)}, var, value);
}
Formula f_add(std::vector<Formula> terms) { return make(FKind::Add, std::move(terms)); }

bool formula_equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->var != b->var || a->value != b->value) return false;
  if (a->kind == FKind::Leaf && !(a->leaf == b->leaf)) return false;
  if (a->kids.size() != b->kids.size()) return false;
  for (size_t i = 0; i < a->kids.size(); ++i)
    if (!formula_equal(a->kids[i], b->kids[i])) return false;
  return true;
}

VarSet free_vars(const Formula& f) {
  switch (f->kind) {
    case FKind::Leaf:
      return f->leaf.general_vars();
    case FKind::One:
      return 0;
    case FKind::Sum:
    case FKind::Substitute:
      return free_vars(f->kids[0]) & ~var_bit(f->var);
    case FKind::Piecewise:
      return var_bit(f->var) | free_vars(f->kids[0]) | free_vars(f->kids[1]);
    default: {
      VarSet s = 0;
      for (const Formula& k : f->kids) s |= free_vars(k);
      return s;
    }
  }
}

int node_count(const Formula& f) {
  int n = 1;
  for (const Formula& k : f->kids) n += node_count(k);
  return n;
}

double evaluate(const Formula& f, std::span<const DiscreteTable> tables, const Context& binding) {
  switch (f->kind) {
    case FKind::Leaf: {
      const Term& t = f->leaf;
      if ((t.general_vars() & ~binding.mask) != 0)
        throw Error("unbound variable in leaf evaluation");
      const DiscreteTable* table = nullptr;
      for (const DiscreteTable& cand : tables)
        if ((t.all_vars() & ~cand.vars) == 0) {
          table = &cand;
          break;
        }
      if (!table) throw Error("no input table covers a leaf term");
      Context all = t.assigned().merged(binding.restricted(t.general_vars()));
      Context cond = all.restricted(t.cond_vars());
      double den = t.cond_vars() ? table->sum_consistent(cond) : table->total();
      if (std::abs(den) < 1e-12) throw Error("division by a value below 1e-12");
      return table->sum_consistent(all) / den;
    }
    case FKind::One:
      return 1.0;
    case FKind::Sum: {
      Context b0 = binding, b1 = binding;
      b0.set(f->var, 0);
      b1.set(f->var, 1);
      return evaluate(f->kids[0], tables, b0) + evaluate(f->kids[0], tables, b1);
    }
    case FKind::Product: {
      double x = 1.0;
      for (const Formula& k : f->kids) x *= evaluate(k, tables, binding);
      return x;
    }
    case FKind::Quotient: {
      double den = evaluate(f->kids[1], tables, binding);
      if (std::abs(den) < 1e-12) throw Error("division by a value below 1e-12");
      return evaluate(f->kids[0], tables, binding) / den;
    }
    case FKind::Difference:
      return evaluate(f->kids[0], tables, binding) - evaluate(f->kids[1], tables, binding);
    case FKind::Piecewise:
      if (!binding.assigns(f->var)) throw Error("piecewise variable unbound");
      return evaluate(f->kids[binding.value(f->var)], tables, binding);
    case FKind::Substitute: {
      Context b = binding;
      b.set(f->var, f->value);
      return evaluate(f->kids[0], tables, b);
    }
    case FKind::Add: {
      double x = 0.0;
      for (const Formula& k : f->kids) x += evaluate(k, tables, binding);
      return x;
    }
  }
  throw Error("corrupt formula node");
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

// Precedence levels: 0 additive (+,-), 1 quotient, 2 product, 3 atom.
struct Renderer {
  const Ldag& g;
  RenderStyle style;
  std::map<int, std::string> display;  // bound-variable renames
  VarSet taken;                        // names in scope (free vars + enclosing sums)

  std::string var_name(int v) const {
    auto it = display.find(v);
    return it != display.end() ? it->second : g.var(v).name;
  }

  std::string term_text(const Term& t) const {
    std::string out = "P(";
    bool first = true;
    auto side = [&](VarSet general, const Context& assigned) {
      for (int v : vars_of(general | assigned.mask)) {
        if (!first) out += ",";
        first = false;
        out += var_name(v);
        if (assigned.assigns(v)) out += assigned.value(v) ? "=1" : "=0";
      }
    };
    side(t.jg, t.ja);
    if (t.cond_vars() != 0) {
      out += "|";
      first = true;
      side(t.cg, t.ca);
    }
    out += ")";
    return out;
  }

  std::string wrap(const Formula& f, int min_level) {
    std::string s = emit(f, min_level);
    return s;
  }

  std::string parens(const std::string& s) const {
    if (style == RenderStyle::Latex) return "\\left(" + s + "\\right)";
    return "(" + s + ")";
  }

  int level_of(const Formula& f) const {
    switch (f->kind) {
      case FKind::Add:
      case FKind::Difference:
        return 0;
      case FKind::Quotient:
        return style == RenderStyle::Latex ? 3 : 1;  // \frac is self-delimiting
      case FKind::Product:
        return 2;
      case FKind::Sum:
        // A sum swallows the product to its right, so it cannot stand bare
        // as a product factor.
        return 2;
      default:
        return 3;
    }
  }

  std::string emit(const Formula& f, int min_level) {
    std::string body = emit_node(f);
    if (level_of(f) < min_level) return parens(body);
    return body;
  }

  std::string subscript(const std::string& name) const {
    if (style != RenderStyle::Latex) return name;
    return name.size() == 1 ? name : "{" + name + "}";
  }

  std::string emit_node(const Formula& f) {
    switch (f->kind) {
      case FKind::Leaf:
        return term_text(f->leaf);
      case FKind::One:
        return "1";
      case FKind::Sum: {
        int v = f->var;
        std::string base = g.var(v).name;
        std::string name = base;
        auto in_scope = [&](const std::string& n) {
          if (has_var(taken, v) && n == base) return true;
          for (const auto& [var, disp] : display)
            if (disp == n) return true;
          return false;
        };
        bool renamed = false;
        while (in_scope(name)) {
          name += "'";
          renamed = true;
        }
        auto saved_display = display;
        VarSet saved_taken = taken;
        if (renamed) display[v] = name;
        taken |= var_bit(v);
        std::string body = emit(f->kids[0], 2);
        std::string out = (style == RenderStyle::Latex ? "\\sum_" + subscript(name) + " "
                                                       : "sum_" + name + " ") +
                          body;
        display = saved_display;
        taken = saved_taken;
        return out;
      }
      case FKind::Product: {
        std::string out;
        for (const Formula& k : f->kids) out += emit(k, 3);
        return out;
      }
      case FKind::Quotient:
        if (style == RenderStyle::Latex)
          return "\\frac{" + emit(f->kids[0], 0) + "}{" + emit(f->kids[1], 0) + "}";
        return emit(f->kids[0], 2) + " / " + emit(f->kids[1], 2);
      case FKind::Difference:
        return emit(f->kids[0], 1) + " - " + emit(f->kids[1], 1);
      case FKind::Piecewise: {
        std::string n = var_name(f->var);
        return "[" + n + "=0: " + emit(f->kids[0], 0) + "; " + n + "=1: " + emit(f->kids[1], 0) +
               "]";
      }
      case FKind::Substitute:
        return emit(f->kids[0], 3) + "[" + var_name(f->var) + "=" + std::to_string(f->value) +
               "]";
      case FKind::Add: {
        std::string out;
        for (size_t i = 0; i < f->kids.size(); ++i) {
          if (i) out += " + ";
          out += emit(f->kids[i], 1);
        }
        return out;
      }
    }
    return "?";
  }
};

}  // namespace

std::string render(const Formula& f, const Ldag& g, RenderStyle style) {
  Renderer r{g, style, {}, free_vars(f)};
  return r.emit(f, 0);
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

bool context_subset(const Context& small, const Context& big) {
  return (small.mask & ~big.mask) == 0 && ((small.values ^ big.values) & small.mask) == 0;
}

// P(a, b | c) / P(b | c) -> P(a | b, c) when roles and values line up.
Formula collapse_quotient(const Formula& num, const Formula& den) {
  if (num->kind != FKind::Leaf || den->kind != FKind::Leaf) return nullptr;
  const Term& tn = num->leaf;
  const Term& td = den->leaf;
  if (tn.cg != td.cg || !(tn.ca == td.ca)) return nullptr;
  if ((td.jg & ~tn.jg) != 0 || !context_subset(td.ja, tn.ja)) return nullptr;
  Term out;
  out.jg = tn.jg & ~td.jg;
  out.ja = Context(tn.ja.mask & ~td.ja.mask, tn.ja.values & ~td.ja.mask);
  out.cg = tn.cg | td.jg;
  out.ca = tn.ca.merged(td.ja);
  if (out.joint_vars() == 0) return nullptr;
  return f_leaf(out);
}

Formula substitute_into(int var, int value, const Formula& f);

Formula simplify_node(const Formula& f);

Formula substitute_into(int var, int value, const Formula& f) {
  switch (f->kind) {
    case FKind::Leaf: {
      Term t = f->leaf;
      if (has_var(t.jg, var)) {
        t.jg &= ~var_bit(var);
        t.ja.set(var, value);
      } else if (has_var(t.cg, var)) {
        t.cg &= ~var_bit(var);
        t.ca.set(var, value);
      }
      return f_leaf(t);
    }
    case FKind::One:
      return f;
    case FKind::Sum:
      if (f->var == var) return f;  // variable not free below
      return f_sum(f->var, substitute_into(var, value, f->kids[0]));
    case FKind::Substitute:
      if (f->var == var) return f;
      return f_substitute(f->var, f->value, substitute_into(var, value, f->kids[0]));
    case FKind::Piecewise:
      if (f->var == var) return substitute_into(var, value, f->kids[value]);
      return f_piecewise(f->var, substitute_into(var, value, f->kids[0]),
                         substitute_into(var, value, f->kids[1]));
    case FKind::Product:
    case FKind::Add: {
      std::vector<Formula> kids;
      kids.reserve(f->kids.size());
      for (const Formula& k : f->kids) kids.push_back(substitute_into(var, value, k));
      return make(f->kind, std::move(kids));
    }
    case FKind::Quotient:
    case FKind::Difference:
      return make(f->kind, {substitute_into(var, value, f->kids[0]),
                            substitute_into(var, value, f->kids[1])});
  }
  return f;
}

Formula simplify_node(const Formula& f) {
  std::vector<Formula> kids;
  kids.reserve(f->kids.size());
  for (const Formula& k : f->kids) kids.push_back(simplify_node(k));

  switch (f->kind) {
    case FKind::Leaf:
    case FKind::One:
      return f;

    case FKind::Sum: {
      const Formula& body = kids[0];
      // Marginalizing a general joint variable of a leaf stays a leaf.
      if (body->kind == FKind::Leaf && has_var(body->leaf.jg, f->var)) {
        Term t = body->leaf;
        t.jg &= ~var_bit(f->var);
        if (t.joint_vars() != 0) return f_leaf(t);
      }
      // Summing a piecewise split over its own selector is a plain sum of
      // the two branches.
      if (body->kind == FKind::Piecewise && body->var == f->var) {
        std::vector<Formula> addends;
        for (int val = 0; val < 2; ++val) {
          Formula k = body->kids[val];
          if (k->kind == FKind::Add)
            for (const Formula& a : k->kids) addends.push_back(a);
          else
            addends.push_back(k);
        }
        return f_add(std::move(addends));
      }
      return f_sum(f->var, body);
    }

    case FKind::Substitute:
      return simplify_node(substitute_into(f->var, f->value, kids[0]));

    case FKind::Product: {
      std::vector<Formula> flat;
      for (Formula& k : kids) {
        if (k->kind == FKind::One) continue;
        if (k->kind == FKind::Product)
          for (const Formula& kk : k->kids) flat.push_back(kk);
        else
          flat.push_back(std::move(k));
      }
      if (flat.empty()) return f_one();
      if (flat.size() == 1) return flat[0];
      return f_product(std::move(flat));
    }

    case FKind::Quotient: {
      Formula num = kids[0], den = kids[1];
      if (den->kind == FKind::One) return num;
      if (formula_equal(num, den)) return f_one();
      if (Formula leaf = collapse_quotient(num, den)) return leaf;
      // Cancel structurally identical factors between the sides.
      auto factors = [](const Formula& x) {
        std::vector<Formula> fs;
        if (x->kind == FKind::Product)
          fs = x->kids;
        else
          fs = {x};
        return fs;
      };
      std::vector<Formula> nf = factors(num), df = factors(den);
      bool cancelled = false;
      for (auto it = nf.begin(); it != nf.end();) {
        auto match = std::find_if(df.begin(), df.end(),
                                  [&](const Formula& d) { return formula_equal(*it, d); });
        if (match != df.end()) {
          df.erase(match);
          it = nf.erase(it);
          cancelled = true;
        } else {
          ++it;
        }
      }
      if (cancelled) {
        Formula new_num = nf.empty() ? f_one() : (nf.size() == 1 ? nf[0] : f_product(nf));
        if (df.empty()) return new_num;
        Formula new_den = df.size() == 1 ? df[0] : f_product(df);
        return simplify_node(f_quotient(new_num, new_den));
      }
      return f_quotient(num, den);
    }

    case FKind::Difference: {
      const Formula& a = kids[0];
      const Formula& b = kids[1];
      // P(Y|·) - P(Y, z | ·) -> P(Y, 1-z | ·)
      if (a->kind == FKind::Leaf && b->kind == FKind::Leaf) {
        const Term& tg = a->leaf;
        const Term& tc = b->leaf;
        if (tg.jg == tc.jg && tg.cg == tc.cg && tg.ca == tc.ca &&
            context_subset(tg.ja, tc.ja) && set_size(tc.ja.mask & ~tg.ja.mask) == 1) {
          int v = lowest_var(tc.ja.mask & ~tg.ja.mask);
          Term out = tc;
          out.ja.set(v, 1 - tc.ja.value(v));
          return f_leaf(out);
        }
      }
      // 1 - P(z|·) -> P(1-z|·)
      if (a->kind == FKind::One && b->kind == FKind::Leaf && b->leaf.jg == 0 &&
          set_size(b->leaf.ja.mask) == 1) {
        int v = lowest_var(b->leaf.ja.mask);
        Term out = b->leaf;
        out.ja.set(v, 1 - b->leaf.ja.value(v));
        return f_leaf(out);
      }
      return f_difference(a, b);
    }

    case FKind::Piecewise: {
      const Formula& b0 = kids[0];
      const Formula& b1 = kids[1];
      if (b0->kind == FKind::Leaf && b1->kind == FKind::Leaf) {
        Term t0 = b0->leaf, t1 = b1->leaf;
        if (t0.ja.assigns(f->var) && t0.ja.value(f->var) == 0 && t1.ja.assigns(f->var) &&
            t1.ja.value(f->var) == 1) {
          Term u0 = t0, u1 = t1;
          u0.ja.erase(f->var);
          u1.ja.erase(f->var);
          if (u0 == u1) {
            Term out = u0;
            out.jg |= var_bit(f->var);
            return f_leaf(out);
          }
        }
      }
      return f_piecewise(f->var, b0, b1);
    }

    case FKind::Add: {
      std::vector<Formula> flat;
      for (Formula& k : kids) {
        if (k->kind == FKind::Add)
          for (const Formula& kk : k->kids) flat.push_back(kk);
        else
          flat.push_back(std::move(k));
      }
      if (flat.size() == 1) return flat[0];
      return f_add(std::move(flat));
    }
  }
  return f;
}

}  // namespace

Formula simplify(const Formula& f) { return simplify_node(f); }

// ---------------------------------------------------------------------------
// Plain-style parser

namespace {

class FormulaParser {
 public:
  FormulaParser(std::string_view text, const Ldag& g) : text_(text), g_(g) {}

  Formula parse() {
    Formula f = additive();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input");
    return f;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
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
  [[noreturn]] void fail(const std::string& msg) {
    throw Error("formula parse error at offset " + std::to_string(pos_) + ": " + msg);
  }

  // Identifiers may carry trailing primes, which alias the base variable
  // (the renderer primes shadowed sum variables).
  int ident_var() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    if (pos_ == start) fail("expected identifier");
    std::string name(text_.substr(start, pos_ - start));
    while (pos_ < text_.size() && text_[pos_] == '\'') ++pos_;
    int v = g_.find_var(name);
    if (v < 0) fail("unknown variable " + name);
    return v;
  }

  Formula additive() {
    std::vector<Formula> addends;
    addends.push_back(quotient_level());
    Formula acc;
    for (;;) {
      skip_ws();
      if (accept('+')) {
        addends.push_back(quotient_level());
      } else if (pos_ < text_.size() && text_[pos_] == '-') {
        ++pos_;
        Formula rhs = quotient_level();
        Formula lhs = addends.size() == 1 ? addends[0] : f_add(addends);
        addends = {f_difference(lhs, rhs)};
      } else {
        break;
      }
    }
    return addends.size() == 1 ? addends[0] : f_add(std::move(addends));
  }

  Formula quotient_level() {
    Formula f = product_level();
    while (peek('/')) {
      ++pos_;
      f = f_quotient(f, product_level());
    }
    return f;
  }

  bool starts_factor() {
    skip_ws();
    if (pos_ >= text_.size()) return false;
    char c = text_[pos_];
    return c == 'P' || c == '(' || c == '1' || c == '[' || text_.substr(pos_, 4) == "sum_";
  }

  Formula product_level() {
    std::vector<Formula> factors;
    factors.push_back(postfixed());
    while (starts_factor()) factors.push_back(postfixed());
    return factors.size() == 1 ? factors[0] : f_product(std::move(factors));
  }

  Formula postfixed() {
    Formula f = atom();
    // Substitute suffix: [V=v]. Distinguished from a piecewise factor by the
    // closing bracket right after the value.
    for (;;) {
      skip_ws();
      size_t save = pos_;
      if (!accept('[')) break;
      bool is_subst = false;
      {
        // lookahead: IDENT '=' [01] ']'
        size_t p = pos_;
        while (p < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[p])) ||
                                    text_[p] == '_' || text_[p] == '\''))
          ++p;
        is_subst = p + 2 < text_.size() && text_[p] == '=' &&
                   (text_[p + 1] == '0' || text_[p + 1] == '1') && text_[p + 2] == ']';
      }
      if (!is_subst) {
        pos_ = save;
        break;
      }
      int v = ident_var();
      expect('=');
      int val = text_[pos_++] - '0';
      expect(']');
      f = f_substitute(v, val, f);
    }
    return f;
  }

  Formula atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (text_[pos_] == 'P') return leaf();
    if (accept('1')) return f_one();
    if (accept('(')) {
      Formula f = additive();
      expect(')');
      return f;
    }
    if (text_.substr(pos_, 4) == "sum_") {
      pos_ += 4;
      int v = ident_var();
      return f_sum(v, product_level());
    }
    if (accept('[')) {
      int v0 = ident_var();
      expect('=');
      if (!accept('0')) fail("piecewise must start with =0 branch");
      expect(':');
      Formula b0 = additive();
      expect(';');
      int v1 = ident_var();
      if (v1 != v0) fail("piecewise variable mismatch");
      expect('=');
      if (!accept('1')) fail("piecewise second branch must be =1");
      expect(':');
      Formula b1 = additive();
      expect(']');
      return f_piecewise(v0, b0, b1);
    }
    fail("expected a formula atom");
  }

  Formula leaf() {
    // Scan the balanced P( ... ) span and reuse the term parser, stripping
    // primes first.
    size_t start = pos_;
    if (text_[pos_] != 'P') fail("expected P(");
    ++pos_;
    skip_ws();
    expect('(');
    int depth = 1;
    while (pos_ < text_.size() && depth > 0) {
      if (text_[pos_] == '(') ++depth;
      if (text_[pos_] == ')') --depth;
      ++pos_;
    }
    if (depth != 0) fail("unterminated term");
    std::string span(text_.substr(start, pos_ - start));
    std::erase(span, '\'');
    return f_leaf(parse_term(span, g_));
  }

  std::string_view text_;
  const Ldag& g_;
  size_t pos_ = 0;
};

}  // namespace

Formula parse_formula(std::string_view text, const Ldag& g) {
  return FormulaParser(text, g).parse();
}

// ---------------------------------------------------------------------------
// JSON export / import

namespace {

nlohmann::json to_json_node(const Formula& f, const Ldag& g) {
  using nlohmann::json;
  switch (f->kind) {
    case FKind::Leaf:
      return json{{"kind", "leaf"}, {"term", f->leaf.to_string(g)}};
    case FKind::One:
      return json{{"kind", "one"}};
    case FKind::Sum:
      return json{{"kind", "sum"}, {"var", g.var(f->var).name}, {"body", to_json_node(f->kids[0], g)}};
    case FKind::Product: {
      json kids = json::array();
      for (const Formula& k : f->kids) kids.push_back(to_json_node(k, g));
      return json{{"kind", "product"}, {"factors", kids}};
    }
    case FKind::Quotient:
      return json{{"kind", "quotient"},
                  {"num", to_json_node(f->kids[0], g)},
                  {"den", to_json_node(f->kids[1], g)}};
    case FKind::Difference:
      return json{{"kind", "difference"},
                  {"left", to_json_node(f->kids[0], g)},
                  {"right", to_json_node(f->kids[1], g)}};
    case FKind::Piecewise:
      return json{{"kind", "piecewise"},
                  {"var", g.var(f->var).name},
                  {"if0", to_json_node(f->kids[0], g)},
                  {"if1", to_json_node(f->kids[1], g)}};
    case FKind::Substitute:
      return json{{"kind", "substitute"},
                  {"var", g.var(f->var).name},
                  {"value", f->value},
                  {"body", to_json_node(f->kids[0], g)}};
    case FKind::Add: {
      json kids = json::array();
      for (const Formula& k : f->kids) kids.push_back(to_json_node(k, g));
      return json{{"kind", "add"}, {"terms", kids}};
    }
  }
  return {};
}

Formula from_json_node(const nlohmann::json& j, const Ldag& g) {
  const std::string kind = j.at("kind");
  auto var_of = [&](const std::string& key) {
    int v = g.find_var(j.at(key).get<std::string>());
    if (v < 0) throw Error("unknown variable in formula JSON");
    return v;
  };
  if (kind == "leaf") return f_leaf(parse_term(j.at("term").get<std::string>(), g));
  if (kind == "one") return f_one();
  if (kind == "sum") return f_sum(var_of("var"), from_json_node(j.at("body"), g));
  if (kind == "product") {
    std::vector<Formula> kids;
    for (const auto& k : j.at("factors")) kids.push_back(from_json_node(k, g));
    return f_product(std::move(kids));
  }
  if (kind == "quotient")
    return f_quotient(from_json_node(j.at("num"), g), from_json_node(j.at("den"), g));
  if (kind == "difference")
    return f_difference(from_json_node(j.at("left"), g), from_json_node(j.at("right"), g));
  if (kind == "piecewise")
    return f_piecewise(var_of("var"), from_json_node(j.at("if0"), g),
                       from_json_node(j.at("if1"), g));
  if (kind == "substitute")
    return f_substitute(var_of("var"), j.at("value").get<int>(),
                        from_json_node(j.at("body"), g));
  if (kind == "add") {
    std::vector<Formula> kids;
    for (const auto& k : j.at("terms")) kids.push_back(from_json_node(k, g));
    return f_add(std::move(kids));
  }
  throw Error("unknown formula node kind: " + kind);
}

}  // namespace

std::string formula_to_json(const Formula& f, const Ldag& g) {
  return to_json_node(f, g).dump(2);
}

Formula formula_from_json(std::string_view json_text, const Ldag& g) {
  return from_json_node(nlohmann::json::parse(json_text), g);
}

}  // namespace csid
