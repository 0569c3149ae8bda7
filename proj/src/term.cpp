#include "csid/term.hpp"

#include <cctype>

namespace csid {

namespace {

void append_side(std::string& out, VarSet general, const Context& assigned, const Ldag& g,
                 bool spaced) {
  bool first = true;
  for (int v : vars_of(general | assigned.mask)) {
    if (!first) out += spaced ? ", " : ",";
    first = false;
    out += g.var(v).name;
    if (assigned.assigns(v)) {
      out += '=';
      out += assigned.value(v) ? '1' : '0';
    }
  }
}

}  // namespace

std::string Term::to_string(const Ldag& g, bool spaced) const {
  std::string out = "P(";
  append_side(out, jg, ja, g, spaced);
  if (cond_vars() != 0) {
    out += spaced ? " | " : "|";
    append_side(out, cg, ca, g, spaced);
  }
  out += ')';
  return out;
}

Term parse_term(std::string_view text, const Ldag& g) {
  size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto fail = [&](const std::string& msg) -> void {
    throw Error("bad term '" + std::string(text) + "': " + msg);
  };

  skip_ws();
  if (pos >= text.size() || text[pos] != 'P') fail("expected P(");
  ++pos;
  skip_ws();
  if (pos >= text.size() || text[pos] != '(') fail("expected P(");
  ++pos;

  Term t;
  bool cond_side = false;
  for (;;) {
    skip_ws();
    if (pos >= text.size()) fail("unterminated term");
    if (text[pos] == ')') {
      ++pos;
      break;
    }
    if (text[pos] == '|') {
      if (cond_side) fail("two '|' separators");
      cond_side = true;
      ++pos;
      continue;
    }
    if (text[pos] == ',') {
      ++pos;
      continue;
    }
    size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    if (pos == start) fail("expected variable name");
    std::string name(text.substr(start, pos - start));
    int v = g.find_var(name);
    if (v < 0) fail("unknown variable " + name);
    skip_ws();
    int value = -1;
    if (pos < text.size() && text[pos] == '=') {
      ++pos;
      skip_ws();
      if (pos < text.size() && (text[pos] == '0' || text[pos] == '1'))
        value = text[pos++] - '0';
      else
        fail("expected 0 or 1");
    }
    if (has_var(t.all_vars(), v)) fail("variable " + name + " appears twice");
    if (value < 0) {
      (cond_side ? t.cg : t.jg) |= var_bit(v);
    } else {
      (cond_side ? t.ca : t.ja).set(v, value);
    }
  }
  skip_ws();
  if (pos != text.size()) fail("trailing input");
  if (!t.valid()) fail("empty joint side");
  return t;
}

}  // namespace csid
