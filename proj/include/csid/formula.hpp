#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "csid/table.hpp"
#include "csid/term.hpp"

namespace csid {

enum class FKind {
  Leaf,        // conditional probability readable from an input table
  One,         // constant 1
  Sum,         // sum of the body over both values of a variable
  Product,     // n-ary product
  Quotient,    // num / den
  Difference,  // left - right
  Piecewise,   // selects the branch matching the bound value of a variable
  Substitute,  // body with a variable fixed to a value
  Add,         // n-ary sum of expressions
};

class FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

class FormulaNode {
 public:
  FKind kind;
  Term leaf;                  // Leaf only
  int var = -1;               // Sum / Piecewise / Substitute
  int value = -1;             // Substitute only
  std::vector<Formula> kids;  // Sum/Substitute: 1; Quotient/Difference/Piecewise: 2; n-ary rest
};

Formula f_leaf(const Term& t);
Formula f_one();
Formula f_sum(int var, Formula body);
Formula f_product(std::vector<Formula> factors);
Formula f_quotient(Formula num, Formula den);
Formula f_difference(Formula left, Formula right);
Formula f_piecewise(int var, Formula if0, Formula if1);
Formula f_substitute(int var, int value, Formula body);
Formula f_add(std::vector<Formula> terms);

bool formula_equal(const Formula& a, const Formula& b);
VarSet free_vars(const Formula& f);
int node_count(const Formula& f);

// Evaluates against joint input tables; each table must be a joint
// distribution over its variables and every leaf must fall inside one.
// `binding` has to cover the free variables. Denominators below 1e-12 are
// reported as errors (positive inputs keep them away).
double evaluate(const Formula& f, std::span<const DiscreteTable> tables, const Context& binding);

enum class RenderStyle { Plain, Latex };
std::string render(const Formula& f, const Ldag& g, RenderStyle style = RenderStyle::Plain);

// Conservative local rewrites only (marginal/chain-rule collapses into
// leaves, substitution push-down, product flattening, unit elimination).
// Evaluation-equivalent to the input.
Formula simplify(const Formula& f);

// Inverse of render for the plain style.
Formula parse_formula(std::string_view text, const Ldag& g);

std::string formula_to_json(const Formula& f, const Ldag& g);
Formula formula_from_json(std::string_view json_text, const Ldag& g);

}  // namespace csid
