#pragma once

#include <memory>
#include <string>

#include "balab/field.hpp"
#include "balab/grid.hpp"

namespace balab {

/**
 * Compiled scalar expression in the real torus coordinates x0..x5 and the
 * time variable t. Supported grammar:
 *
 *   expr   := term (('+'|'-') term)*
 *   term   := factor (('*'|'/') factor)*
 *   factor := unary ('^' factor)?          (right-associative power)
 *   unary  := '-' unary | primary
 *   primary:= number | 'pi' | 't' | 'x0'..'x5'
 *           | ('sin'|'cos'|'exp'|'sqrt'|'tanh') '(' expr ')'
 *           | '(' expr ')'
 *
 * Parse errors throw std::invalid_argument with the character position.
 */
class Expression {
 public:
  struct Node;

  /** Parse the text; throws std::invalid_argument on malformed input. */
  static Expression parse(const std::string& text);

  Expression();
  Expression(Expression&&) noexcept;
  Expression& operator=(Expression&&) noexcept;
  Expression(const Expression&) = delete;
  Expression& operator=(const Expression&) = delete;
  ~Expression();

  /** Evaluate at real coordinates x (2n entries, n <= 3) and time t. */
  double eval(const double* x, double t) const;

  /** True if the expression references the time variable. */
  bool depends_on_time() const;

  const std::string& text() const { return text_; }

  /** Sample over a grid at fixed time t. */
  RealField sample(const GridDomain& g, double t = 0.0) const;

 private:
  std::unique_ptr<Node> root_;
  std::string text_;
};

}  // namespace balab
