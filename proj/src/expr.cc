#include "balab/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace balab {

struct Expression::Node {
  enum class Kind { number, coordinate, time, add, sub, mul, div, pow, neg, call };
  Kind kind;
  double value = 0.0;            // number
  int coord = 0;                 // coordinate index
  int func = 0;                  // 0 sin, 1 cos, 2 exp, 3 sqrt, 4 tanh
  std::unique_ptr<Node> a, b;
};

namespace {

using Node = Expression::Node;
using Kind = Node::Kind;

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  std::unique_ptr<Node> run() {
    auto e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression error at position " + std::to_string(pos_) + ": " +
                                what + " in \"" + s_ + "\"");
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::unique_ptr<Node> expr() {
    auto lhs = term();
    for (;;) {
      if (eat('+')) {
        auto n = std::make_unique<Node>();
        n->kind = Kind::add;
        n->a = std::move(lhs);
        n->b = term();
        lhs = std::move(n);
      } else if (eat('-')) {
        auto n = std::make_unique<Node>();
        n->kind = Kind::sub;
        n->a = std::move(lhs);
        n->b = term();
        lhs = std::move(n);
      } else {
        return lhs;
      }
    }
  }

  std::unique_ptr<Node> term() {
    auto lhs = factor();
    for (;;) {
      if (eat('*')) {
        auto n = std::make_unique<Node>();
        n->kind = Kind::mul;
        n->a = std::move(lhs);
        n->b = factor();
        lhs = std::move(n);
      } else if (eat('/')) {
        auto n = std::make_unique<Node>();
        n->kind = Kind::div;
        n->a = std::move(lhs);
        n->b = factor();
        lhs = std::move(n);
      } else {
        return lhs;
      }
    }
  }

  std::unique_ptr<Node> factor() {
    auto base = unary();
    if (eat('^')) {
      auto n = std::make_unique<Node>();
      n->kind = Kind::pow;
      n->a = std::move(base);
      n->b = factor();  // right-associative
      return n;
    }
    return base;
  }

  std::unique_ptr<Node> unary() {
    if (eat('-')) {
      auto n = std::make_unique<Node>();
      n->kind = Kind::neg;
      n->a = unary();
      return n;
    }
    return primary();
  }

  std::unique_ptr<Node> primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    if (eat('(')) {
      auto e = expr();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    fail("expected a number, name, or '('");
  }

  std::unique_ptr<Node> number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
            s_[pos_] == 'e' || s_[pos_] == 'E' ||
            ((s_[pos_] == '+' || s_[pos_] == '-') && pos_ > start &&
             (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
      ++pos_;
    std::size_t used = 0;
    double v = 0.0;
    const std::string tok = s_.substr(start, pos_ - start);
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      fail("malformed number \"" + tok + "\"");
    }
    if (used != tok.size()) fail("malformed number \"" + tok + "\"");
    auto n = std::make_unique<Node>();
    n->kind = Kind::number;
    n->value = v;
    return n;
  }

  std::unique_ptr<Node> identifier() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    const std::string name = s_.substr(start, pos_ - start);
    if (name == "pi") {
      auto n = std::make_unique<Node>();
      n->kind = Kind::number;
      n->value = std::numbers::pi;
      return n;
    }
    if (name == "t") {
      auto n = std::make_unique<Node>();
      n->kind = Kind::time;
      return n;
    }
    if (name.size() == 2 && name[0] == 'x' && name[1] >= '0' && name[1] <= '5') {
      auto n = std::make_unique<Node>();
      n->kind = Kind::coordinate;
      n->coord = name[1] - '0';
      return n;
    }
    int func = -1;
    if (name == "sin") func = 0;
    else if (name == "cos") func = 1;
    else if (name == "exp") func = 2;
    else if (name == "sqrt") func = 3;
    else if (name == "tanh") func = 4;
    if (func >= 0) {
      if (!eat('(')) fail("function '" + name + "' needs '('");
      auto arg = expr();
      if (!eat(')')) fail("missing ')' after argument of '" + name + "'");
      auto n = std::make_unique<Node>();
      n->kind = Kind::call;
      n->func = func;
      n->a = std::move(arg);
      return n;
    }
    fail("unknown name \"" + name + "\"");
  }
};

double eval_node(const Node* n, const double* x, double t) {
  switch (n->kind) {
    case Kind::number: return n->value;
    case Kind::coordinate: return x[n->coord];
    case Kind::time: return t;
    case Kind::add: return eval_node(n->a.get(), x, t) + eval_node(n->b.get(), x, t);
    case Kind::sub: return eval_node(n->a.get(), x, t) - eval_node(n->b.get(), x, t);
    case Kind::mul: return eval_node(n->a.get(), x, t) * eval_node(n->b.get(), x, t);
    case Kind::div: return eval_node(n->a.get(), x, t) / eval_node(n->b.get(), x, t);
    case Kind::pow: return std::pow(eval_node(n->a.get(), x, t), eval_node(n->b.get(), x, t));
    case Kind::neg: return -eval_node(n->a.get(), x, t);
    case Kind::call: {
      double v = eval_node(n->a.get(), x, t);
      switch (n->func) {
        case 0: return std::sin(v);
        case 1: return std::cos(v);
        case 2: return std::exp(v);
        case 3: return std::sqrt(v);
        default: return std::tanh(v);
      }
    }
  }
  return 0.0;
}

bool node_uses_time(const Node* n) {
  if (!n) return false;
  if (n->kind == Kind::time) return true;
  return node_uses_time(n->a.get()) || node_uses_time(n->b.get());
}

}  // namespace

Expression::Expression() = default;
Expression::Expression(Expression&&) noexcept = default;
Expression& Expression::operator=(Expression&&) noexcept = default;
Expression::~Expression() = default;

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.root_ = Parser(text).run();
  e.text_ = text;
  return e;
}

double Expression::eval(const double* x, double t) const {
  if (!root_) throw std::logic_error("Expression: evaluating an empty expression");
  return eval_node(root_.get(), x, t);
}

bool Expression::depends_on_time() const { return node_uses_time(root_.get()); }

RealField Expression::sample(const GridDomain& g, double t) const {
  RealField out(g.num_points());
  // size 6 so that any grammar coordinate x0..x5 reads a defined (zero) value
  std::vector<double> x(std::max<std::size_t>(6, static_cast<std::size_t>(2 * g.n)), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    g.coordinates(i, x.data());
    out[i] = eval(x.data(), t);
  }
  return out;
}

}  // namespace balab
