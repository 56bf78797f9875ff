#include "tubesynth/expression.hpp"

#include <cctype>
#include <cstdlib>
#include <cmath>
#include <numbers>
#include <vector>

#include "tubesynth/error.hpp"

namespace tubesynth::plants {

struct Expression::Node {
  enum class Op { Number, Variable, Neg, Add, Sub, Mul, Div, Pow, Call } op;
  double number = 0.0;
  std::size_t slot = 0;
  double (*fn)(double) = nullptr;
  std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Op op, std::vector<NodePtr> args) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

double fn_sin(double x) { return std::sin(x); }
double fn_cos(double x) { return std::cos(x); }
double fn_tan(double x) { return std::tan(x); }
double fn_exp(double x) { return std::exp(x); }
double fn_log(double x) { return std::log(x); }
double fn_sqrt(double x) { return std::sqrt(x); }
double fn_abs(double x) { return std::abs(x); }
double fn_tanh(double x) { return std::tanh(x); }

class Parser {
 public:
  Parser(std::string_view text, const Expression::Resolver& resolve) : text_(text), resolve_(resolve) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != text_.size()) error("unexpected '" + std::string(1, text_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::Config, "expression '" + std::string(text_) + "' at column " + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) error(std::string("expected '") + c + "'");
  }

  NodePtr sum() {
    NodePtr lhs = product();
    while (true) {
      if (accept('+')) lhs = make(Node::Op::Add, {lhs, product()});
      else if (accept('-')) lhs = make(Node::Op::Sub, {lhs, product()});
      else return lhs;
    }
  }

  NodePtr product() {
    NodePtr lhs = unary();
    while (true) {
      if (accept('*')) lhs = make(Node::Op::Mul, {lhs, unary()});
      else if (accept('/')) lhs = make(Node::Op::Div, {lhs, unary()});
      else return lhs;
    }
  }

  // Unary minus binds looser than ^, so -x^2 is -(x^2).
  NodePtr unary() {
    if (accept('-')) return make(Node::Op::Neg, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = atom();
    if (accept('^')) return make(Node::Op::Pow, {base, unary()});
    return base;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= text_.size()) error("unexpected end of expression");
    const char c = text_[pos_];
    if (accept('(')) {
      NodePtr n = sum();
      expect(')');
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    error("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::string rest(text_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    const auto used = static_cast<std::size_t>(end - rest.c_str());
    if (used == 0) error("malformed number");
    pos_ += used;
    auto n = std::make_shared<Node>();
    n->op = Node::Op::Number;
    n->number = v;
    return n;
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    const std::string_view id = text_.substr(start, pos_ - start);
    if (accept('(')) {
      if (id == "pow") {
        NodePtr a = sum();
        expect(',');
        NodePtr b = sum();
        expect(')');
        return make(Node::Op::Pow, {a, b});
      }
      double (*fn)(double) = nullptr;
      if (id == "sin") fn = fn_sin;
      else if (id == "cos") fn = fn_cos;
      else if (id == "tan") fn = fn_tan;
      else if (id == "exp") fn = fn_exp;
      else if (id == "log") fn = fn_log;
      else if (id == "sqrt") fn = fn_sqrt;
      else if (id == "abs") fn = fn_abs;
      else if (id == "tanh") fn = fn_tanh;
      else error("unknown function '" + std::string(id) + "'");
      NodePtr arg = sum();
      expect(')');
      auto n = std::make_shared<Node>();
      n->op = Node::Op::Call;
      n->fn = fn;
      n->args = {arg};
      return n;
    }
    auto n = std::make_shared<Node>();
    if (id == "pi") {
      n->op = Node::Op::Number;
      n->number = std::numbers::pi;
      return n;
    }
    auto slot = resolve_(id);
    if (!slot) error("unknown symbol '" + std::string(id) + "'");
    n->op = Node::Op::Variable;
    n->slot = *slot;
    return n;
  }

  std::string_view text_;
  const Expression::Resolver& resolve_;
  std::size_t pos_ = 0;
};

double evaluate(const Node& n, std::span<const double> vars) {
  switch (n.op) {
    case Node::Op::Number: return n.number;
    case Node::Op::Variable: return vars[n.slot];
    case Node::Op::Neg: return -evaluate(*n.args[0], vars);
    case Node::Op::Add: return evaluate(*n.args[0], vars) + evaluate(*n.args[1], vars);
    case Node::Op::Sub: return evaluate(*n.args[0], vars) - evaluate(*n.args[1], vars);
    case Node::Op::Mul: return evaluate(*n.args[0], vars) * evaluate(*n.args[1], vars);
    case Node::Op::Div: return evaluate(*n.args[0], vars) / evaluate(*n.args[1], vars);
    case Node::Op::Pow: return std::pow(evaluate(*n.args[0], vars), evaluate(*n.args[1], vars));
    case Node::Op::Call: return n.fn(evaluate(*n.args[0], vars));
  }
  return 0.0;
}

}  // namespace

Expression Expression::parse(std::string_view text, const Resolver& resolve) {
  Expression e;
  e.root_ = Parser(text, resolve).parse();
  e.source_ = std::string(text);
  return e;
}

double Expression::eval(std::span<const double> vars) const {
  if (!root_) fail(ErrorKind::Structural, "empty expression");
  return evaluate(*root_, vars);
}

}  // namespace tubesynth::plants
