#include "degen/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <vector>

namespace degen {

ParseError::ParseError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at offset " + std::to_string(offset)),
      reason_(what),
      offset_(offset) {}

EvalError::EvalError(const std::string& what, std::size_t offset, std::string node)
    : std::runtime_error(what + " in '" + node + "' (offset " + std::to_string(offset) + ")"),
      offset_(offset),
      node_(std::move(node)) {}

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make_node(ExprNode node) { return std::make_shared<const ExprNode>(std::move(node)); }

const char* func_name(Func f) {
  switch (f) {
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::exp: return "exp";
    case Func::log: return "log";
    case Func::sqrt: return "sqrt";
    case Func::abs: return "abs";
  }
  return "?";
}

std::string variable_name(int index, int dim) {
  return index == dim - 1 ? std::string("t") : "x" + std::to_string(index + 1);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void print(const ExprNode& n, int dim, std::string& out) {
  switch (n.kind) {
    case ExprKind::constant:
      if (std::signbit(n.value)) {
        out += "(-" + format_number(-n.value) + ")";
      } else {
        out += format_number(n.value);
      }
      return;
    case ExprKind::variable: out += variable_name(n.variable, dim); return;
    case ExprKind::neg:
      out += "(-";
      print(*n.lhs, dim, out);
      out += ")";
      return;
    case ExprKind::call:
      out += func_name(n.func);
      out += "(";
      print(*n.lhs, dim, out);
      out += ")";
      return;
    default: break;
  }
  const char op = n.kind == ExprKind::add   ? '+'
                  : n.kind == ExprKind::sub ? '-'
                  : n.kind == ExprKind::mul ? '*'
                  : n.kind == ExprKind::div ? '/'
                                            : '^';
  out += "(";
  print(*n.lhs, dim, out);
  out += op;
  print(*n.rhs, dim, out);
  out += ")";
}

// Binding powers: + - = 1, * / = 2, unary minus = 3, ^ = 4.
constexpr int kUnaryPrec = 3;

class Parser {
 public:
  Parser(std::string_view text, int dim) : text_(text), dim_(dim) {}

  NodePtr parse() {
    NodePtr e = parse_binary(1);
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' ||
                                   text_[pos_] == '\n' || text_[pos_] == '\r'))
      ++pos_;
  }

  static int binary_prec(char c) {
    switch (c) {
      case '+':
      case '-': return 1;
      case '*':
      case '/': return 2;
      case '^': return 4;
      default: return 0;
    }
  }

  NodePtr parse_binary(int min_prec) {
    NodePtr lhs = parse_prefix();
    for (;;) {
      skip_ws();
      if (pos_ >= text_.size()) return lhs;
      const char c = text_[pos_];
      const int prec = binary_prec(c);
      if (prec == 0 || prec < min_prec) return lhs;
      const std::size_t at = pos_;
      ++pos_;
      const bool right_assoc = c == '^';
      NodePtr rhs = parse_binary(right_assoc ? prec : prec + 1);
      ExprNode n;
      n.kind = c == '+'   ? ExprKind::add
               : c == '-' ? ExprKind::sub
               : c == '*' ? ExprKind::mul
               : c == '/' ? ExprKind::div
                          : ExprKind::pow;
      n.offset = at;
      n.lhs = std::move(lhs);
      n.rhs = std::move(rhs);
      lhs = make_node(std::move(n));
    }
  }

  NodePtr parse_prefix() {
    skip_ws();
    if (pos_ >= text_.size()) fail("expected operand");
    const char c = text_[pos_];
    const std::size_t at = pos_;
    if (c == '-') {
      ++pos_;
      ExprNode n;
      n.kind = ExprKind::neg;
      n.offset = at;
      n.lhs = parse_binary(kUnaryPrec);
      return make_node(std::move(n));
    }
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_binary(1);
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
      ++pos_;
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_, ++n;
      return n;
    };
    std::size_t nd = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      nd += digits();
    }
    if (nd == 0) {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail("malformed exponent");
    }
    double v = 0.0;
    const auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (res.ec != std::errc() || !std::isfinite(v)) {
      pos_ = start;
      fail("number out of range");
    }
    ExprNode n;
    n.kind = ExprKind::constant;
    n.value = v;
    n.offset = start;
    return make_node(std::move(n));
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    static constexpr std::pair<std::string_view, Func> kFuncs[] = {
        {"sin", Func::sin}, {"cos", Func::cos},   {"exp", Func::exp},
        {"log", Func::log}, {"sqrt", Func::sqrt}, {"abs", Func::abs}};
    for (const auto& [fname, f] : kFuncs) {
      if (name != fname) continue;
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != '(')
        throw ParseError("function '" + std::string(name) + "' expects 1 argument", start);
      ++pos_;
      std::vector<NodePtr> args;
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ')') {
        ++pos_;
      } else {
        for (;;) {
          args.push_back(parse_binary(1));
          skip_ws();
          if (pos_ < text_.size() && text_[pos_] == ',') {
            ++pos_;
            continue;
          }
          if (pos_ < text_.size() && text_[pos_] == ')') {
            ++pos_;
            break;
          }
          fail("expected ',' or ')'");
        }
      }
      if (args.size() != 1)
        throw ParseError("function '" + std::string(name) + "' expects 1 argument, got " +
                             std::to_string(args.size()),
                         start);
      ExprNode n;
      n.kind = ExprKind::call;
      n.func = f;
      n.offset = start;
      n.lhs = std::move(args.front());
      return make_node(std::move(n));
    }

    ExprNode n;
    n.offset = start;
    if (name == "pi") {
      n.kind = ExprKind::constant;
      n.value = std::numbers::pi;
      return make_node(std::move(n));
    }
    if (name == "t") {
      n.kind = ExprKind::variable;
      n.variable = dim_ - 1;
      return make_node(std::move(n));
    }
    if (name.size() >= 2 && name[0] == 'x') {
      int k = 0;
      const auto res = std::from_chars(name.data() + 1, name.data() + name.size(), k);
      if (res.ec == std::errc() && res.ptr == name.data() + name.size() && k >= 1 &&
          k <= dim_ - 1 && name[1] != '0') {
        n.kind = ExprKind::variable;
        n.variable = k - 1;
        return make_node(std::move(n));
      }
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view text_;
  int dim_;
  std::size_t pos_ = 0;
};

double eval_node(const ExprNode& n, std::span<const double> p, int dim) {
  auto domain_error = [&](const char* what) -> double {
    std::string text;
    print(n, dim, text);
    throw EvalError(what, n.offset, text);
  };
  double r = 0.0;
  switch (n.kind) {
    case ExprKind::constant: return n.value;
    case ExprKind::variable: return p[n.variable];
    case ExprKind::neg: return -eval_node(*n.lhs, p, dim);
    case ExprKind::add: r = eval_node(*n.lhs, p, dim) + eval_node(*n.rhs, p, dim); break;
    case ExprKind::sub: r = eval_node(*n.lhs, p, dim) - eval_node(*n.rhs, p, dim); break;
    case ExprKind::mul: r = eval_node(*n.lhs, p, dim) * eval_node(*n.rhs, p, dim); break;
    case ExprKind::div: {
      const double num = eval_node(*n.lhs, p, dim);
      const double den = eval_node(*n.rhs, p, dim);
      if (den == 0.0) return domain_error("division by zero");
      r = num / den;
      break;
    }
    case ExprKind::pow: {
      const double base = eval_node(*n.lhs, p, dim);
      const double ex = eval_node(*n.rhs, p, dim);
      if (base == 0.0 && ex < 0.0) return domain_error("zero to a negative power");
      if (base < 0.0 && ex != std::floor(ex))
        return domain_error("negative base to a non-integer power");
      r = std::pow(base, ex);
      break;
    }
    case ExprKind::call: {
      const double x = eval_node(*n.lhs, p, dim);
      switch (n.func) {
        case Func::sin: r = std::sin(x); break;
        case Func::cos: r = std::cos(x); break;
        case Func::exp: r = std::exp(x); break;
        case Func::log:
          if (!(x > 0.0)) return domain_error("log of non-positive argument");
          r = std::log(x);
          break;
        case Func::sqrt:
          if (x < 0.0) return domain_error("sqrt of negative argument");
          r = std::sqrt(x);
          break;
        case Func::abs: r = std::abs(x); break;
      }
      break;
    }
  }
  if (!std::isfinite(r)) return domain_error("non-finite result");
  return r;
}

int degree(const ExprNode& n) {
  switch (n.kind) {
    case ExprKind::constant: return 0;
    case ExprKind::variable: return 1;
    case ExprKind::neg: return degree(*n.lhs);
    case ExprKind::add:
    case ExprKind::sub: {
      const int a = degree(*n.lhs), b = degree(*n.rhs);
      return (a < 0 || b < 0) ? -1 : std::max(a, b);
    }
    case ExprKind::mul: {
      const int a = degree(*n.lhs), b = degree(*n.rhs);
      return (a < 0 || b < 0) ? -1 : a + b;
    }
    case ExprKind::div: {
      const int a = degree(*n.lhs), b = degree(*n.rhs);
      return (a < 0 || b != 0) ? -1 : a;
    }
    case ExprKind::pow: {
      const int a = degree(*n.lhs), b = degree(*n.rhs);
      if (a == 0 && b == 0) return 0;
      if (a < 0 || n.rhs->kind != ExprKind::constant) return -1;
      const double k = n.rhs->value;
      if (k < 0.0 || k != std::floor(k) || k > 64.0) return -1;
      return a * static_cast<int>(k);
    }
    case ExprKind::call: return degree(*n.lhs) == 0 ? 0 : -1;
  }
  return -1;
}

}  // namespace

Expr::Expr(double constant) {
  ExprNode n;
  n.kind = ExprKind::constant;
  n.value = constant;
  root_ = make_node(std::move(n));
  dim_ = 0;
}

Expr Expr::parse(std::string_view text, int dim) {
  if (dim != 2 && dim != 3) throw ParseError("dimension must be 2 or 3", 0);
  Parser p(text, dim);
  return Expr(p.parse(), dim);
}

Expr Expr::variable(int index, int dim) {
  ExprNode n;
  n.kind = ExprKind::variable;
  n.variable = index;
  return Expr(make_node(std::move(n)), dim);
}

double Expr::eval(std::span<const double> point) const {
  if (dim_ != 0 && static_cast<int>(point.size()) != dim_)
    throw std::invalid_argument("point dimension " + std::to_string(point.size()) +
                                " does not match expression dimension " + std::to_string(dim_));
  return eval_node(*root_, point, dim_ == 0 ? static_cast<int>(point.size()) : dim_);
}

int Expr::polynomial_degree() const { return degree(*root_); }

std::string Expr::to_string() const {
  std::string out;
  print(*root_, dim_ == 0 ? 2 : dim_, out);
  return out;
}

Expr Expr::binary(ExprKind kind, const Expr& a, const Expr& b) {
  if (a.dim_ != 0 && b.dim_ != 0 && a.dim_ != b.dim_)
    throw std::invalid_argument("combining expressions of different dimension");
  ExprNode n;
  n.kind = kind;
  n.lhs = a.root_;
  n.rhs = b.root_;
  return Expr(make_node(std::move(n)), a.dim_ != 0 ? a.dim_ : b.dim_);
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(ExprKind::add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(ExprKind::sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(ExprKind::mul, a, b); }
Expr operator-(const Expr& a) {
  ExprNode n;
  n.kind = ExprKind::neg;
  n.lhs = a.root_;
  return Expr(make_node(std::move(n)), a.dim_);
}

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::constant: return a.value == b.value;
    case ExprKind::variable: return a.variable == b.variable;
    case ExprKind::neg: return structurally_equal(*a.lhs, *b.lhs);
    case ExprKind::call: return a.func == b.func && structurally_equal(*a.lhs, *b.lhs);
    default: return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
  }
}

}  // namespace degen
