#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace degen {

/// Syntax error, unknown identifier or arity mismatch, located by byte offset.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
  std::size_t offset_;
};

/// log/sqrt of a negative, division by zero, or any non-finite result.
class EvalError : public std::runtime_error {
 public:
  EvalError(const std::string& what, std::size_t offset, std::string node);
  std::size_t offset() const { return offset_; }
  const std::string& node() const { return node_; }

 private:
  std::size_t offset_;
  std::string node_;
};

enum class ExprKind { constant, variable, neg, add, sub, mul, div, pow, call };
enum class Func { sin, cos, exp, log, sqrt, abs };

struct ExprNode {
  ExprKind kind = ExprKind::constant;
  double value = 0.0;
  int variable = 0;  // 0..n-2 for x1.., n-1 for t
  Func func = Func::sin;
  std::size_t offset = 0;
  std::shared_ptr<const ExprNode> lhs;
  std::shared_ptr<const ExprNode> rhs;
};

/// Immutable expression over (x1, ..., x_{n-1}, t). Cheap to copy.
///
/// Precedence, highest first: `^` (right-associative), unary minus, `* /`,
/// `+ -`. So `2^3^2` is 512 and `-t^2` is -(t^2). The exponent of `^` may
/// itself start with a unary minus (`2^-1`). Functions: sin cos exp log sqrt
/// abs, each taking one argument. `pi` names the constant.
class Expr {
 public:
  Expr() : Expr(0.0) {}
  explicit Expr(double constant);

  static Expr parse(std::string_view text, int dim);
  static Expr variable(int index, int dim);

  int dim() const { return dim_; }
  const ExprNode& root() const { return *root_; }
  const std::shared_ptr<const ExprNode>& root_ptr() const { return root_; }

  /// `point` holds (x1, ..., x_{n-1}, t); its size must equal dim().
  double eval(std::span<const double> point) const;
  double operator()(std::span<const double> point) const { return eval(point); }

  bool is_constant() const { return root_->kind == ExprKind::constant; }
  /// Degree in all variables if the tree is syntactically a polynomial, else -1.
  int polynomial_degree() const;

  /// Fully parenthesized text that parses back to an identical tree.
  std::string to_string() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);

 private:
  Expr(std::shared_ptr<const ExprNode> root, int dim) : root_(std::move(root)), dim_(dim) {}
  static Expr binary(ExprKind kind, const Expr& a, const Expr& b);

  std::shared_ptr<const ExprNode> root_;
  int dim_ = 0;  // 0 for dimension-free constants
};

/// Structural equality (constants compared bitwise-equal, offsets ignored).
bool structurally_equal(const ExprNode& a, const ExprNode& b);

}  // namespace degen
