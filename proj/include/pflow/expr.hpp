#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pflow::expr {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
        offset(offset) {}
  std::size_t offset;
};

class NonIntegerExponent : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

/// Parse tree over +, -, *, ^(non-negative integer), variables and literals.
struct Ast {
  enum class Kind { Num, Var, Add, Sub, Mul, Neg, Pow };
  Kind kind;
  double value = 0;       // Num
  std::size_t var = 0;    // Var
  long exponent = 0;      // Pow
  std::shared_ptr<const Ast> lhs, rhs;
};

using AstPtr = std::shared_ptr<const Ast>;

/// Parses an expression over variables x1..xn (aliases x,y,z,w for n <= 4).
/// Precedence: ^ binds tighter than unary minus, then *, then + and -.
AstPtr parse(std::string_view text, std::size_t nvars);

double eval(const Ast& e, std::span<const double> vars);

/// Symbolic partial derivative in variable `var`, lightly simplified.
AstPtr derivative(const Ast& e, std::size_t var);

/// Fully parenthesized rendering; parse(to_string(e)) rebuilds e.
std::string to_string(const Ast& e);

bool equal(const Ast& a, const Ast& b);

}  // namespace pflow::expr
