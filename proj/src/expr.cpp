#include "pflow/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace pflow::expr {
namespace {

AstPtr num(double v) {
  auto n = std::make_shared<Ast>();
  n->kind = Ast::Kind::Num;
  n->value = v;
  return n;
}

AstPtr var(std::size_t i) {
  auto n = std::make_shared<Ast>();
  n->kind = Ast::Kind::Var;
  n->var = i;
  return n;
}

bool is_num(const AstPtr& e, double v) {
  return e->kind == Ast::Kind::Num && e->value == v;
}

AstPtr add(AstPtr a, AstPtr b) {
  if (is_num(a, 0)) return b;
  if (is_num(b, 0)) return a;
  if (a->kind == Ast::Kind::Num && b->kind == Ast::Kind::Num)
    return num(a->value + b->value);
  auto n = std::make_shared<Ast>();
  n->kind = Ast::Kind::Add;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

AstPtr neg(AstPtr a);

AstPtr sub(AstPtr a, AstPtr b) {
  if (is_num(b, 0)) return a;
  if (is_num(a, 0)) return neg(b);
  if (a->kind == Ast::Kind::Num && b->kind == Ast::Kind::Num)
    return num(a->value - b->value);
  auto n = std::make_shared<Ast>();
  n->kind = Ast::Kind::Sub;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

AstPtr mul(AstPtr a, AstPtr b) {
  if (is_num(a, 0) || is_num(b, 0)) return num(0);
  if (is_num(a, 1)) return b;
  if (is_num(b, 1)) return a;
  if (a->kind == Ast::Kind::Num && b->kind == Ast::Kind::Num)
    return num(a->value * b->value);
  auto n = std::make_shared<Ast>();
  n->kind = Ast::Kind::Mul;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

AstPtr neg(AstPtr a) {
  if (a->kind == Ast::Kind::Num) return num(-a->value);
  auto n = std::make_shared<Ast>();
  n->kind = Ast::Kind::Neg;
  n->lhs = std::move(a);
  return n;
}

AstPtr pow_node(AstPtr base, long k) {
  if (k == 0) return num(1);
  if (k == 1) return base;
  auto n = std::make_shared<Ast>();
  n->kind = Ast::Kind::Pow;
  n->lhs = std::move(base);
  n->exponent = k;
  return n;
}

class Parser {
 public:
  Parser(std::string_view text, std::size_t nvars)
      : text_(text), nvars_(nvars) {}

  AstPtr run() {
    AstPtr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size())
      throw SyntaxError("unexpected trailing input", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool at(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool eat(char c) {
    if (!at(c)) return false;
    ++pos_;
    return true;
  }

  AstPtr parse_expr() {
    AstPtr e = parse_term();
    for (;;) {
      if (eat('+')) {
        e = add(e, parse_term());
      } else if (eat('-')) {
        e = sub(e, parse_term());
      } else {
        return e;
      }
    }
  }

  AstPtr parse_term() {
    AstPtr e = parse_unary();
    while (eat('*')) e = mul(e, parse_unary());
    return e;
  }

  AstPtr parse_unary() {
    if (eat('-')) return neg(parse_unary());
    return parse_power();
  }

  AstPtr parse_power() {
    AstPtr base = parse_atom();
    if (!eat('^')) return base;
    skip_ws();
    std::size_t start = pos_;
    if (pos_ >= text_.size())
      throw SyntaxError("expected exponent after '^'", pos_);
    if (text_[pos_] == '-' || text_[pos_] == '+')
      throw NonIntegerExponent("exponent must be a non-negative integer",
                               pos_);
    long k = 0;
    auto [p, ec] = std::from_chars(text_.data() + pos_,
                                   text_.data() + text_.size(), k);
    if (ec != std::errc{})
      throw NonIntegerExponent("exponent must be a non-negative integer",
                               start);
    std::size_t end = static_cast<std::size_t>(p - text_.data());
    if (end < text_.size() && (text_[end] == '.' || text_[end] == 'e' ||
                               text_[end] == 'E'))
      throw NonIntegerExponent("exponent must be a non-negative integer",
                               start);
    pos_ = end;
    return pow_node(base, k);
  }

  AstPtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      AstPtr e = parse_expr();
      if (!eat(')')) throw SyntaxError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    throw SyntaxError(std::string("unexpected character '") + c + "'", pos_);
  }

  AstPtr parse_number() {
    double v = 0;
    auto [p, ec] =
        std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
    if (ec != std::errc{}) throw SyntaxError("malformed number", pos_);
    pos_ = static_cast<std::size_t>(p - text_.data());
    return num(v);
  }

  AstPtr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_'))
      ++pos_;
    std::string_view name = text_.substr(start, pos_ - start);
    std::size_t idx = nvars_;
    if (name.size() >= 2 && name[0] == 'x' &&
        std::isdigit(static_cast<unsigned char>(name[1]))) {
      std::size_t k = 0;
      auto [p, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), k);
      if (ec == std::errc{} && p == name.data() + name.size() && k >= 1)
        idx = k - 1;
    } else if (name.size() == 1 && nvars_ <= 4) {
      switch (name[0]) {
        case 'x': idx = 0; break;
        case 'y': idx = 1; break;
        case 'z': idx = 2; break;
        case 'w': idx = 3; break;
        default: break;
      }
    }
    if (idx >= nvars_)
      throw SyntaxError("unknown variable '" + std::string(name) + "'", start);
    return var(idx);
  }

  std::string_view text_;
  std::size_t nvars_;
  std::size_t pos_ = 0;
};

}  // namespace

AstPtr parse(std::string_view text, std::size_t nvars) {
  return Parser(text, nvars).run();
}

double eval(const Ast& e, std::span<const double> vars) {
  switch (e.kind) {
    case Ast::Kind::Num: return e.value;
    case Ast::Kind::Var: return vars[e.var];
    case Ast::Kind::Add: return eval(*e.lhs, vars) + eval(*e.rhs, vars);
    case Ast::Kind::Sub: return eval(*e.lhs, vars) - eval(*e.rhs, vars);
    case Ast::Kind::Mul: return eval(*e.lhs, vars) * eval(*e.rhs, vars);
    case Ast::Kind::Neg: return -eval(*e.lhs, vars);
    case Ast::Kind::Pow: {
      double b = eval(*e.lhs, vars);
      double r = 1;
      for (long i = 0; i < e.exponent; ++i) r *= b;
      return r;
    }
  }
  return 0;
}

AstPtr derivative(const Ast& e, std::size_t v) {
  switch (e.kind) {
    case Ast::Kind::Num: return num(0);
    case Ast::Kind::Var: return num(e.var == v ? 1 : 0);
    case Ast::Kind::Add: return add(derivative(*e.lhs, v), derivative(*e.rhs, v));
    case Ast::Kind::Sub: return sub(derivative(*e.lhs, v), derivative(*e.rhs, v));
    case Ast::Kind::Mul: {
      AstPtr l = e.lhs, r = e.rhs;
      return add(mul(derivative(*l, v), r), mul(l, derivative(*r, v)));
    }
    case Ast::Kind::Neg: return neg(derivative(*e.lhs, v));
    case Ast::Kind::Pow: {
      // d(u^k) = k u^(k-1) u'
      AstPtr u = e.lhs;
      return mul(mul(num(static_cast<double>(e.exponent)),
                     pow_node(u, e.exponent - 1)),
                 derivative(*u, v));
    }
  }
  return num(0);
}

std::string to_string(const Ast& e) {
  switch (e.kind) {
    case Ast::Kind::Num: {
      std::ostringstream os;
      os.precision(17);
      os << e.value;
      std::string s = os.str();
      return e.value < 0 ? "(" + s + ")" : s;
    }
    case Ast::Kind::Var: return "x" + std::to_string(e.var + 1);
    case Ast::Kind::Add:
      return "(" + to_string(*e.lhs) + " + " + to_string(*e.rhs) + ")";
    case Ast::Kind::Sub:
      return "(" + to_string(*e.lhs) + " - " + to_string(*e.rhs) + ")";
    case Ast::Kind::Mul:
      return "(" + to_string(*e.lhs) + "*" + to_string(*e.rhs) + ")";
    case Ast::Kind::Neg: return "(-" + to_string(*e.lhs) + ")";
    case Ast::Kind::Pow:
      return "(" + to_string(*e.lhs) + "^" + std::to_string(e.exponent) + ")";
  }
  return "";
}

bool equal(const Ast& a, const Ast& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Ast::Kind::Num: return a.value == b.value;
    case Ast::Kind::Var: return a.var == b.var;
    case Ast::Kind::Neg: return equal(*a.lhs, *b.lhs);
    case Ast::Kind::Pow:
      return a.exponent == b.exponent && equal(*a.lhs, *b.lhs);
    default: return equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
  }
}

}  // namespace pflow::expr
