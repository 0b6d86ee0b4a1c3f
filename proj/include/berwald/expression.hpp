#pragma once

// Small arithmetic expression language shared by the scalar factor and by
// coordinate component expressions of vector fields.
//
// Grammar (precedence high to low, binary operators left associative):
//
//   primary := number | identifier | identifier '(' expr ')' | '(' expr ')'
//   power   := primary ('^' ['-'|'+'] integer)*
//   unary   := '-' unary | power
//   term    := unary (('*' | '/') unary)*
//   expr    := term (('+' | '-') term)*
//
// so `-x^2` is `-(x^2)` and exponents are integer literals only.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "berwald/dual.hpp"
#include "berwald/errors.hpp"

namespace berwald::expr {

enum class NodeKind { number, variable, parameter, negate, add, subtract, multiply, divide, power, call };
enum class Function { exp, log, sqrt, sin, cos };

inline const char* function_name(Function f) {
  switch (f) {
    case Function::exp: return "exp";
    case Function::log: return "log";
    case Function::sqrt: return "sqrt";
    case Function::sin: return "sin";
    case Function::cos: return "cos";
  }
  return "?";
}

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind = NodeKind::number;
  double number = 0.0;  // literal value
  int index = 0;        // variable slot, parameter index or integer exponent
  std::string name;     // identifier as written
  Function function = Function::exp;
  NodePtr lhs;  // operand of unary nodes, power and call
  NodePtr rhs;
};

inline bool structurally_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::number: return a.number == b.number;
    case NodeKind::variable:
    case NodeKind::parameter: return a.index == b.index && a.name == b.name;
    case NodeKind::negate: return structurally_equal(*a.lhs, *b.lhs);
    case NodeKind::power: return a.index == b.index && structurally_equal(*a.lhs, *b.lhs);
    case NodeKind::call: return a.function == b.function && structurally_equal(*a.lhs, *b.lhs);
    default: return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
  }
}

/// Identifiers an expression may use: named variable slots, optional
/// parameters `p0, p1, ...`, and a set of allowed functions.
struct Vocabulary {
  std::map<std::string, int> variables;
  bool allow_parameters = false;
  std::set<Function> functions;
};

/// Parsed, immutable expression. Cheap to copy (shared tree).
class Expression {
 public:
  Expression() = default;
  Expression(NodePtr root, std::string source) : root_(std::move(root)), source_(std::move(source)) { analyse(); }

  const Node& root() const { return *root_; }
  const std::string& source() const { return source_; }
  bool empty() const { return root_ == nullptr; }

  /// Number of nodes on the longest root-to-leaf path.
  int depth() const { return depth_of(*root_); }

  /// One past the largest parameter index referenced.
  int parameter_count() const { return parameter_count_; }

  /// Variable slots referenced anywhere.
  const std::set<int>& variable_slots() const { return slots_; }

  /// Variable slots referenced inside some divisor; where one of these
  /// vanishes the expression is singular.
  const std::set<int>& denominator_slots() const { return denominator_slots_; }

  bool is_constant() const { return slots_.empty(); }

  /// Evaluate with variable values bound by slot and parameter values by index.
  /// Throws SingularArgument on division by zero or a non-real function value.
  template <typename T>
  T evaluate(std::span<const T> variables, std::span<const double> parameters) const {
    return eval(*root_, variables, parameters);
  }

  std::string print() const { return print_node(*root_); }

  friend bool operator==(const Expression& a, const Expression& b) {
    if (a.empty() || b.empty()) return a.empty() == b.empty();
    return structurally_equal(*a.root_, *b.root_);
  }

 private:
  static int depth_of(const Node& n) {
    int d = 0;
    if (n.lhs) d = std::max(d, depth_of(*n.lhs));
    if (n.rhs) d = std::max(d, depth_of(*n.rhs));
    return d + 1;
  }

  void analyse() {
    collect(*root_, false);
  }

  void collect(const Node& n, bool in_denominator) {
    switch (n.kind) {
      case NodeKind::variable:
        slots_.insert(n.index);
        if (in_denominator) denominator_slots_.insert(n.index);
        break;
      case NodeKind::parameter: parameter_count_ = std::max(parameter_count_, n.index + 1); break;
      case NodeKind::number: break;
      case NodeKind::divide:
        collect(*n.lhs, in_denominator);
        collect(*n.rhs, true);
        break;
      case NodeKind::power:
        // a negative exponent divides by its base
        collect(*n.lhs, in_denominator || n.index < 0);
        break;
      case NodeKind::call:
        // log(0) is singular, so its argument behaves like a divisor
        collect(*n.lhs, in_denominator || n.function == Function::log);
        break;
      default:
        if (n.lhs) collect(*n.lhs, in_denominator);
        if (n.rhs) collect(*n.rhs, in_denominator);
    }
  }

  template <typename T>
  static T eval(const Node& n, std::span<const T> vars, std::span<const double> params) {
    using std::exp;
    using std::log;
    using std::sqrt;
    using std::sin;
    using std::cos;
    switch (n.kind) {
      case NodeKind::number: return T(n.number);
      case NodeKind::variable: return vars[static_cast<std::size_t>(n.index)];
      case NodeKind::parameter:
        if (static_cast<std::size_t>(n.index) >= params.size()) {
          throw InvalidArgument("parameter p" + std::to_string(n.index) + " has no value");
        }
        return T(params[static_cast<std::size_t>(n.index)]);
      case NodeKind::negate: return -eval(*n.lhs, vars, params);
      case NodeKind::add: return eval(*n.lhs, vars, params) + eval(*n.rhs, vars, params);
      case NodeKind::subtract: return eval(*n.lhs, vars, params) - eval(*n.rhs, vars, params);
      case NodeKind::multiply: return eval(*n.lhs, vars, params) * eval(*n.rhs, vars, params);
      case NodeKind::divide: {
        T den = eval(*n.rhs, vars, params);
        if (value_of(den) == 0.0) throw SingularArgument("division by zero in '" + print_node(n) + "'");
        return eval(*n.lhs, vars, params) / den;
      }
      case NodeKind::power: {
        T base = eval(*n.lhs, vars, params);
        if (n.index < 0 && value_of(base) == 0.0) {
          throw SingularArgument("zero raised to a negative power in '" + print_node(n) + "'");
        }
        return ipow(base, n.index);
      }
      case NodeKind::call: {
        T arg = eval(*n.lhs, vars, params);
        double a = value_of(arg);
        switch (n.function) {
          case Function::exp: return exp(arg);
          case Function::log:
            if (!(a > 0.0)) throw SingularArgument("log of non-positive value");
            return log(arg);
          case Function::sqrt:
            if (a < 0.0 || (a == 0.0 && is_dual_v<T>)) throw SingularArgument("sqrt outside its differentiable domain");
            return sqrt(arg);
          case Function::sin: return sin(arg);
          case Function::cos: return cos(arg);
        }
      }
    }
    throw InvalidArgument("corrupt expression tree");
  }

  static int precedence(const Node& n) {
    switch (n.kind) {
      case NodeKind::add:
      case NodeKind::subtract: return 1;
      case NodeKind::multiply:
      case NodeKind::divide: return 2;
      case NodeKind::negate: return 3;
      case NodeKind::power: return 4;
      default: return 5;
    }
  }

  static std::string format_number(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip form
    return std::string(buf, res.ptr);
  }

  static std::string wrap(const Node& child, bool parens) {
    std::string s = print_node(child);
    return parens ? "(" + s + ")" : s;
  }

  static std::string print_node(const Node& n) {
    switch (n.kind) {
      case NodeKind::number: return format_number(n.number);
      case NodeKind::variable:
      case NodeKind::parameter: return n.name;
      case NodeKind::negate: return "-" + wrap(*n.lhs, precedence(*n.lhs) < 3);
      case NodeKind::power: return wrap(*n.lhs, precedence(*n.lhs) <= 4) + "^" + std::to_string(n.index);
      case NodeKind::call: return std::string(function_name(n.function)) + "(" + print_node(*n.lhs) + ")";
      default: {
        const char* op = n.kind == NodeKind::add        ? " + "
                         : n.kind == NodeKind::subtract ? " - "
                         : n.kind == NodeKind::multiply ? " * "
                                                        : " / ";
        int p = precedence(n);
        return wrap(*n.lhs, precedence(*n.lhs) < p) + op + wrap(*n.rhs, precedence(*n.rhs) <= p);
      }
    }
  }

  NodePtr root_;
  std::string source_;
  int parameter_count_ = 0;
  std::set<int> slots_;
  std::set<int> denominator_slots_;
};

namespace detail {

enum class TokenKind { number, identifier, plus, minus, star, slash, caret, lparen, rparen, end };

struct Token {
  TokenKind kind = TokenKind::end;
  std::size_t offset = 0;
  std::string text;
  double number = 0.0;
};

inline std::string describe(const Token& t) {
  if (t.kind == TokenKind::end) return "end of input";
  return "'" + t.text + "'";
}

class Parser {
 public:
  Parser(std::string_view src, const Vocabulary& vocab) : src_(src), vocab_(vocab) { advance(); }

  NodePtr parse_all() {
    NodePtr n = parse_expr();
    if (tok_.kind != TokenKind::end) fail({"operator", "end of input"});
    return n;
  }

 private:
  [[noreturn]] void fail(std::vector<std::string> expected) { throw ParseError(tok_.offset, std::move(expected), describe(tok_)); }

  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_ = Token{};
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = TokenKind::end;
      return;
    }
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t save = pos_++;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
        if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        } else {
          pos_ = save;
        }
      }
      tok_.kind = TokenKind::number;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      auto res = std::from_chars(tok_.text.data(), tok_.text.data() + tok_.text.size(), tok_.number);
      if (res.ec != std::errc() || res.ptr != tok_.text.data() + tok_.text.size()) {
        throw ParseError(start, {"number"}, "'" + tok_.text + "'");
      }
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      tok_.kind = TokenKind::identifier;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    ++pos_;
    tok_.text = std::string(1, c);
    switch (c) {
      case '+': tok_.kind = TokenKind::plus; break;
      case '-': tok_.kind = TokenKind::minus; break;
      case '*': tok_.kind = TokenKind::star; break;
      case '/': tok_.kind = TokenKind::slash; break;
      case '^': tok_.kind = TokenKind::caret; break;
      case '(': tok_.kind = TokenKind::lparen; break;
      case ')': tok_.kind = TokenKind::rparen; break;
      default: throw ParseError(tok_.offset, {"number", "identifier", "operator", "(", ")"}, "'" + tok_.text + "'");
    }
  }

  static NodePtr binary(NodeKind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  NodePtr parse_expr() {
    NodePtr n = parse_term();
    while (tok_.kind == TokenKind::plus || tok_.kind == TokenKind::minus) {
      NodeKind k = tok_.kind == TokenKind::plus ? NodeKind::add : NodeKind::subtract;
      advance();
      n = binary(k, n, parse_term());
    }
    return n;
  }

  NodePtr parse_term() {
    NodePtr n = parse_unary();
    while (tok_.kind == TokenKind::star || tok_.kind == TokenKind::slash) {
      NodeKind k = tok_.kind == TokenKind::star ? NodeKind::multiply : NodeKind::divide;
      advance();
      n = binary(k, n, parse_unary());
    }
    return n;
  }

  NodePtr parse_unary() {
    if (tok_.kind == TokenKind::minus) {
      advance();
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::negate;
      n->lhs = parse_unary();
      return n;
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr n = parse_primary();
    while (tok_.kind == TokenKind::caret) {
      advance();
      int sign = 1;
      if (tok_.kind == TokenKind::minus || tok_.kind == TokenKind::plus) {
        sign = tok_.kind == TokenKind::minus ? -1 : 1;
        advance();
      }
      if (tok_.kind != TokenKind::number || tok_.text.find_first_not_of("0123456789") != std::string::npos) {
        fail({"integer exponent"});
      }
      auto p = std::make_shared<Node>();
      p->kind = NodeKind::power;
      p->index = sign * static_cast<int>(tok_.number);
      p->lhs = n;
      advance();
      n = p;
    }
    return n;
  }

  NodePtr parse_primary() {
    if (tok_.kind == TokenKind::number) {
      auto n = std::make_shared<Node>();
      n->kind = NodeKind::number;
      n->number = tok_.number;
      advance();
      return n;
    }
    if (tok_.kind == TokenKind::lparen) {
      advance();
      NodePtr n = parse_expr();
      if (tok_.kind != TokenKind::rparen) fail({")", "operator"});
      advance();
      return n;
    }
    if (tok_.kind == TokenKind::identifier) {
      Token id = tok_;
      advance();
      if (tok_.kind == TokenKind::lparen) return parse_call(id);
      return resolve(id);
    }
    fail({"number", "identifier", "(", "-"});
  }

  NodePtr parse_call(const Token& id) {
    static const std::map<std::string, Function> known = {{"exp", Function::exp},
                                                          {"log", Function::log},
                                                          {"sqrt", Function::sqrt},
                                                          {"sin", Function::sin},
                                                          {"cos", Function::cos}};
    auto it = known.find(id.text);
    if (it == known.end() || !vocab_.functions.count(it->second)) {
      throw UnknownIdentifier("function '" + id.text + "' at offset " + std::to_string(id.offset));
    }
    advance();  // '('
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::call;
    n->function = it->second;
    n->lhs = parse_expr();
    if (tok_.kind != TokenKind::rparen) fail({")", "operator"});
    advance();
    return n;
  }

  NodePtr resolve(const Token& id) {
    auto n = std::make_shared<Node>();
    n->name = id.text;
    if (auto it = vocab_.variables.find(id.text); it != vocab_.variables.end()) {
      n->kind = NodeKind::variable;
      n->index = it->second;
      return n;
    }
    if (vocab_.allow_parameters && id.text.size() > 1 && id.text[0] == 'p' &&
        id.text.find_first_not_of("0123456789", 1) == std::string::npos) {
      n->kind = NodeKind::parameter;
      n->index = std::stoi(id.text.substr(1));
      return n;
    }
    throw UnknownIdentifier("'" + id.text + "' at offset " + std::to_string(id.offset));
  }

  std::string_view src_;
  const Vocabulary& vocab_;
  std::size_t pos_ = 0;
  Token tok_;
};

}  // namespace detail

inline Expression parse(std::string_view source, const Vocabulary& vocab) {
  detail::Parser parser(source, vocab);
  return Expression(parser.parse_all(), std::string(source));
}

}  // namespace berwald::expr
