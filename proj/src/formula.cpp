#include "berthsim/formula.hpp"

#include <charconv>
#include <cmath>
#include <set>

#include "berthsim/error.hpp"

namespace berthsim {

namespace {

enum class Op {
  number,
  name,
  neg,
  lnot,
  add,
  sub,
  mul,
  div,
  mod,
  lt,
  le,
  gt,
  ge,
  eq,
  ne,
  land,
  lor,
  fmin,
  fmax,
  fabs,
};

struct Node {
  Op op = Op::number;
  double value = 0;
  std::string name;
  int lhs = -1;
  int rhs = -1;
};

struct Stmt {
  std::string target;  // empty for bare expressions
  int root = -1;
};

enum class Tok { end, number, ident, op, lparen, rparen, comma, semi, assign };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  double value = 0;
  std::size_t col = 0;
};

[[noreturn]] void fail(std::size_t col, const std::string& msg) {
  throw Error(ErrorKind::PredicateEvalError, "column " + std::to_string(col + 1) + ": " + msg);
}

bool ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9') || c == '.'; }

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == ' ' || c == '\t') {
      ++i;
      continue;
    }
    Token t;
    t.col = i;
    if ((c >= '0' && c <= '9') || (c == '.' && i + 1 < s.size() && s[i + 1] >= '0' && s[i + 1] <= '9')) {
      double v = 0;
      auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + s.size(), v);
      if (ec != std::errc()) fail(i, "bad number");
      t.kind = Tok::number;
      t.value = v;
      i = static_cast<std::size_t>(ptr - s.data());
    } else if (ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      t.kind = Tok::ident;
      t.text = std::string(s.substr(i, j - i));
      i = j;
    } else if (c == '(') {
      t.kind = Tok::lparen;
      ++i;
    } else if (c == ')') {
      t.kind = Tok::rparen;
      ++i;
    } else if (c == ',') {
      t.kind = Tok::comma;
      ++i;
    } else if (c == ';') {
      t.kind = Tok::semi;
      ++i;
    } else {
      auto two = s.substr(i, 2);
      if (two == "<=" || two == ">=" || two == "==" || two == "!=" || two == "&&" || two == "||") {
        t.kind = Tok::op;
        t.text = std::string(two);
        i += 2;
      } else if (c == '=') {
        t.kind = Tok::assign;
        ++i;
      } else if (std::string_view("+-*/%<>!").find(c) != std::string_view::npos) {
        t.kind = Tok::op;
        t.text = std::string(1, c);
        ++i;
      } else {
        fail(i, std::string("unexpected character '") + c + "'");
      }
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.col = s.size();
  out.push_back(end);
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, std::vector<Node>& nodes) : toks_(std::move(toks)), nodes_(nodes) {}

  std::vector<Stmt> program() {
    std::vector<Stmt> stmts;
    if (peek().kind == Tok::end) fail(peek().col, "empty formula");
    for (;;) {
      Stmt st;
      if (peek().kind == Tok::ident && toks_[pos_ + 1].kind == Tok::assign) {
        st.target = peek().text;
        pos_ += 2;
      }
      st.root = expr();
      stmts.push_back(std::move(st));
      if (peek().kind == Tok::semi) {
        ++pos_;
        if (peek().kind == Tok::end) break;
        continue;
      }
      if (peek().kind != Tok::end) fail(peek().col, "unexpected token");
      break;
    }
    return stmts;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  bool is_op(std::string_view op) const { return peek().kind == Tok::op && peek().text == op; }

  int add(Op op, int l, int r = -1) {
    Node n;
    n.op = op;
    n.lhs = l;
    n.rhs = r;
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size() - 1);
  }

  int expr() { return lor(); }

  int lor() {
    int l = land();
    while (is_op("||")) {
      ++pos_;
      l = add(Op::lor, l, land());
    }
    return l;
  }
  int land() {
    int l = cmp_eq();
    while (is_op("&&")) {
      ++pos_;
      l = add(Op::land, l, cmp_eq());
    }
    return l;
  }
  int cmp_eq() {
    int l = cmp_rel();
    while (is_op("==") || is_op("!=")) {
      Op op = peek().text == "==" ? Op::eq : Op::ne;
      ++pos_;
      l = add(op, l, cmp_rel());
    }
    return l;
  }
  int cmp_rel() {
    int l = sum();
    while (is_op("<") || is_op("<=") || is_op(">") || is_op(">=")) {
      const auto& t = peek().text;
      Op op = t == "<" ? Op::lt : t == "<=" ? Op::le : t == ">" ? Op::gt : Op::ge;
      ++pos_;
      l = add(op, l, sum());
    }
    return l;
  }
  int sum() {
    int l = product();
    while (is_op("+") || is_op("-")) {
      Op op = peek().text == "+" ? Op::add : Op::sub;
      ++pos_;
      l = add(op, l, product());
    }
    return l;
  }
  int product() {
    int l = unary();
    while (is_op("*") || is_op("/") || is_op("%")) {
      Op op = peek().text == "*" ? Op::mul : peek().text == "/" ? Op::div : Op::mod;
      ++pos_;
      l = add(op, l, unary());
    }
    return l;
  }
  int unary() {
    if (++depth_ > kMaxDepth) fail(peek().col, "formula nested too deeply");
    struct Leave {
      int& d;
      ~Leave() { --d; }
    } leave{depth_};
    if (is_op("-")) {
      ++pos_;
      return add(Op::neg, unary());
    }
    if (is_op("!")) {
      ++pos_;
      return add(Op::lnot, unary());
    }
    if (is_op("+")) {
      ++pos_;
      return unary();
    }
    return primary();
  }
  int primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::number: {
        ++pos_;
        int id = add(Op::number, -1);
        nodes_[id].value = t.value;
        return id;
      }
      case Tok::ident: {
        std::string name = t.text;
        std::size_t col = t.col;
        ++pos_;
        if (peek().kind == Tok::lparen) return call(name, col);
        if (name == "true" || name == "false") {
          int id = add(Op::number, -1);
          nodes_[id].value = name == "true" ? 1.0 : 0.0;
          return id;
        }
        if (name.back() == '.') fail(col, "malformed name '" + name + "'");
        int id = add(Op::name, -1);
        nodes_[id].name = std::move(name);
        return id;
      }
      case Tok::lparen: {
        ++pos_;
        int inner = expr();
        if (peek().kind != Tok::rparen) fail(peek().col, "expected ')'");
        ++pos_;
        return inner;
      }
      default: fail(t.col, t.kind == Tok::end ? "unexpected end of formula" : "unexpected token");
    }
  }
  int call(const std::string& fn, std::size_t col) {
    ++pos_;  // '('
    std::vector<int> args;
    if (peek().kind != Tok::rparen) {
      args.push_back(expr());
      while (peek().kind == Tok::comma) {
        ++pos_;
        args.push_back(expr());
      }
    }
    if (peek().kind != Tok::rparen) fail(peek().col, "expected ')'");
    ++pos_;
    if (fn == "abs" && args.size() == 1) return add(Op::fabs, args[0]);
    if (fn == "min" && args.size() == 2) return add(Op::fmin, args[0], args[1]);
    if (fn == "max" && args.size() == 2) return add(Op::fmax, args[0], args[1]);
    fail(col, "unknown function or wrong arity: " + fn);
  }

  static constexpr int kMaxDepth = 200;

  std::vector<Token> toks_;
  std::vector<Node>& nodes_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace

struct Formula::Impl {
  std::string source;
  std::vector<Node> nodes;
  std::vector<Stmt> stmts;

  double eval(int id, const FormulaScope& scope) const {
    const Node& n = nodes[static_cast<std::size_t>(id)];
    auto truthy = [](double v) { return v != 0.0; };
    switch (n.op) {
      case Op::number: return n.value;
      case Op::name: return scope.get(n.name);
      case Op::neg: return -eval(n.lhs, scope);
      case Op::lnot: return truthy(eval(n.lhs, scope)) ? 0.0 : 1.0;
      case Op::add: return eval(n.lhs, scope) + eval(n.rhs, scope);
      case Op::sub: return eval(n.lhs, scope) - eval(n.rhs, scope);
      case Op::mul: return eval(n.lhs, scope) * eval(n.rhs, scope);
      case Op::div: {
        double d = eval(n.rhs, scope);
        if (d == 0) throw Error(ErrorKind::PredicateEvalError, "division by zero in '" + source + "'");
        return eval(n.lhs, scope) / d;
      }
      case Op::mod: {
        double d = eval(n.rhs, scope);
        if (d == 0) throw Error(ErrorKind::PredicateEvalError, "modulo by zero in '" + source + "'");
        return std::fmod(eval(n.lhs, scope), d);
      }
      case Op::lt: return eval(n.lhs, scope) < eval(n.rhs, scope) ? 1.0 : 0.0;
      case Op::le: return eval(n.lhs, scope) <= eval(n.rhs, scope) ? 1.0 : 0.0;
      case Op::gt: return eval(n.lhs, scope) > eval(n.rhs, scope) ? 1.0 : 0.0;
      case Op::ge: return eval(n.lhs, scope) >= eval(n.rhs, scope) ? 1.0 : 0.0;
      case Op::eq: return eval(n.lhs, scope) == eval(n.rhs, scope) ? 1.0 : 0.0;
      case Op::ne: return eval(n.lhs, scope) != eval(n.rhs, scope) ? 1.0 : 0.0;
      case Op::land: return truthy(eval(n.lhs, scope)) && truthy(eval(n.rhs, scope)) ? 1.0 : 0.0;
      case Op::lor: return truthy(eval(n.lhs, scope)) || truthy(eval(n.rhs, scope)) ? 1.0 : 0.0;
      case Op::fmin: return std::min(eval(n.lhs, scope), eval(n.rhs, scope));
      case Op::fmax: return std::max(eval(n.lhs, scope), eval(n.rhs, scope));
      case Op::fabs: return std::fabs(eval(n.lhs, scope));
    }
    return 0;
  }
};

Formula::Formula() : impl_(std::make_unique<Impl>()) {}
Formula::~Formula() = default;
Formula::Formula(const Formula& o) : impl_(std::make_unique<Impl>(*o.impl_)) {}
Formula& Formula::operator=(const Formula& o) {
  if (this != &o) impl_ = std::make_unique<Impl>(*o.impl_);
  return *this;
}
Formula::Formula(Formula&&) noexcept = default;
Formula& Formula::operator=(Formula&&) noexcept = default;

Formula Formula::compile(std::string_view source) {
  Formula f;
  f.impl_->source = std::string(source);
  Parser p(lex(source), f.impl_->nodes);
  f.impl_->stmts = p.program();
  return f;
}

double Formula::run(FormulaScope& scope) const {
  double last = 0;
  for (const auto& st : impl_->stmts) {
    last = impl_->eval(st.root, scope);
    if (!st.target.empty()) scope.set(st.target, last);
  }
  return last;
}

bool Formula::test(const FormulaScope& scope) const {
  if (!is_predicate())
    throw Error(ErrorKind::PredicateEvalError, "predicate must be a single expression: '" + impl_->source + "'");
  return impl_->eval(impl_->stmts.front().root, scope) != 0.0;
}

bool Formula::is_predicate() const { return impl_->stmts.size() == 1 && impl_->stmts.front().target.empty(); }

std::vector<std::string> Formula::state_names() const {
  std::set<std::string> names;
  for (const auto& n : impl_->nodes)
    if (n.op == Op::name && !is_attribute_name(n.name)) names.insert(n.name);
  for (const auto& st : impl_->stmts)
    if (!st.target.empty() && !is_attribute_name(st.target)) names.insert(st.target);
  return {names.begin(), names.end()};
}

const std::string& Formula::source() const { return impl_->source; }

}  // namespace berthsim
