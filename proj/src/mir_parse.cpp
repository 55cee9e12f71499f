// Copyright 2026 The loopdag Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "loopdag/mir.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace loopdag::mir {

ParseError::ParseError(SourcePos pos, const std::string &msg)
    : std::runtime_error(std::to_string(pos.line) + ":" +
                         std::to_string(pos.col) + ": " + msg),
      pos_(pos) {}

namespace {

enum class Tok {
  Ident,
  Int,
  Float,
  Punct,
  Pragma,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t ival = 0;
  double fval = 0.0;
  SourcePos pos;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.pos = {line_, col_};
      if (i_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = src_[i_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t b = i_;
        while (i_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[i_])) ||
                src_[i_] == '_'))
          advance();
        t.kind = Tok::Ident;
        t.text = std::string(src_.substr(b, i_ - b));
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && i_ + 1 < src_.size() &&
                  std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
        lex_number(t);
      } else if (c == '#') {
        advance();
        std::size_t b = i_;
        while (i_ < src_.size() &&
               std::isalpha(static_cast<unsigned char>(src_[i_])))
          advance();
        if (src_.substr(b, i_ - b) != "pragma")
          throw ParseError(t.pos, "expected '#pragma'");
        t.kind = Tok::Pragma;
        t.text = "#pragma";
      } else {
        static const char *two[] = {"<=", ">=", "==", "!=", "&&", "||", "+="};
        t.kind = Tok::Punct;
        for (const char *p : two) {
          if (src_.substr(i_, 2) == p) {
            t.text = p;
            advance();
            advance();
            break;
          }
        }
        if (t.text.empty()) {
          if (std::string_view("+-*/%<>=!(){}[],;:").find(c) ==
              std::string_view::npos)
            throw ParseError(t.pos, std::string("unexpected character '") +
                                        c + "'");
          t.text = std::string(1, c);
          advance();
        }
      }
      out.push_back(std::move(t));
    }
  }

private:
  void advance() {
    if (src_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void skip_space() {
    while (i_ < src_.size()) {
      char c = src_[i_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && i_ + 1 < src_.size() && src_[i_ + 1] == '/') {
        while (i_ < src_.size() && src_[i_] != '\n')
          advance();
      } else {
        break;
      }
    }
  }

  void lex_number(Token &t) {
    std::size_t b = i_;
    bool is_float = false;
    while (i_ < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[i_])))
      advance();
    if (i_ < src_.size() && src_[i_] == '.') {
      is_float = true;
      advance();
      while (i_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[i_])))
        advance();
    }
    if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
      std::size_t save = i_;
      int sl = line_, sc = col_;
      advance();
      if (i_ < src_.size() && (src_[i_] == '+' || src_[i_] == '-'))
        advance();
      if (i_ < src_.size() &&
          std::isdigit(static_cast<unsigned char>(src_[i_]))) {
        is_float = true;
        while (i_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[i_])))
          advance();
      } else {
        i_ = save;
        line_ = sl;
        col_ = sc;
      }
    }
    std::string_view s = src_.substr(b, i_ - b);
    t.text = std::string(s);
    if (is_float) {
      t.kind = Tok::Float;
      auto r = std::from_chars(s.data(), s.data() + s.size(), t.fval);
      if (r.ec != std::errc())
        throw ParseError(t.pos, "malformed float literal");
    } else {
      t.kind = Tok::Int;
      auto r = std::from_chars(s.data(), s.data() + s.size(), t.ival);
      if (r.ec != std::errc())
        throw ParseError(t.pos, "integer literal out of range");
    }
  }

  std::string_view src_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program program() {
    Program p;
    while (peek().kind != Tok::End)
      p.functions.push_back(function());
    return p;
  }

  Expr expr() { return binary(0); }

  std::vector<Directive> directive_list() {
    std::vector<Directive> out;
    while (peek().kind != Tok::End) {
      if (is_punct(";")) {
        next();
        continue;
      }
      out.push_back(directive_body(/*parens_required=*/true));
    }
    return out;
  }

private:
  const Token &peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token &next() {
    const Token &t = toks_[pos_];
    if (pos_ + 1 < toks_.size())
      ++pos_;
    return t;
  }
  bool is_punct(std::string_view p, std::size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  bool is_ident(std::string_view w, std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == w;
  }
  [[noreturn]] void fail(const std::string &msg) const {
    std::string got = peek().kind == Tok::End ? "end of input" : peek().text;
    throw ParseError(peek().pos, msg + " (got '" + got + "')");
  }
  void expect(std::string_view p) {
    if (!is_punct(p))
      fail("expected '" + std::string(p) + "'");
    next();
  }
  void expect_word(std::string_view w) {
    if (!is_ident(w))
      fail("expected '" + std::string(w) + "'");
    next();
  }
  std::string ident() {
    if (peek().kind != Tok::Ident)
      fail("expected identifier");
    return next().text;
  }

  Function function() {
    Function f;
    f.pos = peek().pos;
    expect_word("func");
    f.name = ident();
    expect("(");
    if (!is_punct(")")) {
      do {
        if (is_punct(","))
          next();
        Param p;
        p.name = ident();
        expect(":");
        p.type = type();
        while (is_ident("restrict") || is_ident("opaque")) {
          if (next().text == "restrict")
            p.restrict_ = true;
          else
            p.opaque = true;
        }
        f.params.push_back(std::move(p));
      } while (is_punct(","));
    }
    expect(")");
    f.body = block();
    return f;
  }

  Type type() {
    Type t;
    if (is_punct("[")) {
      next();
      t.extents.push_back(expr());
      while (is_punct(",")) {
        next();
        t.extents.push_back(expr());
      }
      expect("]");
    }
    if (is_ident("i64"))
      t.elem = ScalarType::I64;
    else if (is_ident("f64"))
      t.elem = ScalarType::F64;
    else
      fail("expected type 'i64' or 'f64'");
    next();
    return t;
  }

  std::vector<Stmt> block() {
    expect("{");
    std::vector<Stmt> out;
    while (!is_punct("}")) {
      if (peek().kind == Tok::End)
        fail("unterminated block");
      out.push_back(stmt());
    }
    next();
    return out;
  }

  Directive directive_body(bool parens_required) {
    Directive d;
    d.pos = peek().pos;
    d.name = ident();
    if (!is_punct("(")) {
      if (parens_required)
        fail("expected '(' after directive name");
      return d;
    }
    next();
    if (!is_punct(")")) {
      while (true) {
        DirectiveArg a;
        if (peek().kind == Tok::Ident) {
          a.is_label = true;
          a.label = next().text;
        } else if (peek().kind == Tok::Int) {
          a.is_label = false;
          a.value = next().ival;
        } else {
          fail("malformed directive argument");
        }
        d.args.push_back(std::move(a));
        if (!is_punct(","))
          break;
        next();
      }
    }
    expect(")");
    return d;
  }

  Stmt stmt() {
    SourcePos pos = peek().pos;
    if (peek().kind == Tok::Pragma) {
      next();
      expect_word("xform");
      Stmt s;
      s.kind = StmtKind::Pragma;
      s.pos = pos;
      s.directive = directive_body(/*parens_required=*/false);
      if (is_punct(";"))
        next();
      return s;
    }
    std::string label;
    if (peek().kind == Tok::Ident && is_punct(":", 1)) {
      label = next().text;
      next();
      if (!is_ident("for") && !is_ident("while"))
        fail("label must precede a loop");
    }
    if (is_ident("for")) {
      next();
      Stmt s;
      s.kind = StmtKind::For;
      s.pos = pos;
      s.label = label;
      expect("(");
      s.name = ident();
      expect("=");
      s.lower = expr();
      expect(";");
      if (ident() != s.name)
        fail("loop condition must test the induction variable");
      expect("<");
      s.upper = expr();
      expect(";");
      if (ident() != s.name)
        fail("loop increment must update the induction variable");
      expect("+=");
      s.step = expr();
      expect(")");
      s.body = block();
      return s;
    }
    if (is_ident("while")) {
      next();
      Stmt s;
      s.kind = StmtKind::While;
      s.pos = pos;
      s.label = label;
      expect("(");
      s.cond = expr();
      expect(")");
      s.body = block();
      return s;
    }
    if (is_ident("if")) {
      next();
      Stmt s;
      s.kind = StmtKind::If;
      s.pos = pos;
      expect("(");
      s.cond = expr();
      expect(")");
      s.body = block();
      if (is_ident("else")) {
        next();
        s.has_else = true;
        s.else_body = block();
      }
      return s;
    }
    if (is_ident("call") && peek(1).kind == Tok::Ident) {
      next();
      Stmt s;
      s.kind = StmtKind::Call;
      s.pos = pos;
      s.name = ident();
      expect("(");
      if (!is_punct(")")) {
        s.subs.push_back(expr());
        while (is_punct(",")) {
          next();
          s.subs.push_back(expr());
        }
      }
      expect(")");
      expect(";");
      return s;
    }
    if (is_ident("local") && peek(1).kind == Tok::Ident) {
      next();
      Stmt s;
      s.kind = StmtKind::Local;
      s.pos = pos;
      s.name = ident();
      expect(":");
      s.local_type = type();
      expect(";");
      return s;
    }
    Stmt s;
    s.pos = pos;
    s.name = ident();
    if (is_punct("=")) {
      next();
      s.kind = StmtKind::Assign;
      s.value = expr();
      expect(";");
      return s;
    }
    if (!is_punct("["))
      fail("expected '=' or '[' in statement");
    s.kind = StmtKind::Store;
    while (is_punct("[")) {
      next();
      s.subs.push_back(expr());
      expect("]");
    }
    if (is_punct("+=")) {
      s.update = true;
    } else if (!is_punct("=")) {
      fail("expected '=' or '+='");
    }
    next();
    s.value = expr();
    expect(";");
    return s;
  }

  static int precedence(std::string_view p) {
    if (p == "||")
      return 1;
    if (p == "&&")
      return 2;
    if (p == "==" || p == "!=")
      return 3;
    if (p == "<" || p == "<=" || p == ">" || p == ">=")
      return 4;
    if (p == "+" || p == "-")
      return 5;
    if (p == "*" || p == "/" || p == "%")
      return 6;
    return -1;
  }

  static Op binop(std::string_view p) {
    static const std::pair<std::string_view, Op> table[] = {
        {"||", Op::Or}, {"&&", Op::And}, {"==", Op::Eq}, {"!=", Op::Ne},
        {"<", Op::Lt},  {"<=", Op::Le},  {">", Op::Gt},  {">=", Op::Ge},
        {"+", Op::Add}, {"-", Op::Sub},  {"*", Op::Mul}, {"/", Op::Div},
        {"%", Op::Mod}};
    for (auto &[s, op] : table)
      if (s == p)
        return op;
    return Op::Add;
  }

  Expr binary(int min_prec) {
    Expr lhs = unary();
    while (peek().kind == Tok::Punct) {
      int prec = precedence(peek().text);
      if (prec < 0 || prec < min_prec)
        break;
      SourcePos pos = peek().pos;
      Op op = binop(next().text);
      Expr rhs = binary(prec + 1);
      lhs = Expr::binary(op, std::move(lhs), std::move(rhs));
      lhs.pos = pos;
    }
    return lhs;
  }

  Expr unary() {
    SourcePos pos = peek().pos;
    if (is_punct("-") || is_punct("!")) {
      Op op = next().text == "-" ? Op::Neg : Op::Not;
      Expr e = Expr::unary(op, unary());
      e.pos = pos;
      return e;
    }
    return primary();
  }

  Expr primary() {
    SourcePos pos = peek().pos;
    Expr e;
    if (peek().kind == Tok::Int) {
      e = Expr::int_lit(next().ival);
    } else if (peek().kind == Tok::Float) {
      e = Expr::float_lit(next().fval);
    } else if (is_punct("(")) {
      next();
      e = expr();
      expect(")");
      return e;
    } else if (peek().kind == Tok::Ident) {
      std::string n = next().text;
      if (is_punct("(")) {
        next();
        std::vector<Expr> args;
        if (!is_punct(")")) {
          args.push_back(expr());
          while (is_punct(",")) {
            next();
            args.push_back(expr());
          }
        }
        expect(")");
        e = Expr::call(std::move(n), std::move(args));
      } else if (is_punct("[")) {
        std::vector<Expr> subs;
        while (is_punct("[")) {
          next();
          subs.push_back(expr());
          expect("]");
        }
        e = Expr::load(std::move(n), std::move(subs));
      } else {
        e = Expr::var(std::move(n));
      }
    } else {
      fail("expected expression");
    }
    e.pos = pos;
    return e;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

bool names_array(const Function &f, const std::string &n) {
  if (const Param *prm = f.find_param(n))
    return prm->type.is_array();
  for (const Stmt &l : f.body)
    if (l.kind == StmtKind::Local && l.name == n)
      return true;
  return false;
}

void resolve_descriptor_args(Expr &e, const Function &f) {
  if (e.op == Op::Call && (e.name == "base" || e.name == "extent"))
    for (Expr &a : e.args)
      if (a.op == Op::Var && names_array(f, a.name))
        a.op = Op::ArrayRef;
  for (Expr &a : e.args)
    resolve_descriptor_args(a, f);
}

// Call arguments naming an array parameter are array references, not scalar
// reads. Resolved after parsing, once the callee signature is known.
void resolve_array_args(std::vector<Stmt> &body, const Program &p,
                        const Function &f) {
  for (Stmt &s : body) {
    for (Expr *e : {&s.lower, &s.upper, &s.step, &s.cond, &s.value})
      resolve_descriptor_args(*e, f);
    for (Expr &e : s.subs)
      resolve_descriptor_args(e, f);
    if (s.kind == StmtKind::Call) {
      for (Expr &a : s.subs) {
        if (a.op == Op::Var && names_array(f, a.name))
          a.op = Op::ArrayRef;
      }
    }
    resolve_array_args(s.body, p, f);
    resolve_array_args(s.else_body, p, f);
  }
}

void check_labels_and_calls(const std::vector<Stmt> &body, const Program &p,
                            std::set<std::string> &labels) {
  for (const Stmt &s : body) {
    if (!s.label.empty() && !labels.insert(s.label).second)
      throw ParseError(s.pos, "duplicate label '" + s.label + "'");
    if (s.kind == StmtKind::Call && s.name != "gemm" && !p.find(s.name))
      throw ParseError(s.pos, "unknown callee '" + s.name + "'");
    if (s.kind == StmtKind::Pragma) {
      std::string err = check_directive(s.directive);
      // The implicit-target form omits the loop label.
      bool implicit = s.directive.args.empty() && err.find("arity") == 0;
      if (!err.empty() && !implicit)
        throw ParseError(s.pos, "malformed directive: " + err);
    }
    check_labels_and_calls(s.body, p, labels);
    check_labels_and_calls(s.else_body, p, labels);
  }
}

void check_expr_calls(const Expr &e, const Program &p) {
  if (e.op == Op::Call && !is_intrinsic(e.name)) {
    if (p.find(e.name))
      throw ParseError(e.pos, "function '" + e.name +
                                  "' can only be invoked by a call statement");
    throw ParseError(e.pos, "unknown callee '" + e.name + "'");
  }
  for (const Expr &a : e.args)
    check_expr_calls(a, p);
}

void check_stmt_exprs(const std::vector<Stmt> &body, const Program &p) {
  for (const Stmt &s : body) {
    for (const Expr *e : {&s.lower, &s.upper, &s.step, &s.cond, &s.value})
      check_expr_calls(*e, p);
    for (const Expr &e : s.subs)
      check_expr_calls(e, p);
    check_stmt_exprs(s.body, p);
    check_stmt_exprs(s.else_body, p);
  }
}

void number(std::vector<Stmt> &body, int &next) {
  for (Stmt &s : body) {
    s.id = next++;
    number(s.body, next);
    number(s.else_body, next);
  }
}

} // namespace

void number_statements(Function &f) {
  int next = 0;
  number(f.body, next);
}

Program parse(std::string_view text) {
  Parser parser(Lexer(text).run());
  Program p = parser.program();
  std::set<std::string> names;
  for (Function &f : p.functions) {
    if (!names.insert(f.name).second)
      throw ParseError(f.pos, "duplicate function '" + f.name + "'");
  }
  for (Function &f : p.functions) {
    std::set<std::string> labels;
    check_labels_and_calls(f.body, p, labels);
    check_stmt_exprs(f.body, p);
    resolve_array_args(f.body, p, f);
    number_statements(f);
  }
  return p;
}

std::vector<Directive> parse_directives(std::string_view text) {
  Parser parser(Lexer(text).run());
  std::vector<Directive> ds = parser.directive_list();
  for (const Directive &d : ds) {
    std::string err = check_directive(d);
    if (!err.empty())
      throw ParseError(d.pos, "malformed directive: " + err);
  }
  return ds;
}

} // namespace loopdag::mir
