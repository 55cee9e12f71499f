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

#include <algorithm>
#include <charconv>
#include <cstring>

#include "loopdag/mir.hpp"

namespace loopdag::mir {

std::string_view to_string(ScalarType t) {
  return t == ScalarType::I64 ? "i64" : "f64";
}

bool is_binary(Op op) { return op >= Op::Add; }
bool is_unary(Op op) { return op == Op::Neg || op == Op::Not; }

std::string_view op_spelling(Op op) {
  switch (op) {
  case Op::Neg:
  case Op::Sub:
    return "-";
  case Op::Not:
    return "!";
  case Op::Add:
    return "+";
  case Op::Mul:
    return "*";
  case Op::Div:
    return "/";
  case Op::Mod:
    return "%";
  case Op::Lt:
    return "<";
  case Op::Le:
    return "<=";
  case Op::Gt:
    return ">";
  case Op::Ge:
    return ">=";
  case Op::Eq:
    return "==";
  case Op::Ne:
    return "!=";
  case Op::And:
    return "&&";
  case Op::Or:
    return "||";
  default:
    return "";
  }
}

bool is_intrinsic(std::string_view name) {
  return std::find(std::begin(kIntrinsics), std::end(kIntrinsics), name) !=
         std::end(kIntrinsics);
}

Expr Expr::int_lit(std::int64_t v) {
  Expr e;
  e.op = Op::IntLit;
  e.ival = v;
  return e;
}

Expr Expr::float_lit(double v) {
  Expr e;
  e.op = Op::FloatLit;
  e.fval = v;
  return e;
}

Expr Expr::var(std::string n) {
  Expr e;
  e.op = Op::Var;
  e.name = std::move(n);
  return e;
}

Expr Expr::load(std::string array, std::vector<Expr> subs) {
  Expr e;
  e.op = Op::Load;
  e.name = std::move(array);
  e.args = std::move(subs);
  return e;
}

Expr Expr::array_ref(std::string array) {
  Expr e;
  e.op = Op::ArrayRef;
  e.name = std::move(array);
  return e;
}

Expr Expr::call(std::string fn, std::vector<Expr> args) {
  Expr e;
  e.op = Op::Call;
  e.name = std::move(fn);
  e.args = std::move(args);
  return e;
}

Expr Expr::unary(Op op, Expr a) {
  Expr e;
  e.op = op;
  e.args.push_back(std::move(a));
  return e;
}

Expr Expr::binary(Op op, Expr a, Expr b) {
  Expr e;
  e.op = op;
  e.args.push_back(std::move(a));
  e.args.push_back(std::move(b));
  return e;
}

Stmt Stmt::assign(std::string dest, Expr v) {
  Stmt s;
  s.kind = StmtKind::Assign;
  s.name = std::move(dest);
  s.value = std::move(v);
  return s;
}

Stmt Stmt::store(std::string array, std::vector<Expr> subs, Expr v,
                 bool update) {
  Stmt s;
  s.kind = StmtKind::Store;
  s.name = std::move(array);
  s.subs = std::move(subs);
  s.value = std::move(v);
  s.update = update;
  return s;
}

const Param *Function::find_param(std::string_view n) const {
  for (const Param &p : params)
    if (p.name == n)
      return &p;
  return nullptr;
}

const Function *Program::find(std::string_view name) const {
  for (const Function &f : functions)
    if (f.name == name)
      return &f;
  return nullptr;
}

// Directives -----------------------------------------------------------------

std::vector<std::string> Directive::labels() const {
  std::vector<std::string> out;
  for (const DirectiveArg &a : args)
    if (a.is_label)
      out.push_back(a.label);
  return out;
}

std::vector<std::int64_t> Directive::ints() const {
  std::vector<std::int64_t> out;
  for (const DirectiveArg &a : args)
    if (!a.is_label)
      out.push_back(a.value);
  return out;
}

std::string to_string(const Directive &d) {
  std::string s = d.name + "(";
  for (std::size_t i = 0; i < d.args.size(); ++i) {
    if (i)
      s += ",";
    s += d.args[i].is_label ? d.args[i].label
                            : std::to_string(d.args[i].value);
  }
  return s + ")";
}

std::string check_directive(const Directive &d) {
  struct Shape {
    const char *name;
    int labels;
    int ints;
  };
  static const Shape shapes[] = {
      {"reverse", 1, 0},     {"interchange", 2, 0}, {"fuse", 2, 0},
      {"distribute", 1, 0},  {"unroll", 1, 1},      {"unroll_full", 1, 0},
      {"unroll_jam", 1, 1},  {"unswitch", 1, 0},    {"parallel", 1, 0},
      {"delete_empty", 1, 0}, {"gemm", 1, 0},
  };
  for (const Shape &s : shapes) {
    if (d.name != s.name)
      continue;
    int nl = static_cast<int>(d.labels().size());
    int ni = static_cast<int>(d.ints().size());
    // Labels come first, then integers.
    bool ordered = true;
    bool seen_int = false;
    for (const DirectiveArg &a : d.args) {
      if (!a.is_label)
        seen_int = true;
      else if (seen_int)
        ordered = false;
    }
    if (nl != s.labels || ni != s.ints || !ordered)
      return "arity mismatch for '" + d.name + "'";
    if (s.ints == 1 && d.ints()[0] < 2)
      return "unroll factor must be at least 2";
    return {};
  }
  return "unknown directive '" + d.name + "'";
}

// Structural equality ----------------------------------------------------------

bool equal(const Expr &a, const Expr &b) {
  if (a.op != b.op || a.name != b.name || a.args.size() != b.args.size())
    return false;
  if (a.op == Op::IntLit && a.ival != b.ival)
    return false;
  if (a.op == Op::FloatLit &&
      std::memcmp(&a.fval, &b.fval, sizeof(double)) != 0)
    return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!equal(a.args[i], b.args[i]))
      return false;
  return true;
}

namespace {

bool equal_exprs(const std::vector<Expr> &a, const std::vector<Expr> &b) {
  if (a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!equal(a[i], b[i]))
      return false;
  return true;
}

bool equal_stmts(const std::vector<Stmt> &a, const std::vector<Stmt> &b) {
  if (a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!equal(a[i], b[i]))
      return false;
  return true;
}

bool equal_type(const Type &a, const Type &b) {
  return a.elem == b.elem && equal_exprs(a.extents, b.extents);
}

} // namespace

bool equal(const Stmt &a, const Stmt &b) {
  if (a.kind != b.kind || a.label != b.label || a.name != b.name ||
      a.update != b.update || a.has_else != b.has_else)
    return false;
  if (!equal(a.lower, b.lower) || !equal(a.upper, b.upper) ||
      !equal(a.step, b.step) || !equal(a.cond, b.cond) ||
      !equal(a.value, b.value) || !equal_exprs(a.subs, b.subs))
    return false;
  if (a.kind == StmtKind::Pragma && to_string(a.directive) !=
                                        to_string(b.directive))
    return false;
  if (a.kind == StmtKind::Local && !equal_type(a.local_type, b.local_type))
    return false;
  return equal_stmts(a.body, b.body) && equal_stmts(a.else_body, b.else_body);
}

bool equal(const Function &a, const Function &b) {
  if (a.name != b.name || a.params.size() != b.params.size())
    return false;
  for (std::size_t i = 0; i < a.params.size(); ++i) {
    const Param &x = a.params[i];
    const Param &y = b.params[i];
    if (x.name != y.name || x.restrict_ != y.restrict_ ||
        x.opaque != y.opaque || !equal_type(x.type, y.type))
      return false;
  }
  return equal_stmts(a.body, b.body);
}

bool equal(const Program &a, const Program &b) {
  if (a.functions.size() != b.functions.size())
    return false;
  for (std::size_t i = 0; i < a.functions.size(); ++i)
    if (!equal(a.functions[i], b.functions[i]))
      return false;
  return true;
}

// Printer --------------------------------------------------------------------

namespace {

int precedence(const Expr &e) {
  switch (e.op) {
  case Op::Or:
    return 1;
  case Op::And:
    return 2;
  case Op::Eq:
  case Op::Ne:
    return 3;
  case Op::Lt:
  case Op::Le:
  case Op::Gt:
  case Op::Ge:
    return 4;
  case Op::Add:
  case Op::Sub:
    return 5;
  case Op::Mul:
  case Op::Div:
  case Op::Mod:
    return 6;
  case Op::Neg:
  case Op::Not:
    return 7;
  case Op::IntLit:
    return e.ival < 0 ? 7 : 8;
  case Op::FloatLit:
    return e.fval < 0 ? 7 : 8;
  default:
    return 8;
  }
}

std::string format_float(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, r.ptr);
  if (s.find_first_of(".eEn") == std::string::npos)
    s += ".0";
  return s;
}

void print_expr(const Expr &e, std::string &out) {
  auto child = [&](const Expr &c, bool parens) {
    if (parens)
      out += '(';
    print_expr(c, out);
    if (parens)
      out += ')';
  };
  switch (e.op) {
  case Op::IntLit:
    out += std::to_string(e.ival);
    return;
  case Op::FloatLit:
    out += format_float(e.fval);
    return;
  case Op::Var:
  case Op::ArrayRef:
    out += e.name;
    return;
  case Op::Load:
    out += e.name;
    for (const Expr &s : e.args) {
      out += '[';
      print_expr(s, out);
      out += ']';
    }
    return;
  case Op::Call:
    out += e.name;
    out += '(';
    for (std::size_t i = 0; i < e.args.size(); ++i) {
      if (i)
        out += ", ";
      print_expr(e.args[i], out);
    }
    out += ')';
    return;
  case Op::Neg:
  case Op::Not:
    out += op_spelling(e.op);
    child(e.args[0], precedence(e.args[0]) < 7 ||
                         (e.op == Op::Neg && precedence(e.args[0]) == 7));
    return;
  default: {
    int p = precedence(e);
    child(e.args[0], precedence(e.args[0]) < p);
    out += ' ';
    out += op_spelling(e.op);
    out += ' ';
    child(e.args[1], precedence(e.args[1]) <= p);
  }
  }
}

void print_type(const Type &t, std::string &out) {
  if (t.is_array()) {
    out += '[';
    for (std::size_t i = 0; i < t.extents.size(); ++i) {
      if (i)
        out += ", ";
      print_expr(t.extents[i], out);
    }
    out += "] ";
  }
  out += to_string(t.elem);
}

void print_block(const std::vector<Stmt> &body, int depth, std::string &out);

void print_stmt(const Stmt &s, int depth, std::string &out) {
  std::string ind(static_cast<std::size_t>(depth) * 2, ' ');
  out += ind;
  switch (s.kind) {
  case StmtKind::For:
    if (!s.label.empty())
      out += s.label + ": ";
    out += "for (" + s.name + " = ";
    print_expr(s.lower, out);
    out += "; " + s.name + " < ";
    print_expr(s.upper, out);
    out += "; " + s.name + " += ";
    print_expr(s.step, out);
    out += ") ";
    print_block(s.body, depth, out);
    break;
  case StmtKind::While:
    if (!s.label.empty())
      out += s.label + ": ";
    out += "while (";
    print_expr(s.cond, out);
    out += ") ";
    print_block(s.body, depth, out);
    break;
  case StmtKind::If:
    out += "if (";
    print_expr(s.cond, out);
    out += ") ";
    print_block(s.body, depth, out);
    if (s.has_else) {
      out.pop_back();
      out += " else ";
      print_block(s.else_body, depth, out);
    }
    break;
  case StmtKind::Assign:
    out += s.name + " = ";
    print_expr(s.value, out);
    out += ";\n";
    break;
  case StmtKind::Store:
    out += s.name;
    for (const Expr &e : s.subs) {
      out += '[';
      print_expr(e, out);
      out += ']';
    }
    out += s.update ? " += " : " = ";
    print_expr(s.value, out);
    out += ";\n";
    break;
  case StmtKind::Call:
    out += "call " + s.name + "(";
    for (std::size_t i = 0; i < s.subs.size(); ++i) {
      if (i)
        out += ", ";
      print_expr(s.subs[i], out);
    }
    out += ");\n";
    break;
  case StmtKind::Pragma:
    out += "#pragma xform " + s.directive.name;
    if (!s.directive.args.empty()) {
      std::string d = to_string(s.directive);
      out += d.substr(s.directive.name.size());
    }
    out += '\n';
    break;
  case StmtKind::Local:
    out += "local " + s.name + ": ";
    print_type(s.local_type, out);
    out += ";\n";
    break;
  }
}

void print_block(const std::vector<Stmt> &body, int depth, std::string &out) {
  out += "{\n";
  for (const Stmt &s : body)
    print_stmt(s, depth + 1, out);
  out += std::string(static_cast<std::size_t>(depth) * 2, ' ');
  out += "}\n";
}

} // namespace

std::string print(const Expr &e) {
  std::string out;
  print_expr(e, out);
  return out;
}

std::string print(const Function &f) {
  std::string out = "func " + f.name + "(";
  for (std::size_t i = 0; i < f.params.size(); ++i) {
    const Param &p = f.params[i];
    if (i)
      out += ", ";
    out += p.name + ": ";
    print_type(p.type, out);
    if (p.restrict_)
      out += " restrict";
    if (p.opaque)
      out += " opaque";
  }
  out += ") ";
  print_block(f.body, 0, out);
  return out;
}

std::string print(const Program &p) {
  std::string out;
  for (std::size_t i = 0; i < p.functions.size(); ++i) {
    if (i)
      out += '\n';
    out += print(p.functions[i]);
  }
  return out;
}

} // namespace loopdag::mir
