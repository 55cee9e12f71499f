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

// Mini-IR: the structured source language consumed and produced by the
// optimizer. Abstract syntax, parser, printer and validator.

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace loopdag::mir {

struct SourcePos {
  int line = 0;
  int col = 0;
};

enum class ScalarType : std::uint8_t { I64, F64 };

std::string_view to_string(ScalarType t);

/// Expression operators. Shared with the DAG's expression nodes.
enum class Op : std::uint8_t {
  IntLit,
  FloatLit,
  Var,      // scalar, induction variable or parameter read
  Load,     // array element read; args are subscripts
  ArrayRef, // whole-array argument of a call
  Call,     // pure intrinsic
  Neg,
  Not,
  Add,
  Sub,
  Mul,
  Div,
  Mod,
  Lt,
  Le,
  Gt,
  Ge,
  Eq,
  Ne,
  And,
  Or,
};

bool is_binary(Op op);
bool is_unary(Op op);
std::string_view op_spelling(Op op);

struct Expr {
  Op op = Op::IntLit;
  std::int64_t ival = 0;
  double fval = 0.0;
  std::string name;
  std::vector<Expr> args;
  SourcePos pos;

  static Expr int_lit(std::int64_t v);
  static Expr float_lit(double v);
  static Expr var(std::string n);
  static Expr load(std::string array, std::vector<Expr> subs);
  static Expr array_ref(std::string array);
  static Expr call(std::string fn, std::vector<Expr> args);
  static Expr unary(Op op, Expr a);
  static Expr binary(Op op, Expr a, Expr b);
};

struct Type {
  ScalarType elem = ScalarType::I64;
  std::vector<Expr> extents; // empty for scalars

  bool is_array() const { return !extents.empty(); }
  std::size_t rank() const { return extents.size(); }
};

struct Param {
  std::string name;
  Type type;
  bool restrict_ = false;
  bool opaque = false;
};

struct DirectiveArg {
  bool is_label = true;
  std::string label;
  std::int64_t value = 0;
};

struct Directive {
  std::string name;
  std::vector<DirectiveArg> args;
  SourcePos pos;

  std::vector<std::string> labels() const;
  std::vector<std::int64_t> ints() const;
};

/// Parses `name(arg, ...)` separated by ';'. Throws ParseError.
std::vector<Directive> parse_directives(std::string_view text);
std::string to_string(const Directive &d);
/// Checks name and arity. Returns an empty string when well-formed.
std::string check_directive(const Directive &d);

enum class StmtKind : std::uint8_t {
  For,
  While,
  If,
  Assign,
  Store,
  Call,
  Pragma,
  Local,
};

struct Stmt {
  StmtKind kind = StmtKind::Assign;
  std::string label; // For/While only
  std::string name;  // iv, assigned scalar, stored array, callee, local
  Expr lower, upper, step; // For
  Expr cond;               // While/If
  Expr value;              // Assign/Store
  std::vector<Expr> subs;  // Store subscripts, Call arguments
  bool update = false;     // Store with `+=`
  std::vector<Stmt> body;
  std::vector<Stmt> else_body;
  bool has_else = false;
  Directive directive; // Pragma
  Type local_type;     // Local
  SourcePos pos;
  int id = -1; // pre-order statement number, see number_statements

  static Stmt assign(std::string dest, Expr v);
  static Stmt store(std::string array, std::vector<Expr> subs, Expr v,
                    bool update = false);
};

struct Function {
  std::string name;
  std::vector<Param> params;
  std::vector<Stmt> body;
  SourcePos pos;

  const Param *find_param(std::string_view n) const;
};

struct Program {
  std::vector<Function> functions;

  const Function *find(std::string_view name) const;
};

class ParseError : public std::runtime_error {
public:
  ParseError(SourcePos pos, const std::string &msg);
  SourcePos pos() const { return pos_; }

private:
  SourcePos pos_;
};

struct Diagnostic {
  SourcePos pos;
  std::string message;
};

inline constexpr std::string_view kIntrinsics[] = {"sin", "cos", "select",
                                                   "min", "max", "base",
                                                   "extent"};
bool is_intrinsic(std::string_view name);

/// Parses a whole program. Syntax errors, duplicate labels, unknown callees
/// and malformed directives raise ParseError. Statement ids are assigned.
Program parse(std::string_view text);

std::string print(const Program &p);
std::string print(const Function &f);
std::string print(const Expr &e);

std::vector<Diagnostic> validate(const Program &p);

/// Assigns pre-order ids to every statement of f, starting at 0.
void number_statements(Function &f);

/// Element types of scalar parameters, assigned scalars and induction
/// variables, as inferred by validate().
std::map<std::string, ScalarType> scalar_types(const Function &f);

bool equal(const Expr &a, const Expr &b);
bool equal(const Stmt &a, const Stmt &b);
bool equal(const Function &a, const Function &b);
bool equal(const Program &a, const Program &b);

} // namespace loopdag::mir
