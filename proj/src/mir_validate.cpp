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
#include <map>
#include <optional>
#include <set>

#include "loopdag/mir.hpp"

namespace loopdag::mir {

namespace {

struct ArrayInfo {
  ScalarType elem;
  std::size_t rank;
};

class Validator {
public:
  Validator(const Program &p, const Function &f,
            std::vector<Diagnostic> &diags)
      : prog_(p), fn_(f), diags_(diags) {}

  void run() {
    std::set<std::string> names;
    std::set<std::string> i64_params;
    for (const Param &p : fn_.params) {
      if (!names.insert(p.name).second)
        report(fn_.pos, "duplicate parameter '" + p.name + "'");
      if (p.type.is_array()) {
        for (const Expr &e : p.type.extents)
          check_extent(e, i64_params, fn_.pos);
        arrays_[p.name] = {p.type.elem, p.type.rank()};
      } else {
        scalars_[p.name] = p.type.elem;
        params_.insert(p.name);
        if (p.type.elem == ScalarType::I64)
          i64_params.insert(p.name);
      }
      if (p.opaque && !p.type.is_array())
        report(fn_.pos, "'opaque' applies to array parameters only");
    }
    for (const Stmt &s : fn_.body) {
      if (s.kind != StmtKind::Local)
        continue;
      if (arrays_.count(s.name) || scalars_.count(s.name))
        report(s.pos, "local '" + s.name + "' shadows a parameter");
      if (!s.local_type.is_array())
        report(s.pos, "local declarations must be arrays");
      for (const Expr &e : s.local_type.extents)
        check_extent(e, i64_params, s.pos);
      arrays_[s.name] = {s.local_type.elem, s.local_type.rank()};
    }
    collect_labels(fn_.body);
    // Scalar types follow from assignments; iterate until stable so that
    // reads of not-yet-typed scalars settle.
    for (int round = 0; round < 4; ++round)
      infer_scalars(fn_.body);
    std::vector<std::string> ivs;
    walk(fn_.body, ivs, /*top=*/true);
  }

  /// Types of parameters, scalars and induction variables after run().
  std::map<std::string, ScalarType> types() const {
    std::map<std::string, ScalarType> out = scalars_;
    for (const std::string &iv : iv_names_)
      out.emplace(iv, ScalarType::I64);
    return out;
  }

private:
  void report(SourcePos pos, std::string msg) {
    diags_.push_back({pos, std::move(msg)});
  }

  void check_extent(const Expr &e, const std::set<std::string> &i64_params,
                    SourcePos pos) {
    if (e.op == Op::IntLit)
      return;
    if (e.op == Op::Var && i64_params.count(e.name))
      return;
    report(pos, "array extent must be an integer literal or an earlier i64 "
                "parameter");
  }

  void collect_labels(const std::vector<Stmt> &body) {
    for (const Stmt &s : body) {
      if (!s.label.empty())
        labels_.insert(s.label);
      if (s.kind == StmtKind::For)
        iv_names_.insert(s.name);
      collect_labels(s.body);
      collect_labels(s.else_body);
    }
  }

  std::optional<ScalarType> type_of(const Expr &e) {
    switch (e.op) {
    case Op::IntLit:
      return ScalarType::I64;
    case Op::FloatLit:
      return ScalarType::F64;
    case Op::Var: {
      if (iv_names_.count(e.name))
        return ScalarType::I64;
      auto it = scalars_.find(e.name);
      if (it == scalars_.end())
        return std::nullopt;
      return it->second;
    }
    case Op::Load: {
      auto it = arrays_.find(e.name);
      if (it == arrays_.end())
        return std::nullopt;
      return it->second.elem;
    }
    case Op::ArrayRef:
      return ScalarType::I64;
    case Op::Call:
      if (e.name == "sin" || e.name == "cos")
        return ScalarType::F64;
      if (e.name == "base" || e.name == "extent")
        return ScalarType::I64;
      return join(e.name == "select" ? 1 : 0, e);
    case Op::Neg:
      return type_of(e.args[0]);
    case Op::Not:
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge:
    case Op::Eq:
    case Op::Ne:
    case Op::And:
    case Op::Or:
      return ScalarType::I64;
    default:
      return join(0, e);
    }
  }

  std::optional<ScalarType> join(std::size_t from, const Expr &e) {
    std::optional<ScalarType> t;
    for (std::size_t i = from; i < e.args.size(); ++i) {
      auto a = type_of(e.args[i]);
      if (!a)
        continue;
      if (!t || *a == ScalarType::F64)
        t = a;
    }
    return t ? t : std::optional<ScalarType>(ScalarType::I64);
  }

  void infer_scalars(const std::vector<Stmt> &body) {
    for (const Stmt &s : body) {
      if (s.kind == StmtKind::Assign && !params_.count(s.name) &&
          !scalars_.count(s.name)) {
        if (auto t = type_of(s.value))
          scalars_[s.name] = *t;
      }
      infer_scalars(s.body);
      infer_scalars(s.else_body);
    }
  }

  void expr(const Expr &e, const std::vector<std::string> &ivs) {
    switch (e.op) {
    case Op::Var:
      if (arrays_.count(e.name))
        report(e.pos, "array '" + e.name + "' used as a scalar");
      else if (!scalars_.count(e.name) &&
               std::find(ivs.begin(), ivs.end(), e.name) == ivs.end())
        report(e.pos, "undefined scalar '" + e.name + "'");
      break;
    case Op::Load: {
      auto it = arrays_.find(e.name);
      if (it == arrays_.end()) {
        report(e.pos, "undefined array '" + e.name + "'");
      } else if (it->second.rank != e.args.size()) {
        report(e.pos, "rank mismatch: '" + e.name + "' has rank " +
                          std::to_string(it->second.rank) + " but " +
                          std::to_string(e.args.size()) +
                          " subscripts given");
      }
      for (const Expr &s : e.args)
        subscript(s, ivs);
      return;
    }
    case Op::ArrayRef:
      if (!arrays_.count(e.name))
        report(e.pos, "undefined array '" + e.name + "'");
      return;
    case Op::Call: {
      std::size_t want = 0;
      if (e.name == "sin" || e.name == "cos" || e.name == "base" ||
          e.name == "extent")
        want = 1;
      else if (e.name == "min" || e.name == "max")
        want = 2;
      else if (e.name == "select")
        want = 3;
      if (e.args.size() != want)
        report(e.pos, "intrinsic '" + e.name + "' expects " +
                          std::to_string(want) + " arguments");
      if ((e.name == "base" || e.name == "extent") && e.args.size() == 1 &&
          e.args[0].op != Op::ArrayRef)
        report(e.pos, "'" + e.name + "' expects an array argument");
      break;
    }
    case Op::Mod:
      if (type_of(e) == ScalarType::F64)
        report(e.pos, "'%' requires i64 operands");
      break;
    default:
      break;
    }
    for (const Expr &a : e.args)
      expr(a, ivs);
  }

  void subscript(const Expr &e, const std::vector<std::string> &ivs) {
    expr(e, ivs);
    if (type_of(e) == ScalarType::F64)
      report(e.pos, "subscript must be i64");
  }

  void writes_iv(const std::vector<Stmt> &body, const std::string &iv,
                 SourcePos loop_pos) {
    for (const Stmt &s : body) {
      if (s.kind == StmtKind::Assign && s.name == iv)
        report(s.pos, "non-canonical loop: induction variable '" + iv +
                          "' is reassigned in its body (loop at line " +
                          std::to_string(loop_pos.line) + ")");
      writes_iv(s.body, iv, loop_pos);
      writes_iv(s.else_body, iv, loop_pos);
    }
  }

  void walk(const std::vector<Stmt> &body, std::vector<std::string> &ivs,
            bool top) {
    for (std::size_t idx = 0; idx < body.size(); ++idx) {
      const Stmt &s = body[idx];
      switch (s.kind) {
      case StmtKind::For:
        for (const Expr *b : {&s.lower, &s.upper, &s.step}) {
          expr(*b, ivs);
          if (type_of(*b) == ScalarType::F64)
            report(b->pos, "loop bounds must be i64");
        }
        if (std::find(ivs.begin(), ivs.end(), s.name) != ivs.end())
          report(s.pos, "induction variable '" + s.name +
                            "' shadows an enclosing loop");
        if (arrays_.count(s.name) || params_.count(s.name))
          report(s.pos, "induction variable '" + s.name +
                            "' shadows a parameter");
        writes_iv(s.body, s.name, s.pos);
        ivs.push_back(s.name);
        walk(s.body, ivs, false);
        ivs.pop_back();
        break;
      case StmtKind::While:
        expr(s.cond, ivs);
        walk(s.body, ivs, false);
        break;
      case StmtKind::If:
        expr(s.cond, ivs);
        walk(s.body, ivs, false);
        walk(s.else_body, ivs, false);
        break;
      case StmtKind::Assign: {
        if (arrays_.count(s.name))
          report(s.pos, "cannot assign to array '" + s.name + "'");
        expr(s.value, ivs);
        auto vt = type_of(s.value);
        auto st = scalars_.find(s.name);
        if (vt && st != scalars_.end() && *vt != st->second &&
            !(st->second == ScalarType::F64 && *vt == ScalarType::I64))
          report(s.pos, "type mismatch assigning " +
                            std::string(to_string(*vt)) + " to " +
                            std::string(to_string(st->second)) + " scalar '" +
                            s.name + "'");
        break;
      }
      case StmtKind::Store: {
        auto it = arrays_.find(s.name);
        if (it == arrays_.end()) {
          report(s.pos, "store to undefined array '" + s.name + "'");
        } else {
          if (it->second.rank != s.subs.size())
            report(s.pos, "rank mismatch: '" + s.name + "' has rank " +
                              std::to_string(it->second.rank) + " but " +
                              std::to_string(s.subs.size()) +
                              " subscripts given");
          if (it->second.elem == ScalarType::I64 &&
              type_of(s.value) == ScalarType::F64)
            report(s.pos, "type mismatch storing f64 into i64 array '" +
                              s.name + "'");
        }
        for (const Expr &e : s.subs)
          subscript(e, ivs);
        expr(s.value, ivs);
        break;
      }
      case StmtKind::Call:
        call(s, ivs);
        break;
      case StmtKind::Pragma: {
        for (const std::string &l : s.directive.labels())
          if (!labels_.count(l))
            report(s.pos, "directive references unknown label '" + l + "'");
        std::string err = check_directive(s.directive);
        if (!err.empty()) {
          bool next_is_loop = idx + 1 < body.size() &&
                              (body[idx + 1].kind == StmtKind::For ||
                               body[idx + 1].kind == StmtKind::While);
          if (!(s.directive.args.empty() && next_is_loop))
            report(s.pos, "malformed directive: " + err);
        }
        break;
      }
      case StmtKind::Local:
        if (!top)
          report(s.pos, "local declarations are only allowed at function "
                        "top level");
        break;
      }
    }
  }

  void call(const Stmt &s, const std::vector<std::string> &ivs) {
    for (const Expr &a : s.subs)
      expr(a, ivs);
    if (s.name == "gemm") {
      if (s.subs.size() != 6) {
        report(s.pos, "gemm expects (C, A, B, ni, nj, nk)");
        return;
      }
      for (int i = 0; i < 3; ++i) {
        const Expr &a = s.subs[static_cast<std::size_t>(i)];
        auto it = arrays_.find(a.name);
        if (a.op != Op::ArrayRef || it == arrays_.end() ||
            it->second.rank != 2)
          report(s.pos, "gemm operands must be rank-2 arrays");
      }
      return;
    }
    const Function *callee = prog_.find(s.name);
    if (!callee) {
      report(s.pos, "unknown callee '" + s.name + "'");
      return;
    }
    if (callee->name == fn_.name || reaches(*callee, fn_.name, 0))
      report(s.pos, "recursive call to '" + s.name + "'");
    if (callee->params.size() != s.subs.size()) {
      report(s.pos, "call to '" + s.name + "' has wrong number of arguments");
      return;
    }
    for (std::size_t i = 0; i < s.subs.size(); ++i) {
      bool want_array = callee->params[i].type.is_array();
      bool is_array = s.subs[i].op == Op::ArrayRef;
      if (want_array != is_array)
        report(s.pos, "argument " + std::to_string(i + 1) + " of '" + s.name +
                          "' must be " + (want_array ? "an array" : "a scalar"));
    }
  }

  bool reaches(const Function &from, const std::string &target, int depth) {
    if (depth > 64)
      return true;
    bool found = false;
    visit_calls(from.body, [&](const std::string &callee) {
      if (found)
        return;
      if (callee == target) {
        found = true;
      } else if (const Function *f = prog_.find(callee)) {
        found = reaches(*f, target, depth + 1);
      }
    });
    return found;
  }

  template <typename F>
  void visit_calls(const std::vector<Stmt> &body, F &&f) {
    for (const Stmt &s : body) {
      if (s.kind == StmtKind::Call)
        f(s.name);
      visit_calls(s.body, f);
      visit_calls(s.else_body, f);
    }
  }

  const Program &prog_;
  const Function &fn_;
  std::vector<Diagnostic> &diags_;
  std::map<std::string, ArrayInfo> arrays_;
  std::map<std::string, ScalarType> scalars_;
  std::set<std::string> params_;
  std::set<std::string> labels_;
  std::set<std::string> iv_names_;
};

} // namespace

std::vector<Diagnostic> validate(const Program &p) {
  std::vector<Diagnostic> diags;
  std::set<std::string> names;
  for (const Function &f : p.functions) {
    if (!names.insert(f.name).second)
      diags.push_back({f.pos, "duplicate function '" + f.name + "'"});
    Validator(p, f, diags).run();
  }
  return diags;
}

std::map<std::string, ScalarType> scalar_types(const Function &f) {
  Program p;
  p.functions.push_back(f);
  std::vector<Diagnostic> ignored;
  Validator v(p, p.functions[0], ignored);
  v.run();
  return v.types();
}

} // namespace loopdag::mir
