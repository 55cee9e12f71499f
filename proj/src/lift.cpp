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


#include "loopdag/analysis.hpp"

namespace loopdag {

namespace {

void expr_reads(const mir::Expr &e, std::set<std::string> &scalars,
                std::set<std::string> &arrays) {
  if (e.op == Op::Var)
    scalars.insert(e.name);
  else if (e.op == Op::Load || e.op == Op::ArrayRef)
    arrays.insert(e.name);
  for (const mir::Expr &a : e.args)
    expr_reads(a, scalars, arrays);
}

void body_writes(const std::vector<mir::Stmt> &body,
                 std::set<std::string> &scalars,
                 std::set<std::string> &arrays) {
  for (const mir::Stmt &s : body) {
    switch (s.kind) {
    case mir::StmtKind::Assign:
      scalars.insert(s.name);
      break;
    case mir::StmtKind::Store:
      arrays.insert(s.name);
      break;
    case mir::StmtKind::Call:
      for (const mir::Expr &a : s.subs)
        if (a.op == Op::ArrayRef)
          arrays.insert(a.name);
      break;
    case mir::StmtKind::For:
      scalars.insert(s.name);
      break;
    default:
      break;
    }
    body_writes(s.body, scalars, arrays);
    body_writes(s.else_body, scalars, arrays);
  }
}

bool intersects(const std::set<std::string> &a, const std::set<std::string> &b) {
  for (const std::string &x : a)
    if (b.count(x))
      return true;
  return false;
}

bool may_trap_arith(const mir::Expr &e) {
  if ((e.op == Op::Div || e.op == Op::Mod) &&
      !(e.args[1].op == Op::IntLit && e.args[1].ival != 0) &&
      !(e.args[1].op == Op::FloatLit && e.args[1].fval != 0.0))
    return true;
  for (const mir::Expr &a : e.args)
    if (may_trap_arith(a))
      return true;
  return false;
}

class Lifter {
public:
  Lifter(Builder &b, const mir::Function &f) : b_(b), fn_(f) {
    for (const mir::Param &p : f.params)
      if (p.opaque)
        opaque_arrays_.insert(p.name);
  }

  LiftedFunction run() {
    FunctionData data;
    data.name = fn_.name;
    data.params = fn_.params;
    data.scalars = mir::scalar_types(fn_);
    for (const mir::Stmt &s : fn_.body)
      if (s.kind == mir::StmtKind::Local)
        data.locals.push_back({s.name, s.local_type});
    std::vector<Green> items;
    block(fn_.body, b_.true_pred(), items);
    for (const std::string &p : flags_)
      data.scalars[p] = ScalarType::I64;
    LiftedFunction out;
    out.root = b_.function(std::move(data), std::move(items));
    out.directives = std::move(directives_);
    return out;
  }

private:
  void block(const std::vector<mir::Stmt> &body, const Green &pred,
             std::vector<Green> &out) {
    for (std::size_t i = 0; i < body.size(); ++i) {
      const mir::Stmt &s = body[i];
      switch (s.kind) {
      case mir::StmtKind::For:
      case mir::StmtKind::While:
        out.push_back(loop(s, pred));
        break;
      case mir::StmtKind::If:
        if_stmt(s, pred, out);
        break;
      case mir::StmtKind::Assign: {
        StmtData d;
        d.op = StmtOp::Assign;
        d.target = s.name;
        d.origin = s.id;
        std::set<std::string> sc, ar;
        expr_reads(s.value, sc, ar);
        d.props = props(s, sc.count(s.name) > 0, ar);
        out.push_back(b_.stmt(d, {pred, b_.from_ast(s.value)}));
        break;
      }
      case mir::StmtKind::Store: {
        StmtData d;
        d.op = s.update ? StmtOp::Update : StmtOp::Store;
        d.target = s.name;
        d.origin = s.id;
        std::set<std::string> sc, ar;
        expr_reads(s.value, sc, ar);
        for (const mir::Expr &e : s.subs)
          expr_reads(e, sc, ar);
        ar.insert(s.name);
        d.props = props(s, s.update || reads_alias(s.name, s.value), ar);
        std::vector<Green> kids{pred};
        for (const mir::Expr &e : s.subs)
          kids.push_back(b_.from_ast(e));
        kids.push_back(b_.from_ast(s.value));
        out.push_back(b_.stmt(d, std::move(kids)));
        break;
      }
      case mir::StmtKind::Call: {
        StmtData d;
        d.op = StmtOp::Call;
        d.target = s.name;
        d.origin = s.id;
        d.props.idempotent = false;
        d.props.speculatable = false;
        d.props.opaque = true;
        d.parallel = s.name == "gemm";
        std::vector<Green> kids{pred};
        for (const mir::Expr &e : s.subs)
          kids.push_back(b_.from_ast(e));
        out.push_back(b_.stmt(d, std::move(kids)));
        break;
      }
      case mir::StmtKind::Pragma:
        pragma(s.directive, i + 1 < body.size() ? &body[i + 1] : nullptr);
        break;
      case mir::StmtKind::Local:
        break;
      }
    }
  }

  bool reads_alias(const std::string &array, const mir::Expr &e) {
    std::set<std::string> sc, ar;
    expr_reads(e, sc, ar);
    for (const std::string &a : ar) {
      if (a == array)
        return true;
      const mir::Param *p = fn_.find_param(a);
      const mir::Param *q = fn_.find_param(array);
      if (p && q && !p->restrict_ && !q->restrict_)
        return true;
    }
    return false;
  }

  PropertySet props(const mir::Stmt &s, bool reads_own_target,
                    const std::set<std::string> &arrays) {
    PropertySet p;
    p.idempotent = !reads_own_target;
    bool trap = may_trap_arith(s.value);
    for (const mir::Expr &e : s.subs)
      trap = trap || may_trap_arith(e);
    p.speculatable = !trap;
    p.opaque = intersects(arrays, opaque_arrays_);
    return p;
  }

  Green loop(const mir::Stmt &s, const Green &pred) {
    LoopData d;
    d.label = s.label;
    d.origin = s.id;
    if (auto it = auto_labels_.find(s.id); it != auto_labels_.end())
      d.label = it->second;
    std::vector<Green> kids;
    if (s.kind == mir::StmtKind::While) {
      d.is_while = true;
      kids.push_back(b_.logical_and(pred, b_.from_ast(s.cond)));
    } else {
      d.iv = s.name;
      std::set<std::string> ws, wa, rs, ra;
      body_writes(s.body, ws, wa);
      expr_reads(s.lower, rs, ra);
      expr_reads(s.upper, rs, ra);
      expr_reads(s.step, rs, ra);
      bool literal_step = s.step.op == Op::IntLit && s.step.ival > 0;
      d.canonical = literal_step && !intersects(rs, ws) && !intersects(ra, wa);
      d.step = literal_step ? s.step.ival : 1;
      kids.push_back(b_.from_ast(s.lower));
      kids.push_back(b_.from_ast(s.upper));
      kids.push_back(b_.from_ast(s.step));
    }
    std::vector<Green> body;
    block(s.body, pred, body);
    for (const Green &g : body) {
      if ((g->is_stmt() && g->stmt().props.opaque) ||
          (g->is_loop() && g->loop().opaque))
        d.opaque = true;
      kids.push_back(g);
    }
    return b_.loop(std::move(d), std::move(kids));
  }

  void if_stmt(const mir::Stmt &s, const Green &pred, std::vector<Green> &out) {
    std::set<std::string> ws, wa, rs, ra;
    body_writes(s.body, ws, wa);
    body_writes(s.else_body, ws, wa);
    expr_reads(s.cond, rs, ra);
    Green cond = b_.from_ast(s.cond);
    if (intersects(rs, ws) || intersects(ra, wa)) {
      std::string flag = "__p" + std::to_string(s.id);
      flags_.push_back(flag);
      StmtData d;
      d.op = StmtOp::Assign;
      d.target = flag;
      d.origin = s.id;
      d.props.speculatable = !may_trap_arith(s.cond);
      d.props.opaque = intersects(ra, opaque_arrays_);
      out.push_back(b_.stmt(d, {pred, cond}));
      cond = b_.var(flag);
    }
    block(s.body, b_.logical_and(pred, cond), out);
    if (s.has_else)
      block(s.else_body, b_.logical_and(pred, b_.logical_not(cond)), out);
  }

  void pragma(const mir::Directive &dir, const mir::Stmt *next) {
    mir::Directive d = dir;
    bool implicit = d.args.empty() && next &&
                    (next->kind == mir::StmtKind::For ||
                     next->kind == mir::StmtKind::While);
    if (implicit) {
      std::string label = next->label;
      if (label.empty()) {
        label = "__L" + std::to_string(next->id);
        auto_labels_[next->id] = label;
      }
      mir::DirectiveArg a;
      a.label = label;
      d.args.push_back(a);
    }
    directives_.push_back(std::move(d));
  }

  Builder &b_;
  const mir::Function &fn_;
  std::set<std::string> opaque_arrays_;
  std::map<int, std::string> auto_labels_;
  std::vector<mir::Directive> directives_;
  std::vector<std::string> flags_;
};

} // namespace

LiftedFunction lift(Builder &b, const mir::Function &f) {
  return Lifter(b, f).run();
}

Green build_dag(Builder &b, const mir::Function &f) { return lift(b, f).root; }

} // namespace loopdag
