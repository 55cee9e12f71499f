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
#include <set>

#include "loopdag/pipeline.hpp"

namespace loopdag::pipeline {

namespace {

std::size_t expr_size(const Green &e) {
  std::size_t n = 1;
  for (const Green &c : e->children())
    n += expr_size(c);
  return n;
}

bool leaf(const Green &e) {
  Op op = e->expr().op;
  return op == Op::IntLit || op == Op::FloatLit || op == Op::Var ||
         op == Op::ArrayRef;
}

// Expensive enough to keep in a temporary.
bool worth_cse(const Green &e) {
  Op op = e->expr().op;
  if (op == Op::Mul || op == Op::Div || op == Op::Mod || op == Op::Call)
    return true;
  if (expr_size(e) >= 5)
    return true;
  return std::any_of(e->children().begin(), e->children().end(),
                     [](const Green &c) { return worth_cse(c); });
}

// Free of memory reads and of trapping arithmetic, so hoisting is safe.
bool cse_safe(const Green &e) {
  const ExprData &d = e->expr();
  if (d.op == Op::Load || d.op == Op::ArrayRef)
    return false;
  if ((d.op == Op::Div || d.op == Op::Mod) &&
      e->children()[1]->expr().op != Op::IntLit &&
      e->children()[1]->expr().op != Op::FloatLit)
    return false;
  if (d.op == Op::Call && (d.name == "base" || d.name == "extent"))
    return false;
  for (const Green &c : e->children())
    if (!cse_safe(c))
      return false;
  return true;
}

void scalars_written(const Green &n, std::set<std::string> &out) {
  if (n->is_stmt()) {
    if (n->stmt().op == StmtOp::Assign)
      out.insert(n->stmt().target);
    return;
  }
  if (n->is_loop() && !n->loop().iv.empty())
    out.insert(n->loop().iv);
  for (const Green &c : n->body())
    scalars_written(c, out);
}

// Names a statement may modify; nullopt when it may modify anything.
std::optional<std::set<std::string>> modifies(const GreenNode &s) {
  const StmtData &d = s.stmt();
  if (d.op == StmtOp::Call)
    return std::nullopt;
  return std::set<std::string>{d.target};
}

class Emitter {
public:
  Emitter(Builder &b, const LowerOptions &o, int &counter, bool labels)
      : b_(b), opts_(o), counter_(counter), labels_(labels) {}

  std::vector<mir::Stmt> scope(std::span<const Green> items) {
    std::vector<mir::Stmt> out;
    std::vector<const GreenNode *> added;
    if (!opts_.rematerialize)
      materialize(items, out, added);
    emit_items(items, out);
    for (const GreenNode *n : added)
      temps_.erase(n);
    return out;
  }

  mir::Expr expr(const Green &e) {
    if (auto it = temps_.find(e.get()); it != temps_.end())
      return mir::Expr::var(it->second);
    const ExprData &d = e->expr();
    std::vector<mir::Expr> args;
    for (const Green &c : e->children())
      args.push_back(expr(c));
    switch (d.op) {
    case Op::IntLit:
      return mir::Expr::int_lit(d.ival);
    case Op::FloatLit:
      return mir::Expr::float_lit(d.fval);
    case Op::Var:
      return mir::Expr::var(d.name);
    case Op::Load:
      return mir::Expr::load(d.name, std::move(args));
    case Op::ArrayRef:
      return mir::Expr::array_ref(d.name);
    case Op::Call:
      return mir::Expr::call(d.name, std::move(args));
    default:
      if (mir::is_unary(d.op))
        return mir::Expr::unary(d.op, std::move(args[0]));
      return mir::Expr::binary(d.op, std::move(args[0]), std::move(args[1]));
    }
  }

private:
  // Shared-expression temporaries ------------------------------------------

  struct Use {
    int count = 0;
    std::set<int> slots; // -1: evaluated directly in this scope
    std::size_t first = 0;
  };

  void count_expr(const Green &e, int slot, std::map<const GreenNode *, Use> &uses,
                  std::map<const GreenNode *, Green> &nodes) {
    if (temps_.count(e.get()))
      return;
    Use &u = uses[e.get()];
    if (u.count == 0) {
      u.first = uses.size();
      nodes[e.get()] = e;
    }
    ++u.count;
    u.slots.insert(slot);
    if (u.count == 1)
      for (const Green &c : e->children())
        count_expr(c, slot, uses, nodes);
  }

  void count_items(std::span<const Green> items, int slot, bool top,
                   std::map<const GreenNode *, Use> &uses,
                   std::map<const GreenNode *, Green> &nodes) {
    for (std::size_t k = 0; k < items.size(); ++k) {
      const Green &it = items[k];
      int s = top ? -1 : slot;
      if (it->is_stmt()) {
        for (const Green &c : it->children())
          count_expr(c, s, uses, nodes);
        continue;
      }
      for (const Green &h : it->header())
        count_expr(h, s, uses, nodes);
      count_items(it->body(), top ? static_cast<int>(k) : slot, false, uses,
                  nodes);
    }
  }

  void materialize(std::span<const Green> items, std::vector<mir::Stmt> &out,
                   std::vector<const GreenNode *> &added) {
    std::set<std::string> assigned;
    for (const Green &it : items)
      scalars_written(it, assigned);
    std::map<const GreenNode *, Use> uses;
    std::map<const GreenNode *, Green> nodes;
    count_items(items, -1, true, uses, nodes);
    std::vector<std::pair<std::pair<std::size_t, std::size_t>, Green>> picks;
    for (const auto &[n, u] : uses) {
      const Green &e = nodes[n];
      if (u.count < 2 || leaf(e) || !worth_cse(e) || !cse_safe(e))
        continue;
      if (u.slots.size() < 2 && !u.slots.count(-1))
        continue;
      std::set<std::string> sc, ar;
      collect_reads(e, sc, ar);
      bool valid = std::none_of(sc.begin(), sc.end(), [&](const std::string &v) {
        return assigned.count(v) > 0;
      });
      if (valid)
        picks.push_back({{expr_size(e), u.first}, e});
    }
    std::sort(picks.begin(), picks.end(),
              [](const auto &a, const auto &b) { return a.first < b.first; });
    for (const auto &p : picks) {
      std::string name = "_cse" + std::to_string(counter_++);
      out.push_back(mir::Stmt::assign(name, expr(p.second)));
      temps_[p.second.get()] = name;
      added.push_back(p.second.get());
    }
  }

  // Items --------------------------------------------------------------------

  void emit_items(std::span<const Green> items, std::vector<mir::Stmt> &out) {
    for (std::size_t i = 0; i < items.size();) {
      const Green &it = items[i];
      if (it->is_loop()) {
        std::optional<Green> g = xform::loop_guard(*it);
        if (g && i + 1 < items.size() && items[i + 1]->is_loop()) {
          std::optional<Green> h = xform::loop_guard(*items[i + 1]);
          if (h && *h == b_.logical_not(*g)) {
            mir::Stmt s = if_stmt(expr(*g), loop(it));
            s.has_else = true;
            s.else_body = loop(items[i + 1]);
            out.push_back(std::move(s));
            i += 2;
            continue;
          }
        }
        std::vector<mir::Stmt> l = loop(it);
        if (g)
          out.push_back(if_stmt(expr(*g), std::move(l)));
        else
          out.insert(out.end(), l.begin(), l.end());
        ++i;
        continue;
      }
      const Green &pred = it->predicate();
      if (is_true_lit(pred)) {
        out.push_back(stmt(*it));
        ++i;
        continue;
      }
      // Run of statements sharing the predicate whose inputs stay unchanged.
      std::set<std::string> ps, pa;
      collect_reads(pred, ps, pa);
      std::size_t j = i + 1;
      for (; j < items.size(); ++j) {
        if (!items[j]->is_stmt() || items[j]->predicate() != pred)
          break;
        auto m = modifies(*items[j - 1]);
        if (!m)
          break;
        bool hit = std::any_of(m->begin(), m->end(), [&](const std::string &x) {
          return ps.count(x) || pa.count(x);
        });
        if (hit)
          break;
      }
      if (opts_.style == PredicateStyle::Branches) {
        std::vector<mir::Stmt> body;
        for (std::size_t k = i; k < j; ++k)
          body.push_back(stmt(*items[k]));
        out.push_back(if_stmt(expr(pred), std::move(body)));
      } else {
        std::string flag = "__f" + std::to_string(counter_++);
        out.push_back(mir::Stmt::assign(flag, expr(pred)));
        for (std::size_t k = i; k < j; ++k)
          out.push_back(if_stmt(mir::Expr::var(flag), {stmt(*items[k])}));
      }
      i = j;
    }
  }

  static mir::Stmt if_stmt(mir::Expr cond, std::vector<mir::Stmt> body) {
    mir::Stmt s;
    s.kind = mir::StmtKind::If;
    s.cond = std::move(cond);
    s.body = std::move(body);
    return s;
  }

  std::vector<mir::Stmt> loop(const Green &orig) {
    Green n = xform::materialize_reversal(b_, orig);
    const LoopData &d = n->loop();
    std::vector<mir::Stmt> out;
    if (d.parallel) {
      mir::Stmt p;
      p.kind = mir::StmtKind::Pragma;
      p.directive.name = "parallel";
      if (labels_ && !d.label.empty()) {
        mir::DirectiveArg a;
        a.label = d.label;
        p.directive.args.push_back(a);
      }
      out.push_back(std::move(p));
    }
    mir::Stmt s;
    if (labels_)
      s.label = d.label;
    if (d.is_while) {
      s.kind = mir::StmtKind::While;
      s.cond = expr(n->children()[0]);
    } else {
      s.kind = mir::StmtKind::For;
      s.name = d.iv;
      s.lower = expr(n->lower());
      s.upper = expr(xform::unguarded_upper(*n));
      s.step = expr(n->step_expr());
    }
    s.body = scope(n->body());
    out.push_back(std::move(s));
    return out;
  }

  mir::Stmt stmt(const GreenNode &n) {
    const StmtData &d = n.stmt();
    switch (d.op) {
    case StmtOp::Assign:
      return mir::Stmt::assign(d.target, expr(n.value()));
    case StmtOp::Store:
    case StmtOp::Update: {
      std::vector<mir::Expr> subs;
      for (const Green &s : n.subscripts())
        subs.push_back(expr(s));
      return mir::Stmt::store(d.target, std::move(subs), expr(n.value()),
                              d.op == StmtOp::Update);
    }
    case StmtOp::Call: {
      mir::Stmt s;
      s.kind = mir::StmtKind::Call;
      s.name = d.target;
      for (const Green &a : n.call_args())
        s.subs.push_back(expr(a));
      return s;
    }
    }
    return {};
  }

  Builder &b_;
  LowerOptions opts_;
  int &counter_;
  bool labels_;
  std::map<const GreenNode *, std::string> temps_;
};

mir::Function header(const FunctionData &f,
                     const std::vector<LocalArray> &locals) {
  mir::Function out;
  out.name = f.name;
  out.params = f.params;
  for (const LocalArray &l : locals) {
    mir::Stmt s;
    s.kind = mir::StmtKind::Local;
    s.name = l.name;
    s.local_type = l.type;
    out.body.push_back(std::move(s));
  }
  return out;
}

} // namespace

mir::Expr check_expr(const RuntimeCheck &c) {
  using E = mir::Expr;
  if (c.kind == RuntimeCheck::Kind::Bound)
    return E::binary(Op::Ge, to_ast(c.expr), E::int_lit(c.literal));
  auto end = [](const std::string &a) {
    return E::binary(Op::Add, E::call("base", {E::array_ref(a)}),
                     E::call("extent", {E::array_ref(a)}));
  };
  auto base = [](const std::string &a) { return E::call("base", {E::array_ref(a)}); };
  return E::binary(Op::Or, E::binary(Op::Le, end(c.a), base(c.b)),
                   E::binary(Op::Le, end(c.b), base(c.a)));
}

mir::Function lower_root(Builder &b, const Green &root,
                         const LowerOptions &opts) {
  const FunctionData &f = root->function();
  mir::Function out = header(f, f.locals);
  int counter = 0;
  Emitter e(b, opts, counter, true);
  auto body = e.scope(root->body());
  out.body.insert(out.body.end(), body.begin(), body.end());
  mir::number_statements(out);
  return out;
}

mir::Function lower(Builder &b, const Candidate &c, const Green &baseline,
                    const LowerOptions &opts) {
  if (c.checks.empty())
    return lower_root(b, c.root, opts);
  const FunctionData &f = c.root->function();
  std::vector<LocalArray> locals = f.locals;
  for (const LocalArray &l : baseline->function().locals)
    if (std::none_of(locals.begin(), locals.end(),
                     [&](const LocalArray &x) { return x.name == l.name; }))
      locals.push_back(l);
  mir::Function out = header(f, locals);
  int counter = 0;
  mir::Expr cond = check_expr(c.checks[0]);
  for (std::size_t i = 1; i < c.checks.size(); ++i)
    cond = mir::Expr::binary(Op::And, std::move(cond), check_expr(c.checks[i]));
  mir::Stmt split;
  split.kind = mir::StmtKind::If;
  split.cond = std::move(cond);
  split.body = Emitter(b, opts, counter, true).scope(c.root->body());
  split.has_else = true;
  split.else_body = Emitter(b, opts, counter, false).scope(baseline->body());
  out.body.push_back(std::move(split));
  mir::number_statements(out);
  return out;
}

} // namespace loopdag::pipeline
