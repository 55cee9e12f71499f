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


#include "loopdag/xform.hpp"

#include <algorithm>

#include "xform_internal.hpp"

namespace loopdag::xform {

// RuntimeCheck ------------------------------------------------------------------

bool RuntimeCheck::operator==(const RuntimeCheck &o) const {
  if (kind != o.kind || a != o.a || b != o.b || literal != o.literal)
    return false;
  if (!expr || !o.expr)
    return !expr && !o.expr;
  return structural_equal(expr, o.expr);
}

std::string RuntimeCheck::to_string() const {
  if (kind == Kind::NoAlias)
    return "no_alias(" + a + "," + b + ")";
  return "bound(" + mir::print(to_ast(expr)) +
         " >= " + std::to_string(literal) + ")";
}

TransformError::TransformError(Kind kind, const std::string &msg,
                               std::vector<DependenceEdge> edges)
    : std::runtime_error(msg), kind_(kind), edges_(std::move(edges)) {}

namespace detail {

void not_applicable(const std::string &msg) {
  throw TransformError(TransformError::Kind::NotApplicable, msg);
}

void illegal(const std::string &msg, std::vector<DependenceEdge> edges) {
  throw TransformError(TransformError::Kind::Illegal, msg, std::move(edges));
}

const LoopInfo &require_loop(const DepGraph &g, const std::string &label) {
  const LoopInfo *l = g.loop(label);
  if (!l)
    not_applicable("no loop labeled '" + label + "'");
  return *l;
}

void require_for(const LoopInfo &l, const char *op) {
  const LoopData &d = l.node->loop();
  if (d.is_while || !d.canonical)
    not_applicable(std::string(op) + ": loop '" + l.label +
                   "' is not a canonical for-loop");
}

bool subtree_opaque(const Green &n) {
  if (n->is_stmt())
    return n->stmt().props.opaque || n->stmt().op == StmtOp::Call;
  for (const Green &c : n->body())
    if (subtree_opaque(c))
      return true;
  return false;
}

void require_no_opaque(const Green &n, const char *op) {
  if (subtree_opaque(n))
    not_applicable(std::string(op) + ": region contains opaque statements");
}

bool in_loop(const StmtInfo &s, int loop) {
  return std::find(s.loops.begin(), s.loops.end(), loop) != s.loops.end();
}

bool carried_at(const DependenceEdge &e, int loop) {
  int p = e.position(loop);
  if (p < 0)
    return false;
  for (int q = 0; q < p; ++q)
    if (e.vector[static_cast<std::size_t>(q)] != Dir::Eq)
      return false;
  Dir d = e.vector[static_cast<std::size_t>(p)];
  return d == Dir::Lt || d == Dir::Any;
}

namespace {

bool reads_name(const Green &e, const std::string &name) {
  std::set<std::string> sc, ar;
  collect_reads(e, sc, ar);
  return sc.count(name) > 0 || ar.count(name) > 0;
}

bool same_children(std::span<const Green> a, std::span<const Green> b) {
  if (a.size() != b.size())
    return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!structural_equal(a[i], b[i]))
      return false;
  return true;
}

// `x op e` or `e op x` with op in {+, *} where `is_x` recognizes x.
template <typename F>
bool accumulates(const Green &v, const std::string &name, F &&is_x) {
  const ExprData &d = v->expr();
  if (d.op != Op::Add && d.op != Op::Mul)
    return false;
  const Green &l = v->children()[0], &r = v->children()[1];
  if (is_x(l) && !reads_name(r, name))
    return true;
  return is_x(r) && !reads_name(l, name);
}

} // namespace

bool reorderable_reduction(const DepGraph &g, const DependenceEdge &e,
                           const FunctionData &f, bool reassoc) {
  if (e.src != e.dst)
    return false;
  const GreenNode &s = *g.stmts[static_cast<std::size_t>(e.src)].node.green();
  const StmtData &d = s.stmt();
  if (d.target != e.name || e.kind == DepKind::Control)
    return false;
  bool ok = false;
  std::optional<ScalarType> type;
  switch (d.op) {
  case StmtOp::Update:
    ok = !reads_name(s.value(), d.target);
    break;
  case StmtOp::Store:
    ok = accumulates(s.value(), d.target, [&](const Green &x) {
      return x->expr().op == Op::Load && x->expr().name == d.target &&
             same_children(x->children(), s.subscripts());
    });
    break;
  case StmtOp::Assign:
    ok = accumulates(s.value(), d.target, [&](const Green &x) {
      return x->expr().op == Op::Var && x->expr().name == d.target;
    });
    break;
  case StmtOp::Call:
    return false;
  }
  if (!ok)
    return false;
  if (d.op == StmtOp::Assign) {
    auto it = f.scalars.find(d.target);
    type = it == f.scalars.end() ? ScalarType::F64 : it->second;
  } else if (const mir::Type *t = f.array_type(d.target)) {
    type = t->elem;
  }
  return type == ScalarType::I64 || reassoc;
}

void stmt_arrays(const GreenNode &stmt, std::set<std::string> &reads,
                 std::set<std::string> &writes) {
  std::set<std::string> sc;
  const StmtData &d = stmt.stmt();
  for (const Green &c : stmt.children())
    collect_reads(c, sc, reads);
  if (d.op == StmtOp::Store || d.op == StmtOp::Update)
    writes.insert(d.target);
  if (d.op == StmtOp::Update)
    reads.insert(d.target);
  if (d.op == StmtOp::Call)
    for (const Green &a : stmt.call_args())
      if (a->expr().op == Op::ArrayRef)
        writes.insert(a->expr().name);
}

void item_scalars(const Green &n, std::set<std::string> &reads,
                  std::set<std::string> &writes) {
  std::set<std::string> ar;
  if (n->is_stmt()) {
    for (const Green &c : n->children())
      collect_reads(c, reads, ar);
    if (n->stmt().op == StmtOp::Assign)
      writes.insert(n->stmt().target);
    return;
  }
  if (n->is_loop()) {
    for (const Green &h : n->header())
      collect_reads(h, reads, ar);
    if (!n->loop().iv.empty())
      writes.insert(n->loop().iv);
  }
  for (const Green &c : n->body())
    item_scalars(c, reads, writes);
}

namespace {

void region_arrays(const Green &n, std::set<std::string> &reads,
                   std::set<std::string> &writes) {
  if (n->is_stmt()) {
    stmt_arrays(*n, reads, writes);
    return;
  }
  std::set<std::string> sc;
  if (n->is_loop())
    for (const Green &h : n->header())
      collect_reads(h, sc, reads);
  for (const Green &c : n->body())
    region_arrays(c, reads, writes);
}

} // namespace

std::vector<RuntimeCheck> alias_assumptions(const FunctionData &f,
                                            const Green &region) {
  std::set<std::string> reads, writes;
  region_arrays(region, reads, writes);
  std::set<std::string> all = reads;
  all.insert(writes.begin(), writes.end());
  std::vector<RuntimeCheck> out;
  for (auto i = all.begin(); i != all.end(); ++i)
    for (auto j = std::next(i); j != all.end(); ++j) {
      if (!writes.count(*i) && !writes.count(*j))
        continue;
      if (!may_alias(f, *i, *j))
        continue;
      RuntimeCheck c;
      c.kind = RuntimeCheck::Kind::NoAlias;
      c.a = *i;
      c.b = *j;
      out.push_back(c);
    }
  return out;
}

std::set<std::string> labels_in(const Green &n) {
  std::set<std::string> out;
  walk_items(red_root(n), [&](const RedNode &r) {
    if (r->is_loop() && !r->loop().label.empty())
      out.insert(r->loop().label);
    return true;
  });
  return out;
}

std::string fresh_label(const std::set<std::string> &taken,
                        const std::string &base, const std::string &suffix) {
  std::string l = base + suffix;
  for (int n = 2; taken.count(l); ++n)
    l = base + suffix + "_" + std::to_string(n);
  return l;
}

std::vector<DependenceEdge> interchange_violations(const DepGraph &g,
                                                   int outer, int inner) {
  std::vector<DependenceEdge> out;
  for (const DependenceEdge &e : g.edges) {
    int po = e.position(outer), pi = e.position(inner);
    if (po < 0 || pi < 0)
      continue;
    bool carried_outside = false;
    for (int q = 0; q < po; ++q) {
      Dir d = e.vector[static_cast<std::size_t>(q)];
      if (d == Dir::Eq)
        continue;
      carried_outside = d == Dir::Lt;
      break;
    }
    if (carried_outside)
      continue;
    Dir a = e.vector[static_cast<std::size_t>(po)];
    Dir c = e.vector[static_cast<std::size_t>(pi)];
    if ((a == Dir::Lt || a == Dir::Any) && (c == Dir::Gt || c == Dir::Any))
      out.push_back(e);
  }
  return out;
}

const LoopInfo *perfect_inner(const DepGraph &g, const LoopInfo &outer) {
  auto body = outer.node->body();
  if (body.size() != 1 || !body[0]->is_loop())
    return nullptr;
  for (const LoopInfo &l : g.loops)
    if (l.parent == outer.id)
      return &l;
  return nullptr;
}

Green with_function_data(Builder &b, const Green &root, FunctionData data) {
  return b.with_function(root, std::move(data));
}

} // namespace detail

using namespace detail;

// Loop helpers ------------------------------------------------------------------

std::optional<Green> loop_guard(const GreenNode &loop) {
  if (!loop.is_loop() || loop.loop().is_while)
    return std::nullopt;
  const Green &up = loop.upper();
  const ExprData &d = up->expr();
  if (d.op != Op::Call || d.name != "select" || up->children().size() != 3 ||
      up->children()[2] != loop.lower())
    return std::nullopt;
  return up->children()[0];
}

const Green &unguarded_upper(const GreenNode &loop) {
  if (loop_guard(loop))
    return loop.upper()->children()[1];
  return loop.upper();
}

Green trip_count(Builder &b, const GreenNode &loop) {
  std::int64_t step = loop.loop().step;
  Green span = b.sub(loop.upper(), loop.lower());
  if (step == 1)
    return span;
  return b.div(b.add(span, b.int_lit(step - 1)), b.int_lit(step));
}

Green materialize_reversal(Builder &b, const Green &loop) {
  if (!loop->is_loop() || !loop->loop().reversed)
    return loop;
  const LoopData &d = loop->loop();
  Green n = trip_count(b, *loop);
  Green t = b.var(d.iv);
  Green value = b.add(loop->lower(),
                      b.mul(b.sub(b.sub(n, b.int_lit(1)), t),
                            b.int_lit(d.step)));
  std::map<std::string, Green> map{{d.iv, value}};
  std::vector<Green> kids{b.int_lit(0), n, b.int_lit(1)};
  for (const Green &c : loop->body())
    kids.push_back(substitute(b, c, map));
  LoopData nd = d;
  nd.reversed = false;
  nd.step = 1;
  return b.loop(std::move(nd), std::move(kids));
}

Green relabel(Builder &b, const Green &n, const std::string &suffix) {
  if (!n->is_loop() && n->kind() != NodeKind::FunctionRoot)
    return n;
  std::vector<Green> kids(n->children().begin(), n->children().end());
  bool changed = false;
  for (std::size_t i = n->header_size(); i < kids.size(); ++i) {
    Green c = relabel(b, kids[i], suffix);
    changed = changed || c != kids[i];
    kids[i] = std::move(c);
  }
  if (n->is_loop() && !n->loop().label.empty()) {
    LoopData d = n->loop();
    d.label += suffix;
    return b.loop(std::move(d), std::move(kids));
  }
  return changed ? b.with_children(n, std::move(kids)) : n;
}

// Transforms --------------------------------------------------------------------

Result reverse(Builder &b, const Green &root, const DepGraph &g,
               const std::string &loop, const Options &opts) {
  const LoopInfo &l = require_loop(g, loop);
  require_for(l, "reverse");
  require_no_opaque(l.node.green(), "reverse");
  const FunctionData &f = root->function();
  std::vector<DependenceEdge> bad;
  bool reassoc_used = false;
  for (const DependenceEdge &e : g.edges) {
    if (!carried_at(e, l.id))
      continue;
    if (reorderable_reduction(g, e, f, false))
      continue;
    if (reorderable_reduction(g, e, f, opts.reassoc)) {
      reassoc_used = true;
      continue;
    }
    bad.push_back(e);
  }
  if (!bad.empty() && !opts.force)
    illegal("reverse(" + loop + "): loop carries a dependence", bad);
  LoopData d = l.node->loop();
  d.reversed = !d.reversed;
  Result r;
  r.root = rewrite(b, root, l.node, b.with_loop(l.node.green(), d));
  r.assumptions = alias_assumptions(f, l.node.green());
  r.reassociates = reassoc_used;
  return r;
}

Result interchange(Builder &b, const Green &root, const DepGraph &g,
                   const std::string &outer, const std::string &inner,
                   const Options &opts) {
  const LoopInfo &lo = require_loop(g, outer);
  const LoopInfo &li = require_loop(g, inner);
  require_for(lo, "interchange");
  require_for(li, "interchange");
  const LoopInfo *p = perfect_inner(g, lo);
  if (!p || p->id != li.id)
    not_applicable("interchange: '" + inner +
                   "' is not perfectly nested in '" + outer + "'");
  require_no_opaque(lo.node.green(), "interchange");
  const GreenNode &og = *lo.node.green(), &ig = *li.node.green();
  std::set<std::string> hs, ha;
  for (const Green &h : ig.header())
    collect_reads(h, hs, ha);
  if (hs.count(og.loop().iv))
    not_applicable("interchange: bounds of '" + inner + "' depend on '" +
                   og.loop().iv + "'");
  auto bad = interchange_violations(g, lo.id, li.id);
  if (!bad.empty() && !opts.force)
    illegal("interchange(" + outer + "," + inner +
                "): dependence with direction (<,>)",
            bad);
  std::vector<Green> in_kids(og.header().begin(), og.header().end());
  in_kids.insert(in_kids.end(), ig.body().begin(), ig.body().end());
  Green new_inner = b.loop(og.loop(), std::move(in_kids));
  std::vector<Green> out_kids(ig.header().begin(), ig.header().end());
  out_kids.push_back(new_inner);
  Green new_outer = b.loop(ig.loop(), std::move(out_kids));
  Result r;
  r.root = rewrite(b, root, lo.node, new_outer);
  r.assumptions = alias_assumptions(root->function(), lo.node.green());
  return r;
}

Result parallel_mark(Builder &b, const Green &root, const DepGraph &g,
                     const std::string &loop, Origin origin,
                     const Options &opts) {
  const LoopInfo &l = require_loop(g, loop);
  require_for(l, "parallel");
  Result r;
  if (origin != Origin::Pragma) {
    require_no_opaque(l.node.green(), "parallel");
    std::vector<DependenceEdge> bad;
    for (const DependenceEdge &e : g.edges)
      if (carried_at(e, l.id))
        bad.push_back(e);
    if (!bad.empty() && !opts.force)
      illegal("parallel(" + loop + "): loop carries a dependence", bad);
    r.assumptions = alias_assumptions(root->function(), l.node.green());
  }
  if (l.node->loop().parallel) {
    r.root = root;
    return r;
  }
  LoopData d = l.node->loop();
  d.parallel = true;
  r.root = rewrite(b, root, l.node, b.with_loop(l.node.green(), d));
  return r;
}

Result delete_empty(Builder &b, const Green &root, const DepGraph &g,
                    const std::string &loop, const Options &) {
  const LoopInfo &l = require_loop(g, loop);
  if (stmt_count(l.node.green()) != 0)
    not_applicable("delete_empty: loop '" + loop + "' has statements");
  Result r;
  r.root = splice(b, root, l.node, {});
  return r;
}

Result replace_gemm(Builder &b, const Green &root, const DepGraph &g,
                    const std::string &loop, const Options &) {
  const LoopInfo &l = require_loop(g, loop);
  std::optional<MatmulMatch> m;
  for (MatmulMatch &x : detect_idiom_matmul(root))
    if (x.outer == loop)
      m = std::move(x);
  if (!m)
    not_applicable("gemm: no matrix-multiply nest at '" + loop + "'");
  StmtData d;
  d.op = StmtOp::Call;
  d.target = "gemm";
  d.props.idempotent = false;
  d.props.speculatable = false;
  d.props.opaque = true;
  d.parallel = true;
  d.origin = l.node->loop().origin;
  Green call = b.stmt(d, {b.true_pred(), b.array_ref(m->c), b.array_ref(m->a),
                          b.array_ref(m->b), m->ni, m->nj, m->nk});
  Result r;
  r.root = splice(b, root, l.node, std::span<const Green>(&call, 1));
  r.assumptions = alias_assumptions(root->function(), l.node.green());
  r.notes.push_back("replaced nest '" + loop + "' by gemm(" + m->c + "," +
                    m->a + "," + m->b + ")");
  return r;
}

// Driver ------------------------------------------------------------------------

Result apply_one(Builder &b, const Green &root, const DepGraph &g,
                 const Request &req, const Options &opts) {
  const mir::Directive &d = req.directive;
  if (std::string err = mir::check_directive(d); !err.empty())
    not_applicable(err);
  std::vector<std::string> ls = d.labels();
  std::vector<std::int64_t> ks = d.ints();
  const std::string &n = d.name;
  if (n == "reverse")
    return reverse(b, root, g, ls[0], opts);
  if (n == "interchange")
    return interchange(b, root, g, ls[0], ls[1], opts);
  if (n == "fuse")
    return fuse(b, root, g, ls[0], ls[1], opts);
  if (n == "distribute")
    return distribute(b, root, g, ls[0], opts);
  if (n == "unroll")
    return unroll(b, root, g, ls[0], ks[0], opts);
  if (n == "unroll_full")
    return unroll_full(b, root, g, ls[0], opts);
  if (n == "unroll_jam")
    return unroll_jam(b, root, g, ls[0], ks[0], opts);
  if (n == "unswitch")
    return unswitch(b, root, g, ls[0], opts);
  if (n == "parallel")
    return parallel_mark(b, root, g, ls[0], req.origin, opts);
  if (n == "delete_empty")
    return delete_empty(b, root, g, ls[0], opts);
  if (n == "gemm")
    return replace_gemm(b, root, g, ls[0], opts);
  not_applicable("unknown directive '" + n + "'");
}

Outcome apply(Builder &b, const Green &root,
              const std::vector<Request> &requests, const Options &opts,
              bool strict) {
  Outcome out;
  out.root = root;
  for (const Request &req : requests) {
    DepGraph g = analyze_deps(out.root);
    try {
      Result r = apply_one(b, out.root, g, req, opts);
      out.root = r.root;
      out.applied.push_back(req.directive);
      out.reassociates = out.reassociates || r.reassociates;
      for (const RuntimeCheck &c : r.assumptions)
        if (std::find(out.checks.begin(), out.checks.end(), c) ==
            out.checks.end())
          out.checks.push_back(c);
      out.results.push_back(std::move(r));
    } catch (const TransformError &e) {
      if (strict)
        throw;
      out.failures.push_back(
          {req.directive, e.kind(), e.what(), e.edges()});
    }
  }
  return out;
}

} // namespace loopdag::xform
