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


// Transforms that restructure loop bodies: fusion, distribution, unrolling,
// unroll-and-jam and unswitching.

#include <algorithm>
#include <functional>
#include <map>
#include <queue>

#include "loopdag/xform.hpp"
#include "xform_internal.hpp"

namespace loopdag::xform {

using namespace detail;

namespace {

std::vector<std::size_t> parent_path(const RedNode &r) {
  std::vector<std::size_t> p = r.path();
  if (!p.empty())
    p.pop_back();
  return p;
}

bool all_eq_before(const DependenceEdge &e, int loop) {
  int p = e.position(loop);
  if (p < 0)
    return false;
  for (int q = 0; q < p; ++q)
    if (e.vector[static_cast<std::size_t>(q)] != Dir::Eq)
      return false;
  return true;
}

std::vector<Green> shifted_body(Builder &b, std::span<const Green> body,
                                const std::string &iv, std::int64_t offset,
                                const std::string &suffix) {
  std::vector<Green> out;
  std::map<std::string, Green> map;
  if (offset != 0)
    map[iv] = b.add(b.var(iv), b.int_lit(offset));
  for (const Green &c : body) {
    Green n = map.empty() ? c : substitute(b, c, map);
    out.push_back(suffix.empty() ? n : relabel(b, n, suffix));
  }
  return out;
}

// Upper bound of the main loop of a k-way unrolled canonical loop.
Green main_upper(Builder &b, const GreenNode &loop, std::int64_t k) {
  std::int64_t s = loop.loop().step;
  if (auto n = literal_trip_count(loop))
    return b.add(loop.lower(), b.int_lit((*n / k) * k * s));
  Green np = b.call("max", {trip_count(b, loop), b.int_lit(0)});
  return b.add(loop.lower(),
               b.mul(b.div(np, b.int_lit(k)), b.int_lit(k * s)));
}

bool needs_epilogue(const GreenNode &loop, std::int64_t k) {
  auto n = literal_trip_count(loop);
  return !n || *n % k != 0;
}

Green epilogue(Builder &b, const Green &root, const GreenNode &loop,
               const Green &lower) {
  LoopData d = loop.loop();
  d.label = fresh_label(labels_in(root), d.label, "_epi");
  std::vector<Green> kids{lower, loop.upper(), loop.step_expr()};
  for (const Green &c : loop.body())
    kids.push_back(relabel(b, c, "_epi"));
  return b.loop(std::move(d), std::move(kids));
}

} // namespace

// fuse --------------------------------------------------------------------------

Result fuse(Builder &b, const Green &root, const DepGraph &g,
            const std::string &first, const std::string &second,
            const Options &opts) {
  if (first == second)
    not_applicable("fuse: arguments must be distinct loops");
  const LoopInfo &l1 = require_loop(g, first);
  const LoopInfo &l2 = require_loop(g, second);
  require_for(l1, "fuse");
  require_for(l2, "fuse");
  if (parent_path(l1.node) != parent_path(l2.node) ||
      l2.node.index() != l1.node.index() + 1)
    not_applicable("fuse: '" + first + "' and '" + second +
                   "' are not adjacent siblings");
  const GreenNode &a = *l1.node.green(), &c = *l2.node.green();
  if (!structural_equal(a.lower(), c.lower()) ||
      !structural_equal(a.upper(), c.upper()) ||
      a.loop().step != c.loop().step ||
      a.loop().reversed != c.loop().reversed)
    not_applicable("fuse: loop bounds differ");
  require_no_opaque(l1.node.green(), "fuse");
  require_no_opaque(l2.node.green(), "fuse");

  const std::string &iv1 = a.loop().iv, &iv2 = c.loop().iv;
  std::set<std::string> r1, w1, r2, w2;
  item_scalars(l1.node.green(), r1, w1);
  item_scalars(l2.node.green(), r2, w2);
  w1.erase(iv1);
  w2.erase(iv2);
  std::set<std::string> shared;
  for (const std::string &s : w1)
    if (r2.count(s) || w2.count(s))
      shared.insert(s);
  for (const std::string &s : w2)
    if (r1.count(s) || w1.count(s))
      shared.insert(s);
  if (!shared.empty() && !opts.force) {
    std::vector<DependenceEdge> es;
    for (const DependenceEdge &e : g.edges)
      if (shared.count(e.name))
        es.push_back(e);
    illegal("fuse: scalar '" + *shared.begin() + "' flows between the loops",
            es);
  }

  std::vector<Green> kids(a.children().begin(), a.children().end());
  std::map<std::string, Green> map;
  if (iv1 != iv2)
    map[iv2] = b.var(iv1);
  for (const Green &s : c.body())
    kids.push_back(map.empty() ? s : substitute(b, s, map));
  LoopData d = a.loop();
  d.parallel = a.loop().parallel && c.loop().parallel;
  Green fused = b.loop(d, std::move(kids));
  RedNode parent = *l1.node.parent();
  std::vector<Green> siblings;
  for (std::size_t i = 0; i < parent->children().size(); ++i)
    if (i == l1.node.index())
      siblings.push_back(fused);
    else if (i != l2.node.index())
      siblings.push_back(parent->children()[i]);
  Green new_root =
      rewrite(b, root, parent, b.with_children(parent.green(), std::move(siblings)));

  if (!opts.force) {
    DepGraph ng = analyze_deps(new_root);
    const LoopInfo *fl = ng.loop(first);
    std::size_t n1 = stmt_count(l1.node.green());
    int base = -1;
    for (const StmtInfo &s : ng.stmts)
      if (in_loop(s, fl->id)) {
        base = s.id;
        break;
      }
    auto part = [&](int id) { return id - base < static_cast<int>(n1) ? 1 : 2; };
    std::vector<DependenceEdge> bad;
    for (const DependenceEdge &e : ng.edges) {
      if (!in_loop(ng.stmts[static_cast<std::size_t>(e.src)], fl->id) ||
          !in_loop(ng.stmts[static_cast<std::size_t>(e.dst)], fl->id))
        continue;
      if (part(e.src) == 2 && part(e.dst) == 1 && carried_at(e, fl->id))
        bad.push_back(e);
    }
    if (!bad.empty())
      illegal("fuse(" + first + "," + second +
                  "): fusion-preventing dependence",
              bad);
  }
  Result r;
  r.root = new_root;
  r.assumptions = alias_assumptions(root->function(), fused);
  return r;
}

// distribute --------------------------------------------------------------------

namespace {

struct Expansion {
  std::string scalar;
  std::string array;
  std::size_t def_unit = 0;
  mir::Expr extent;
};

// Strongly connected components of a small graph, each sorted.
std::vector<std::vector<std::size_t>>
components(std::size_t n, const std::vector<std::set<std::size_t>> &adj) {
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  int counter = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on[v] = true;
    for (std::size_t w : adj[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> comp;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on[w] = false;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] < 0)
      visit(v);
  return out;
}

} // namespace

Result distribute(Builder &b, const Green &root, const DepGraph &g,
                  const std::string &loop, const Options &) {
  const LoopInfo &l = require_loop(g, loop);
  require_for(l, "distribute");
  require_no_opaque(l.node.green(), "distribute");
  const GreenNode &ln = *l.node.green();
  auto body = ln.body();
  if (body.size() < 2)
    not_applicable("distribute: nothing to split in '" + loop + "'");
  const FunctionData &f = root->function();
  const std::size_t units = body.size();
  const std::size_t depth = l.node.path().size();

  std::map<int, std::size_t> unit_of;
  for (const StmtInfo &s : g.stmts)
    if (in_loop(s, l.id))
      unit_of[s.id] = s.node.path()[depth] - ln.header_size();

  std::vector<std::set<std::size_t>> adj(units);
  for (const DependenceEdge &e : g.edges) {
    auto s = unit_of.find(e.src), d = unit_of.find(e.dst);
    if (s == unit_of.end() || d == unit_of.end() || s->second == d->second)
      continue;
    if (all_eq_before(e, l.id))
      adj[s->second].insert(d->second);
  }

  // Scalars shared between units: expand when privatizable, else merge.
  std::vector<std::set<std::string>> reads(units), writes(units);
  for (std::size_t u = 0; u < units; ++u)
    item_scalars(body[u], reads[u], writes[u]);
  std::set<std::string> scalars;
  for (const auto &w : writes)
    scalars.insert(w.begin(), w.end());
  scalars.erase(ln.loop().iv);

  std::optional<mir::Expr> extent;
  if (auto n = literal_trip_count(ln))
    extent = mir::Expr::int_lit(std::max<std::int64_t>(*n, 1));
  else if (ln.lower()->expr().op == Op::IntLit && ln.lower()->expr().ival >= 0 &&
           ln.upper()->expr().op == Op::Var) {
    const mir::Param *p = f.param(ln.upper()->expr().name);
    if (p && !p->type.is_array() && p->type.elem == ScalarType::I64)
      extent = mir::Expr::var(p->name);
  }

  std::set<std::string> taken;
  for (const mir::Param &p : f.params)
    taken.insert(p.name);
  for (const LocalArray &a : f.locals)
    taken.insert(a.name);
  for (const auto &[name, type] : f.scalars)
    taken.insert(name);

  std::vector<Expansion> expansions;
  for (const std::string &t : scalars) {
    std::vector<std::size_t> accessed, defs;
    for (std::size_t u = 0; u < units; ++u) {
      if (reads[u].count(t) || writes[u].count(t))
        accessed.push_back(u);
      if (writes[u].count(t))
        defs.push_back(u);
    }
    if (accessed.size() < 2)
      continue;
    bool priv = extent && defs.size() == 1 && body[defs[0]]->is_stmt() &&
                is_true_lit(body[defs[0]]->predicate()) &&
                !reads[defs[0]].count(t) && accessed.front() == defs[0];
    for (const DependenceEdge &e : g.edges) {
      if (!priv)
        break;
      if (e.name != t || e.is_memory())
        continue;
      bool inside = unit_of.count(e.src) && unit_of.count(e.dst);
      if (!inside || carried_at(e, l.id))
        priv = false;
    }
    if (priv) {
      Expansion x;
      x.scalar = t;
      x.array = t + "_exp";
      for (int n = 2; taken.count(x.array); ++n)
        x.array = t + "_exp" + std::to_string(n);
      taken.insert(x.array);
      x.def_unit = defs[0];
      x.extent = *extent;
      expansions.push_back(std::move(x));
    } else {
      for (std::size_t u : accessed)
        for (std::size_t v : accessed)
          if (u != v)
            adj[u].insert(v);
    }
  }

  auto comps = components(units, adj);
  if (comps.size() < 2)
    not_applicable("distribute: '" + loop +
                   "' is a single strongly connected component");

  // Topological order of the condensation, earliest unit first.
  std::vector<std::size_t> comp_of(units);
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (std::size_t u : comps[c])
      comp_of[u] = c;
  std::vector<std::set<std::size_t>> cadj(comps.size());
  std::vector<int> indeg(comps.size(), 0);
  for (std::size_t u = 0; u < units; ++u)
    for (std::size_t v : adj[u])
      if (comp_of[u] != comp_of[v] && cadj[comp_of[u]].insert(comp_of[v]).second)
        ++indeg[comp_of[v]];
  using Key = std::pair<std::size_t, std::size_t>; // (first unit, comp)
  std::priority_queue<Key, std::vector<Key>, std::greater<Key>> ready;
  for (std::size_t c = 0; c < comps.size(); ++c)
    if (indeg[c] == 0)
      ready.push({comps[c].front(), c});
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    std::size_t c = ready.top().second;
    ready.pop();
    order.push_back(c);
    for (std::size_t d : cadj[c])
      if (--indeg[d] == 0)
        ready.push({comps[d].front(), d});
  }

  // Rewrite units for scalar expansion.
  const std::string &iv = ln.loop().iv;
  Green idx = b.var(iv);
  if (!is_false_lit(ln.lower()))
    idx = b.sub(idx, ln.lower());
  if (ln.loop().step != 1)
    idx = b.div(idx, b.int_lit(ln.loop().step));
  std::vector<Green> items(body.begin(), body.end());
  Result r;
  FunctionData data = f;
  for (const Expansion &x : expansions) {
    Green load = b.load(x.array, {idx});
    std::map<std::string, Green> map{{x.scalar, load}};
    for (std::size_t u = 0; u < units; ++u) {
      if (u == x.def_unit) {
        const GreenNode &s = *items[u];
        StmtData d = s.stmt();
        d.op = StmtOp::Store;
        d.target = x.array;
        items[u] = b.stmt(d, {s.predicate(), idx, s.value()});
      } else {
        items[u] = substitute(b, items[u], map);
      }
    }
    mir::Type type;
    auto it = f.scalars.find(x.scalar);
    type.elem = it == f.scalars.end() ? ScalarType::F64 : it->second;
    type.extents.push_back(x.extent);
    data.locals.push_back({x.array, type});
    r.notes.push_back("expanded scalar '" + x.scalar + "' to '" + x.array +
                      "[" + mir::print(x.extent) + "]'");
  }

  std::set<std::string> labels = labels_in(root);
  std::vector<Green> pieces;
  for (std::size_t k = 0; k < order.size(); ++k) {
    LoopData d = ln.loop();
    std::string want = ln.loop().label + std::to_string(k + 1);
    d.label = labels.count(want)
                  ? fresh_label(labels, ln.loop().label, "_" + std::to_string(k + 1))
                  : want;
    labels.insert(d.label);
    std::vector<Green> kids(ln.header().begin(), ln.header().end());
    for (std::size_t u : comps[order[k]])
      kids.push_back(items[u]);
    pieces.push_back(b.loop(std::move(d), std::move(kids)));
  }
  Green nr = splice(b, root, l.node, pieces);
  if (!expansions.empty())
    nr = with_function_data(b, nr, std::move(data));
  r.root = nr;
  r.assumptions = alias_assumptions(f, l.node.green());
  return r;
}

// unroll ------------------------------------------------------------------------

Result unroll(Builder &b, const Green &root, const DepGraph &g,
              const std::string &loop, std::int64_t factor, const Options &) {
  const LoopInfo &l = require_loop(g, loop);
  require_for(l, "unroll");
  if (factor < 1)
    not_applicable("unroll: factor must be positive");
  Result r;
  if (factor == 1) {
    r.root = root;
    return r;
  }
  require_no_opaque(l.node.green(), "unroll");
  Green ln = materialize_reversal(b, l.node.green());
  const GreenNode &n = *ln;
  const std::string &iv = n.loop().iv;
  std::int64_t s = n.loop().step;
  Green upper = main_upper(b, n, factor);
  std::vector<Green> kids{n.lower(), upper, b.int_lit(factor * s)};
  for (std::int64_t j = 0; j < factor; ++j) {
    auto copy = shifted_body(b, n.body(), iv, j * s,
                             j == 0 ? "" : "_u" + std::to_string(j));
    kids.insert(kids.end(), copy.begin(), copy.end());
  }
  LoopData d = n.loop();
  d.step = factor * s;
  std::vector<Green> out{b.loop(d, std::move(kids))};
  if (needs_epilogue(n, factor))
    out.push_back(epilogue(b, root, n, upper));
  r.root = splice(b, root, l.node, out);
  return r;
}

Result unroll_full(Builder &b, const Green &root, const DepGraph &g,
                   const std::string &loop, const Options &) {
  const LoopInfo &l = require_loop(g, loop);
  require_for(l, "unroll_full");
  require_no_opaque(l.node.green(), "unroll_full");
  Green ln = materialize_reversal(b, l.node.green());
  auto trips = literal_trip_count(*ln);
  if (!trips)
    not_applicable("unroll_full: trip count of '" + loop + "' is not literal");
  if (*trips > 1024)
    not_applicable("unroll_full: trip count of '" + loop + "' is too large");
  const GreenNode &n = *ln;
  std::int64_t lo = n.lower()->expr().ival, s = n.loop().step;
  std::vector<Green> out;
  for (std::int64_t t = 0; t < *trips; ++t) {
    std::map<std::string, Green> map{{n.loop().iv, b.int_lit(lo + t * s)}};
    for (const Green &c : n.body())
      out.push_back(relabel(b, substitute(b, c, map), "_u" + std::to_string(t)));
  }
  Result r;
  r.root = splice(b, root, l.node, out);
  return r;
}

Result unroll_jam(Builder &b, const Green &root, const DepGraph &g,
                  const std::string &outer, std::int64_t factor,
                  const Options &opts) {
  const LoopInfo &lo = require_loop(g, outer);
  require_for(lo, "unroll_jam");
  const LoopInfo *li = perfect_inner(g, lo);
  if (!li)
    not_applicable("unroll_jam: '" + outer + "' is not a perfect nest");
  require_for(*li, "unroll_jam");
  require_no_opaque(lo.node.green(), "unroll_jam");
  std::set<std::string> hs, ha;
  for (const Green &h : li->node->header())
    collect_reads(h, hs, ha);
  if (hs.count(lo.node->loop().iv))
    not_applicable("unroll_jam: inner bounds depend on '" +
                   lo.node->loop().iv + "'");
  if (factor < 1)
    not_applicable("unroll_jam: factor must be positive");
  auto bad = interchange_violations(g, lo.id, li->id);
  if (!bad.empty() && !opts.force)
    illegal("unroll_jam(" + outer + "): dependence with direction (<,>)", bad);
  Result r;
  if (factor == 1) {
    r.root = root;
    return r;
  }
  Green on = materialize_reversal(b, lo.node.green());
  const GreenNode &n = *on;
  const GreenNode &inner = *n.body()[0];
  const std::string &iv = n.loop().iv;
  std::int64_t s = n.loop().step;
  Green upper = main_upper(b, n, factor);
  std::vector<Green> in_kids(inner.header().begin(), inner.header().end());
  for (std::int64_t j = 0; j < factor; ++j) {
    auto copy = shifted_body(b, inner.body(), iv, j * s,
                             j == 0 ? "" : "_u" + std::to_string(j));
    in_kids.insert(in_kids.end(), copy.begin(), copy.end());
  }
  LoopData d = n.loop();
  d.step = factor * s;
  Green jammed = b.loop(inner.loop(), std::move(in_kids));
  std::vector<Green> out{
      b.loop(d, {n.lower(), upper, b.int_lit(factor * s), jammed})};
  if (needs_epilogue(n, factor))
    out.push_back(epilogue(b, root, n, upper));
  r.root = splice(b, root, lo.node, out);
  r.assumptions = alias_assumptions(root->function(), lo.node.green());
  return r;
}

// unswitch ----------------------------------------------------------------------

namespace {

void conjuncts(const Green &p, std::vector<Green> &out) {
  if (p->expr().op == Op::And) {
    conjuncts(p->children()[0], out);
    conjuncts(p->children()[1], out);
    return;
  }
  out.push_back(p->expr().op == Op::Not ? p->children()[0] : p);
}

bool speculatable(const Green &e) {
  const ExprData &d = e->expr();
  if ((d.op == Op::Div || d.op == Op::Mod) &&
      e->children()[1]->expr().op != Op::IntLit &&
      e->children()[1]->expr().op != Op::FloatLit)
    return false;
  if (d.op == Op::Load)
    return false;
  for (const Green &c : e->children())
    if (!speculatable(c))
      return false;
  return true;
}

Green simplify(Builder &b, const Green &p, const Green &c, const Green &notc,
               bool value) {
  if (p == c)
    return b.int_lit(value ? 1 : 0);
  if (p == notc)
    return b.int_lit(value ? 0 : 1);
  if (p->expr().op == Op::And) {
    Green l = simplify(b, p->children()[0], c, notc, value);
    Green r = simplify(b, p->children()[1], c, notc, value);
    if (is_false_lit(l) || is_false_lit(r))
      return b.int_lit(0);
    if (l == p->children()[0] && r == p->children()[1])
      return p;
    return b.logical_and(l, r);
  }
  return p;
}

Green specialize(Builder &b, const Green &n, const Green &c, const Green &notc,
                 bool value) {
  std::vector<Green> kids(n->children().begin(), n->children().end());
  if (n->is_stmt()) {
    kids[0] = simplify(b, kids[0], c, notc, value);
    if (is_false_lit(kids[0]))
      return nullptr;
    return kids[0] == n->children()[0] ? n : b.with_children(n, std::move(kids));
  }
  std::vector<Green> out(kids.begin(), kids.begin() + n->header_size());
  for (std::size_t i = n->header_size(); i < kids.size(); ++i)
    if (Green s = specialize(b, kids[i], c, notc, value))
      out.push_back(s);
  return b.with_children(n, std::move(out));
}

Green guarded(Builder &b, const Green &loop, const Green &guard) {
  std::vector<Green> kids(loop->children().begin(), loop->children().end());
  if (loop->loop().is_while)
    kids[0] = b.logical_and(guard, kids[0]);
  else
    kids[1] = b.call("select", {guard, kids[1], kids[0]});
  return b.with_children(loop, std::move(kids));
}

} // namespace

Result unswitch(Builder &b, const Green &root, const DepGraph &g,
                const std::string &loop, const Options &) {
  const LoopInfo &l = require_loop(g, loop);
  require_no_opaque(l.node.green(), "unswitch");
  std::set<std::string> reads, writes;
  item_scalars(l.node.green(), reads, writes);
  std::optional<Green> cond;
  for (const StmtInfo &s : g.stmts) {
    if (cond || !in_loop(s, l.id))
      continue;
    std::vector<Green> cs;
    conjuncts(s.node->predicate(), cs);
    for (const Green &c : cs) {
      if (c->expr().op == Op::IntLit || !speculatable(c))
        continue;
      std::set<std::string> sc, ar;
      collect_reads(c, sc, ar);
      bool invariant = ar.empty();
      for (const std::string &v : sc)
        invariant = invariant && !writes.count(v);
      if (invariant) {
        cond = c;
        break;
      }
    }
  }
  if (!cond)
    not_applicable("unswitch: no loop-invariant predicate in '" + loop + "'");
  Green c = *cond, notc = b.logical_not(c);
  Green then_loop = guarded(b, specialize(b, l.node.green(), c, notc, true), c);
  Green else_loop = guarded(
      b, relabel(b, specialize(b, l.node.green(), c, notc, false), "_else"),
      notc);
  Result r;
  r.root = splice(b, root, l.node, std::vector<Green>{then_loop, else_loop});
  r.notes.push_back("unswitched '" + loop + "' on " + mir::print(to_ast(c)));
  return r;
}

} // namespace loopdag::xform
