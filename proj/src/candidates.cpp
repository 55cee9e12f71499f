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
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "loopdag/pipeline.hpp"

namespace loopdag::pipeline {

// Checks ------------------------------------------------------------------------

std::vector<RuntimeCheck>
synthesize_checks(const FunctionData &f,
                  const std::vector<RuntimeCheck> &assumptions) {
  std::vector<RuntimeCheck> out;
  for (const RuntimeCheck &c : assumptions) {
    if (c.kind == RuntimeCheck::Kind::NoAlias && !may_alias(f, c.a, c.b))
      continue;
    if (std::find(out.begin(), out.end(), c) == out.end())
      out.push_back(c);
  }
  return out;
}

// Cost --------------------------------------------------------------------------

namespace {

std::optional<std::int64_t> eval_const(const Green &e, const TripHints &h) {
  const ExprData &d = e->expr();
  if (d.op == Op::IntLit)
    return d.ival;
  if (d.op == Op::Var) {
    auto it = h.find(d.name);
    return it == h.end() ? std::nullopt : std::optional(it->second);
  }
  std::vector<std::int64_t> v;
  for (const Green &c : e->children()) {
    auto x = eval_const(c, h);
    if (!x)
      return std::nullopt;
    v.push_back(*x);
  }
  switch (d.op) {
  case Op::Neg:
    return -v[0];
  case Op::Add:
    return v[0] + v[1];
  case Op::Sub:
    return v[0] - v[1];
  case Op::Mul:
    return v[0] * v[1];
  case Op::Div:
    return v[1] == 0 ? std::nullopt : std::optional(v[0] / v[1]);
  case Op::Mod:
    return v[1] == 0 ? std::nullopt : std::optional(v[0] % v[1]);
  case Op::Call:
    if (d.name == "min" && v.size() == 2)
      return std::min(v[0], v[1]);
    if (d.name == "max" && v.size() == 2)
      return std::max(v[0], v[1]);
    return std::nullopt;
  default:
    return std::nullopt;
  }
}

struct CostWalker {
  const TripHints &hints;
  const CostConfig &cfg;
  std::set<std::string> invariant;
  double work = 0, parallel_work = 0;
  std::size_t accesses = 0, strided = 0;

  struct Level {
    std::string iv;
    std::int64_t step;
  };
  std::vector<Level> levels;

  double trips(const GreenNode &l) const {
    const LoopData &d = l.loop();
    if (d.is_while || !d.canonical)
      return cfg.default_trip;
    auto lo = eval_const(l.lower(), hints);
    auto hi = eval_const(xform::unguarded_upper(l), hints);
    if (!lo || !hi)
      return cfg.default_trip;
    std::int64_t span = *hi - *lo;
    return span <= 0 ? 0.0 : static_cast<double>((span + d.step - 1) / d.step);
  }

  void access(std::span<const Green> subs) {
    if (levels.empty())
      return;
    ++accesses;
    std::set<std::string> ivs;
    for (const Level &l : levels)
      ivs.insert(l.iv);
    const Level &inner = levels.back();
    bool unit = !subs.empty();
    for (std::size_t i = 0; i < subs.size() && unit; ++i) {
      auto a = affine_of(subs[i], ivs, invariant);
      if (!a) {
        unit = false;
        break;
      }
      auto it = a->ivs.find(inner.iv);
      std::int64_t c = it == a->ivs.end() ? 0 : it->second;
      if (i + 1 < subs.size())
        unit = c == 0;
      else
        unit = std::llabs(c * inner.step) == 1;
    }
    if (!unit)
      ++strided;
  }

  void loads(const Green &e) {
    if (e->expr().op == Op::Load)
      access(e->children());
    for (const Green &c : e->children())
      loads(c);
  }

  void item(const Green &n, double mult, bool parallel) {
    if (n->is_stmt()) {
      const StmtData &d = n->stmt();
      work += mult;
      if (parallel || d.parallel)
        parallel_work += mult;
      if (d.op == StmtOp::Call)
        return;
      for (const Green &c : n->children())
        loads(c);
      if (d.op == StmtOp::Store || d.op == StmtOp::Update)
        access(n->subscripts());
      return;
    }
    double m = mult;
    bool pushed = false;
    if (n->is_loop()) {
      m *= trips(*n);
      parallel = parallel || n->loop().parallel;
      if (!n->loop().is_while) {
        levels.push_back({n->loop().iv, n->loop().step});
        pushed = true;
      }
    }
    for (const Green &c : n->body())
      item(c, m, parallel);
    if (pushed)
      levels.pop_back();
  }
};

} // namespace

CostEstimate estimate_cost(const Candidate &c, std::size_t baseline_nodes,
                           const TripHints &hints, const CostConfig &cfg) {
  CostWalker w{hints, cfg, {}, 0, 0, 0, 0, {}};
  const FunctionData &f = c.root->function();
  std::set<std::string> assigned = assigned_scalars(c.root);
  for (const mir::Param &p : f.params)
    if (!p.type.is_array() && !assigned.count(p.name))
      w.invariant.insert(p.name);
  w.item(c.root, 1.0, false);
  CostEstimate e;
  e.work = w.work;
  if (w.accesses)
    e.locality_penalty = 1.0 + cfg.stride_penalty *
                                   static_cast<double>(w.strided) /
                                   static_cast<double>(w.accesses);
  if (w.work > 0)
    e.parallel_discount =
        (w.work - w.parallel_work + w.parallel_work * cfg.parallel_discount) /
        w.work;
  e.check_overhead = cfg.check_overhead * static_cast<double>(c.checks.size());
  std::size_t nodes = node_count(c.root);
  e.size_penalty =
      nodes > baseline_nodes
          ? cfg.size_penalty * static_cast<double>(nodes - baseline_nodes)
          : 0.0;
  e.total = e.work * e.locality_penalty * e.parallel_discount +
            e.check_overhead + e.size_penalty;
  return e;
}

const Candidate &select(const std::vector<Candidate> &cs) {
  if (cs.empty())
    throw std::invalid_argument("select: no candidates");
  const Candidate *best = &cs[0];
  auto key = [](const Candidate &c) {
    return std::make_tuple(c.cost.total, c.checks.size(), c.applied.size(),
                           c.id);
  };
  for (const Candidate &c : cs)
    if (key(c) < key(*best))
      best = &c;
  return *best;
}

// Exploration -------------------------------------------------------------------

namespace {

struct Explorer {
  Builder &b;
  const ExploreOptions &opts;
  std::size_t baseline_nodes;
  std::vector<Candidate> &out;

  std::optional<Candidate> extend(const Candidate &from,
                                  const std::vector<xform::Request> &reqs) {
    xform::Options xo;
    xo.reassoc = opts.reassoc;
    xform::Outcome o = xform::apply(b, from.root, reqs, xo);
    return make(from, o);
  }

  std::optional<Candidate> make(const Candidate &from,
                                const xform::Outcome &o) {
    if (o.applied.empty() || o.root == from.root)
      return std::nullopt;
    Candidate c;
    c.root = o.root;
    c.applied = from.applied;
    c.applied.insert(c.applied.end(), o.applied.begin(), o.applied.end());
    std::vector<RuntimeCheck> all = from.checks;
    all.insert(all.end(), o.checks.begin(), o.checks.end());
    c.checks = synthesize_checks(o.root->function(), all);
    c.reassociates = from.reassociates || o.reassociates;
    c.cost = estimate_cost(c, baseline_nodes, opts.hints, opts.cost);
    return c;
  }

  static xform::Request req(const std::string &name,
                            std::vector<std::string> labels) {
    xform::Request r;
    r.origin = xform::Origin::Auto;
    r.directive.name = name;
    for (std::string &l : labels) {
      mir::DirectiveArg a;
      a.label = std::move(l);
      r.directive.args.push_back(std::move(a));
    }
    return r;
  }

  std::vector<Candidate> moves(const Candidate &c) {
    std::vector<Candidate> kids;
    DepGraph g = analyze_deps(c.root);
    auto push = [&](std::optional<Candidate> k) {
      if (k)
        kids.push_back(std::move(*k));
    };
    for (const LoopInfo &l : g.loops) {
      if (l.label.empty())
        continue;
      const LoopData &d = l.node->loop();
      if (!d.parallel && !g.carries[static_cast<std::size_t>(l.id)])
        push(extend(c, {req("parallel", {l.label})}));
      if (g.carries[static_cast<std::size_t>(l.id)] && l.node->body().size() > 1) {
        xform::Options xo;
        xo.reassoc = opts.reassoc;
        xform::Outcome o =
            xform::apply(b, c.root, {req("distribute", {l.label})}, xo);
        if (!o.applied.empty()) {
          std::set<std::string> before;
          for (const LoopInfo &x : g.loops)
            before.insert(x.label);
          DepGraph ng = analyze_deps(o.root);
          std::vector<xform::Request> marks;
          for (const LoopInfo &x : ng.loops)
            if (!x.label.empty() && !before.count(x.label) &&
                !ng.carries[static_cast<std::size_t>(x.id)])
              marks.push_back(req("parallel", {x.label}));
          xform::Outcome o2 = xform::apply(b, o.root, marks, xo);
          o2.applied.insert(o2.applied.begin(), o.applied.begin(),
                            o.applied.end());
          o2.checks.insert(o2.checks.end(), o.checks.begin(), o.checks.end());
          o2.reassociates = o2.reassociates || o.reassociates;
          push(make(c, o2));
        }
      }
      if (l.parent >= 0) {
        const LoopInfo &p = g.loops[static_cast<std::size_t>(l.parent)];
        if (!p.label.empty() && p.node->body().size() == 1)
          push(extend(c, {req("interchange", {p.label, l.label})}));
      }
    }
    for (const MatmulMatch &m : detect_idiom_matmul(c.root))
      push(extend(c, {req("gemm", {m.outer})}));
    return kids;
  }

  bool known(const Green &root) const {
    return std::any_of(out.begin(), out.end(), [&](const Candidate &c) {
      return structural_equal(c.root, root);
    });
  }

  void run(std::size_t start) {
    std::size_t current = start;
    while (out.size() < static_cast<std::size_t>(std::max(opts.budget, 1))) {
      std::vector<Candidate> kids = moves(out[current]);
      std::optional<std::size_t> best;
      for (Candidate &k : kids) {
        if (out.size() >= static_cast<std::size_t>(opts.budget))
          break;
        if (k.cost.total >= out[current].cost.total || known(k.root))
          continue;
        k.id = static_cast<int>(out.size());
        out.push_back(std::move(k));
        if (!best || out.back().cost.total < out[*best].cost.total)
          best = out.size() - 1;
      }
      if (!best)
        break;
      current = *best;
    }
  }
};

} // namespace

std::vector<Candidate> auto_explore(Builder &b, const Green &baseline,
                                    const ExploreOptions &opts) {
  std::vector<Candidate> out;
  Candidate base;
  base.root = baseline;
  std::size_t nodes = node_count(baseline);
  base.cost = estimate_cost(base, nodes, opts.hints, opts.cost);
  out.push_back(std::move(base));
  Explorer{b, opts, nodes, out}.run(0);
  return out;
}

// Reports -----------------------------------------------------------------------

std::string report_json(const std::vector<Candidate> &cs, int selected) {
  nlohmann::ordered_json j;
  j["candidates"] = nlohmann::ordered_json::array();
  for (const Candidate &c : cs) {
    nlohmann::ordered_json x;
    x["id"] = c.id;
    x["transforms"] = nlohmann::ordered_json::array();
    for (const mir::Directive &d : c.applied)
      x["transforms"].push_back(mir::to_string(d));
    x["checks"] = nlohmann::ordered_json::array();
    for (const RuntimeCheck &r : c.checks)
      x["checks"].push_back(r.to_string());
    x["cost"] = {{"work", c.cost.work},
                 {"locality_penalty", c.cost.locality_penalty},
                 {"parallel_discount", c.cost.parallel_discount},
                 {"check_overhead", c.cost.check_overhead},
                 {"size_penalty", c.cost.size_penalty},
                 {"total", c.cost.total}};
    j["candidates"].push_back(std::move(x));
  }
  j["selected"] = selected;
  return j.dump(2);
}

std::string report_text(const std::vector<Candidate> &cs, int selected) {
  std::string out;
  for (const Candidate &c : cs) {
    out += c.id == selected ? "* " : "  ";
    out += "#" + std::to_string(c.id) + " total=" +
           std::to_string(c.cost.total) + " work=" + std::to_string(c.cost.work);
    out += " [";
    for (std::size_t i = 0; i < c.applied.size(); ++i)
      out += (i ? ";" : "") + mir::to_string(c.applied[i]);
    out += "]";
    if (!c.checks.empty()) {
      out += " checks:";
      for (const RuntimeCheck &r : c.checks)
        out += " " + r.to_string();
    }
    out += "\n";
  }
  return out;
}

// Driver ------------------------------------------------------------------------

Optimized optimize(const mir::Program &p, const OptimizeOptions &opts) {
  if (p.functions.empty())
    throw std::invalid_argument("optimize: program has no functions");
  std::size_t idx = 0;
  if (!opts.function.empty()) {
    const mir::Function *f = p.find(opts.function);
    if (!f)
      throw std::invalid_argument("optimize: no function '" + opts.function +
                                  "'");
    idx = static_cast<std::size_t>(f - p.functions.data());
  }
  Builder b;
  LiftedFunction lifted = lift(b, p.functions[idx]);
  Green baseline = normalize(b, lifted.root);
  std::size_t nodes = node_count(baseline);

  std::vector<xform::Request> reqs;
  for (const mir::Directive &d : lifted.directives)
    reqs.push_back({d, xform::Origin::Pragma});
  for (const mir::Directive &d : mir::parse_directives(opts.directives))
    reqs.push_back({d, xform::Origin::Cli});

  Optimized out;
  Candidate base;
  base.root = baseline;
  base.cost = estimate_cost(base, nodes, opts.search.hints, opts.search.cost);
  out.candidates.push_back(base);
  std::size_t start = 0;
  if (!reqs.empty()) {
    xform::Outcome o = xform::apply(b, baseline, reqs, opts.xform, opts.strict);
    out.failures = o.failures;
    for (const xform::Result &r : o.results)
      out.notes.insert(out.notes.end(), r.notes.begin(), r.notes.end());
    if (!o.applied.empty()) {
      Candidate c;
      c.id = 1;
      c.root = o.root;
      c.applied = o.applied;
      c.checks = synthesize_checks(o.root->function(), o.checks);
      c.reassociates = o.reassociates;
      c.cost = estimate_cost(c, nodes, opts.search.hints, opts.search.cost);
      out.candidates.push_back(std::move(c));
      start = 1;
    }
  }
  out.selected = static_cast<int>(start);
  if (opts.explore) {
    ExploreOptions eo = opts.search;
    eo.reassoc = opts.xform.reassoc;
    Explorer{b, eo, nodes, out.candidates}.run(start);
    out.selected = select(out.candidates).id;
  }
  out.program = p;
  out.program.functions[idx] =
      lower(b, out.candidates[static_cast<std::size_t>(out.selected)], baseline,
            opts.lowering);
  return out;
}

} // namespace loopdag::pipeline
