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
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "loopdag/analysis.hpp"

namespace loopdag {

// Shared helpers ----------------------------------------------------------------

void collect_reads(const Green &e, std::set<std::string> &scalars,
                   std::set<std::string> &arrays) {
  const ExprData &d = e->expr();
  if (d.op == Op::Var)
    scalars.insert(d.name);
  else if (d.op == Op::Load || d.op == Op::ArrayRef)
    arrays.insert(d.name);
  for (const Green &c : e->children())
    collect_reads(c, scalars, arrays);
}

std::set<std::string> assigned_scalars(const Green &root) {
  std::set<std::string> out;
  walk_items(red_root(root), [&](const RedNode &r) {
    if (r->is_stmt() && r->stmt().op == StmtOp::Assign)
      out.insert(r->stmt().target);
    if (r->is_loop() && !r->loop().iv.empty())
      out.insert(r->loop().iv);
    return true;
  });
  return out;
}

std::optional<std::int64_t> literal_trip_count(const GreenNode &loop) {
  if (!loop.is_loop() || loop.loop().is_while || !loop.loop().canonical)
    return std::nullopt;
  const Green &lo = loop.lower(), &hi = loop.upper();
  if (lo->expr().op != Op::IntLit || hi->expr().op != Op::IntLit)
    return std::nullopt;
  std::int64_t span = hi->expr().ival - lo->expr().ival;
  std::int64_t step = loop.loop().step;
  return span <= 0 ? 0 : (span + step - 1) / step;
}

Green substitute(Builder &b, const Green &n,
                 const std::map<std::string, Green> &map) {
  if (n->is_expr() && n->expr().op == Op::Var) {
    auto it = map.find(n->expr().name);
    return it == map.end() ? n : it->second;
  }
  if (n->children().empty())
    return n;
  std::vector<Green> kids;
  kids.reserve(n->children().size());
  bool changed = false;
  for (const Green &c : n->children()) {
    kids.push_back(substitute(b, c, map));
    changed = changed || kids.back() != c;
  }
  return changed ? b.with_children(n, std::move(kids)) : n;
}

std::size_t stmt_count(const Green &n) {
  if (n->is_stmt())
    return 1;
  std::size_t c = 0;
  for (const Green &g : n->body())
    c += stmt_count(g);
  return c;
}

bool may_alias(const FunctionData &f, const std::string &a,
               const std::string &b) {
  if (a == b)
    return true;
  const mir::Param *p = f.param(a), *q = f.param(b);
  return p && q && p->type.is_array() && q->type.is_array() &&
         !p->restrict_ && !q->restrict_;
}

// Affine forms ------------------------------------------------------------------

namespace {

void scale(Affine &a, std::int64_t k) {
  for (auto &[_, c] : a.ivs)
    c *= k;
  for (auto &[_, c] : a.symbols)
    c *= k;
  a.constant *= k;
}

void accumulate(Affine &into, const Affine &from, std::int64_t sign) {
  for (const auto &[n, c] : from.ivs)
    if ((into.ivs[n] += sign * c) == 0)
      into.ivs.erase(n);
  for (const auto &[n, c] : from.symbols)
    if ((into.symbols[n] += sign * c) == 0)
      into.symbols.erase(n);
  into.constant += sign * from.constant;
}

} // namespace

std::optional<Affine> affine_of(const Green &e,
                                const std::set<std::string> &ivs,
                                const std::set<std::string> &invariant) {
  const ExprData &d = e->expr();
  Affine out;
  switch (d.op) {
  case Op::IntLit:
    out.constant = d.ival;
    return out;
  case Op::Var:
    if (ivs.count(d.name))
      out.ivs[d.name] = 1;
    else if (invariant.count(d.name))
      out.symbols[d.name] = 1;
    else
      return std::nullopt;
    return out;
  case Op::Neg: {
    auto a = affine_of(e->children()[0], ivs, invariant);
    if (a)
      scale(*a, -1);
    return a;
  }
  case Op::Add:
  case Op::Sub: {
    auto a = affine_of(e->children()[0], ivs, invariant);
    auto b = affine_of(e->children()[1], ivs, invariant);
    if (!a || !b)
      return std::nullopt;
    accumulate(*a, *b, d.op == Op::Add ? 1 : -1);
    return a;
  }
  case Op::Mul: {
    auto a = affine_of(e->children()[0], ivs, invariant);
    auto b = affine_of(e->children()[1], ivs, invariant);
    if (!a || !b)
      return std::nullopt;
    if (b->is_constant()) {
      scale(*a, b->constant);
      return a;
    }
    if (a->is_constant()) {
      scale(*b, a->constant);
      return b;
    }
    return std::nullopt;
  }
  case Op::Div:
  case Op::Mod: {
    auto a = affine_of(e->children()[0], ivs, invariant);
    auto b = affine_of(e->children()[1], ivs, invariant);
    if (!a || !b || !a->is_constant() || !b->is_constant() ||
        b->constant == 0)
      return std::nullopt;
    out.constant = d.op == Op::Div ? a->constant / b->constant
                                   : a->constant % b->constant;
    return out;
  }
  default:
    return std::nullopt;
  }
}

// Dependence graph ----------------------------------------------------------------

std::string_view to_string(DepKind k) {
  switch (k) {
  case DepKind::Flow:
    return "flow";
  case DepKind::Anti:
    return "anti";
  case DepKind::Output:
    return "output";
  case DepKind::Register:
    return "register";
  case DepKind::Control:
    return "control";
  }
  return "?";
}

int DependenceEdge::position(int loop) const {
  for (std::size_t i = 0; i < loops.size(); ++i)
    if (loops[i] == loop)
      return static_cast<int>(i);
  return -1;
}

const LoopInfo *DepGraph::loop(const std::string &label) const {
  for (const LoopInfo &l : loops)
    if (l.label == label)
      return &l;
  return nullptr;
}

bool DepGraph::carries_dependence(const std::string &label) const {
  const LoopInfo *l = loop(label);
  return l && carries[static_cast<std::size_t>(l->id)];
}

std::vector<std::string> DepGraph::parallel_loops() const {
  std::vector<std::string> out;
  for (const LoopInfo &l : loops) {
    const LoopData &d = l.node->loop();
    if (!l.label.empty() && !d.is_while && d.canonical && !d.opaque &&
        !carries[static_cast<std::size_t>(l.id)])
      out.push_back(l.label);
  }
  return out;
}

std::vector<const DependenceEdge *> DepGraph::edges_between(int a,
                                                            int b) const {
  std::vector<const DependenceEdge *> out;
  for (const DependenceEdge &e : edges)
    if (e.src == a && e.dst == b)
      out.push_back(&e);
  return out;
}

std::string DepGraph::to_json() const {
  nlohmann::json j;
  nlohmann::json es = nlohmann::json::array();
  for (const DependenceEdge &e : edges) {
    nlohmann::json je;
    je["src"] = e.src;
    je["dst"] = e.dst;
    je["kind"] = std::string(to_string(e.kind));
    je["name"] = e.name;
    nlohmann::json v = nlohmann::json::array(), d = nlohmann::json::array();
    for (Dir x : e.vector)
      v.push_back(std::string(1, static_cast<char>(x)));
    for (const auto &x : e.distance)
      d.push_back(x ? nlohmann::json(*x) : nlohmann::json(nullptr));
    je["vector"] = v;
    je["distance"] = d;
    es.push_back(je);
  }
  j["edges"] = es;
  j["parallel_loops"] = parallel_loops();
  return j.dump(2);
}

std::string DepGraph::to_text() const {
  std::ostringstream os;
  for (const DependenceEdge &e : edges) {
    os << "S" << e.src << " -> S" << e.dst << "  " << to_string(e.kind) << " "
       << e.name << " (";
    for (std::size_t i = 0; i < e.vector.size(); ++i) {
      if (i)
        os << ",";
      os << static_cast<char>(e.vector[i]);
      if (e.distance[i])
        os << *e.distance[i];
    }
    os << ")\n";
  }
  os << "parallel:";
  for (const std::string &l : parallel_loops())
    os << " " << l;
  os << "\n";
  return os.str();
}

namespace {

struct Access {
  int stmt = 0;
  std::string array;
  std::vector<Green> subs;
  bool write = false;
  bool whole = false;  // unknown cells (opaque callee, opaque array)
  bool header = false; // read by an enclosing loop header
};

Dir flip(Dir d) {
  if (d == Dir::Lt)
    return Dir::Gt;
  if (d == Dir::Gt)
    return Dir::Lt;
  return d;
}

std::int64_t floor_div_exact(std::int64_t a, std::int64_t b, bool &ok) {
  ok = b != 0 && a % b == 0;
  return ok ? a / b : 0;
}

class Analyzer {
public:
  explicit Analyzer(const Green &root) : root_(root) {}

  DepGraph run() {
    fn_ = &root_->function();
    std::vector<int> stack;
    collect(red_root(root_), stack);
    assigned_ = assigned_scalars(root_);
    for (const auto &p : fn_->params)
      if (!p.type.is_array() && !assigned_.count(p.name))
        invariant_.insert(p.name);
    g_.carries.assign(g_.loops.size(), false);
    memory_edges();
    scalar_edges();
    std::sort(g_.edges.begin(), g_.edges.end(),
              [](const DependenceEdge &a, const DependenceEdge &b) {
                return std::tie(a.src, a.dst, a.kind, a.name, a.vector,
                                a.distance) < std::tie(b.src, b.dst, b.kind,
                                                       b.name, b.vector,
                                                       b.distance);
              });
    g_.edges.erase(std::unique(g_.edges.begin(), g_.edges.end()),
                   g_.edges.end());
    for (const DependenceEdge &e : g_.edges) {
      for (std::size_t p = 0; p < e.vector.size(); ++p) {
        if (e.vector[p] == Dir::Eq)
          continue;
        if (e.vector[p] == Dir::Lt || e.vector[p] == Dir::Any)
          g_.carries[static_cast<std::size_t>(e.loops[p])] = true;
        break;
      }
    }
    return std::move(g_);
  }

private:
  void collect(const RedNode &r, std::vector<int> &stack) {
    for (std::size_t i = r->header_size(); i < r->children().size(); ++i) {
      RedNode c = r.child(i);
      if (c->is_loop()) {
        LoopInfo li{static_cast<int>(g_.loops.size()), c->loop().label, c,
                    stack.empty() ? -1 : stack.back(), stack.size()};
        g_.loops.push_back(li);
        stack.push_back(li.id);
        collect(c, stack);
        stack.pop_back();
      } else {
        g_.stmts.push_back(StmtInfo{static_cast<int>(g_.stmts.size()), c, stack});
      }
    }
  }

  const GreenNode &loop_node(int id) const {
    return *g_.loops[static_cast<std::size_t>(id)].node.green();
  }

  std::size_t common(const StmtInfo &a, const StmtInfo &b) const {
    std::size_t m = 0;
    while (m < a.loops.size() && m < b.loops.size() &&
           a.loops[m] == b.loops[m])
      ++m;
    return m;
  }

  // Memory -------------------------------------------------------------------

  void loads(const Green &e, int stmt, bool opaque,
             std::vector<Access> &out) const {
    if (e->expr().op == Op::Load) {
      Access a;
      a.stmt = stmt;
      a.array = e->expr().name;
      a.subs = e->children();
      a.whole = opaque;
      out.push_back(a);
    }
    for (const Green &c : e->children())
      loads(c, stmt, opaque, out);
  }

  std::vector<Access> accesses(const StmtInfo &s) const {
    std::vector<Access> out;
    const GreenNode &n = *s.node.green();
    const StmtData &d = n.stmt();
    bool opaque = d.props.opaque;
    for (int l : s.loops)
      for (const Green &h : loop_node(l).header())
        loads(h, s.id, opaque, out);
    for (Access &a : out)
      a.header = true;
    if (d.op == StmtOp::Call) {
      loads(n.predicate(), s.id, opaque, out);
      for (const Green &a : n.call_args()) {
        if (a->expr().op == Op::ArrayRef) {
          for (bool w : {false, true}) {
            Access x;
            x.stmt = s.id;
            x.array = a->expr().name;
            x.write = w;
            x.whole = true;
            out.push_back(x);
          }
        } else {
          loads(a, s.id, opaque, out);
        }
      }
      return out;
    }
    for (std::size_t i = 0; i < n.children().size(); ++i)
      loads(n.children()[i], s.id, opaque, out);
    if (d.op == StmtOp::Store || d.op == StmtOp::Update) {
      auto subs = n.subscripts();
      Access w;
      w.stmt = s.id;
      w.array = d.target;
      w.subs.assign(subs.begin(), subs.end());
      w.write = true;
      w.whole = opaque;
      if (d.op == StmtOp::Update) {
        Access r = w;
        r.write = false;
        out.push_back(r);
      }
      out.push_back(w);
    }
    return out;
  }

  // Maps the iv names visible at a statement to loop ids; ivs of loops that
  // are not canonical are left out so subscripts using them are non-affine.
  std::map<std::string, int> iv_scope(const StmtInfo &s) const {
    std::map<std::string, int> out;
    for (int l : s.loops) {
      const LoopData &d = loop_node(l).loop();
      if (!d.iv.empty()) {
        if (d.canonical)
          out[d.iv] = l;
        else
          out.erase(d.iv);
      }
    }
    return out;
  }

  struct Test {
    bool independent = false;
    std::map<int, std::int64_t> distance; // loop id -> iv distance
  };

  Test subscript_test(const Access &a, const Access &b) const {
    Test t;
    if (a.whole || b.whole || a.subs.size() != b.subs.size())
      return t;
    const StmtInfo &sa = g_.stmts[static_cast<std::size_t>(a.stmt)];
    const StmtInfo &sb = g_.stmts[static_cast<std::size_t>(b.stmt)];
    auto scope_a = iv_scope(sa), scope_b = iv_scope(sb);
    std::set<std::string> ivs_a, ivs_b;
    for (const auto &[n, _] : scope_a)
      ivs_a.insert(n);
    for (const auto &[n, _] : scope_b)
      ivs_b.insert(n);
    for (std::size_t dim = 0; dim < a.subs.size(); ++dim) {
      auto fa = affine_of(a.subs[dim], ivs_a, invariant_);
      auto fb = affine_of(b.subs[dim], ivs_b, invariant_);
      if (!fa || !fb || fa->symbols != fb->symbols)
        continue;
      // a(x) = b(y)  <=>  sum ca*x - sum cb*y = kb - ka
      std::map<int, std::int64_t> ca, cb;
      for (const auto &[n, c] : fa->ivs)
        ca[scope_a.at(n)] = c;
      for (const auto &[n, c] : fb->ivs)
        cb[scope_b.at(n)] = c;
      std::int64_t rhs = fb->constant - fa->constant;
      if (ca.empty() && cb.empty()) {
        if (rhs != 0)
          t.independent = true;
        continue;
      }
      if (ca.size() == 1 && cb.size() == 1 &&
          ca.begin()->first == cb.begin()->first &&
          ca.begin()->second == cb.begin()->second) {
        int loop = ca.begin()->first;
        bool ok;
        // x - y = rhs / c, so the iv distance y - x is -rhs / c.
        std::int64_t d = -floor_div_exact(rhs, ca.begin()->second, ok);
        if (!ok) {
          t.independent = true;
          continue;
        }
        const GreenNode &ln = loop_node(loop);
        if (ln.lower()->expr().op == Op::IntLit &&
            ln.upper()->expr().op == Op::IntLit) {
          std::int64_t span =
              ln.upper()->expr().ival - ln.lower()->expr().ival;
          if (std::llabs(d) >= std::max<std::int64_t>(span, 0)) {
            t.independent = true;
            continue;
          }
        }
        if (d % ln.loop().step != 0) {
          t.independent = true;
          continue;
        }
        auto [it, inserted] = t.distance.emplace(loop, d);
        if (!inserted && it->second != d)
          t.independent = true;
        continue;
      }
      std::int64_t g = 0;
      for (const auto &[_, c] : ca)
        g = std::gcd(g, std::llabs(c));
      for (const auto &[_, c] : cb)
        g = std::gcd(g, std::llabs(c));
      if (g != 0 && rhs % g != 0)
        t.independent = true;
    }
    return t;
  }

  /// Emits the edges between src and dst instances for a raw vector relating
  /// the dst iteration to the src iteration, splitting '*' entries.
  void emit(int s1, int s2, bool w1, bool w2, DepKind forced,
            const std::string &name, const std::vector<int> &loops,
            std::vector<Dir> vec, std::vector<std::optional<std::int64_t>> dist,
            bool use_forced, int same_order = 0) {
    auto kind_of = [&](bool src_w, bool dst_w) {
      if (use_forced)
        return forced;
      if (src_w && dst_w)
        return DepKind::Output;
      return src_w ? DepKind::Flow : DepKind::Anti;
    };
    auto push = [&](bool forward, std::vector<Dir> v,
                    std::vector<std::optional<std::int64_t>> d) {
      DependenceEdge e;
      e.name = name;
      e.loops = loops;
      if (forward) {
        e.src = s1;
        e.dst = s2;
        e.kind = kind_of(w1, w2);
      } else {
        e.src = s2;
        e.dst = s1;
        e.kind = kind_of(w2, w1);
        for (Dir &x : v)
          x = flip(x);
        for (auto &x : d)
          if (x)
            x = -*x;
      }
      e.vector = std::move(v);
      e.distance = std::move(d);
      g_.edges.push_back(std::move(e));
    };
    for (std::size_t p = 0; p < vec.size(); ++p) {
      switch (vec[p]) {
      case Dir::Eq:
        continue;
      case Dir::Lt:
        push(true, vec, dist);
        return;
      case Dir::Gt:
        push(false, vec, dist);
        return;
      case Dir::Any: {
        auto v = vec;
        v[p] = Dir::Lt;
        push(true, v, dist);
        v[p] = Dir::Gt;
        push(false, v, dist);
        vec[p] = Dir::Eq;
        dist[p] = 0;
        continue;
      }
      }
    }
    // Same iteration: textual order, or header reads before the body.
    if (s1 < s2 || (s1 == s2 && same_order > 0))
      push(true, vec, dist);
    else if (s2 < s1 || (s1 == s2 && same_order < 0))
      push(false, vec, dist);
  }

  void memory_edges() {
    std::vector<Access> all;
    for (const StmtInfo &s : g_.stmts) {
      auto acc = accesses(s);
      all.insert(all.end(), acc.begin(), acc.end());
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (std::size_t j = i; j < all.size(); ++j) {
        const Access &a = all[i], &b = all[j];
        if (a.array != b.array || (!a.write && !b.write))
          continue;
        if (i == j && !a.write)
          continue;
        const StmtInfo &sa = g_.stmts[static_cast<std::size_t>(a.stmt)];
        const StmtInfo &sb = g_.stmts[static_cast<std::size_t>(b.stmt)];
        Test t = subscript_test(a, b);
        if (t.independent)
          continue;
        std::size_t m = common(sa, sb);
        std::vector<int> loops(sa.loops.begin(), sa.loops.begin() + m);
        std::vector<Dir> vec(m, Dir::Any);
        std::vector<std::optional<std::int64_t>> dist(m);
        for (std::size_t p = 0; p < m; ++p) {
          auto it = t.distance.find(loops[p]);
          if (it == t.distance.end())
            continue;
          const LoopData &ld = loop_node(loops[p]).loop();
          std::int64_t iters = it->second / ld.step;
          if (ld.reversed)
            iters = -iters;
          dist[p] = iters;
          vec[p] = iters > 0 ? Dir::Lt : iters < 0 ? Dir::Gt : Dir::Eq;
        }
        int order = a.header == b.header ? 0 : a.header ? 1 : -1;
        emit(a.stmt, b.stmt, a.write, b.write, DepKind::Flow, a.array, loops,
             vec, dist, false, order);
      }
    }
    // Opaque statements keep their relative order.
    for (const StmtInfo &a : g_.stmts) {
      if (!a.node->stmt().props.opaque)
        continue;
      for (const StmtInfo &b : g_.stmts) {
        if (b.id < a.id || !b.node->stmt().props.opaque)
          continue;
        std::size_t m = common(a, b);
        std::vector<int> loops(a.loops.begin(), a.loops.begin() + m);
        emit(a.id, b.id, true, true, DepKind::Output, "<opaque>", loops,
             std::vector<Dir>(m, Dir::Any),
             std::vector<std::optional<std::int64_t>>(m), false);
      }
    }
  }

  // Scalars ------------------------------------------------------------------

  struct Use {
    int stmt;
    DepKind kind;
  };

  void scalar_edges() {
    std::map<std::string, std::vector<int>> defs;
    std::map<std::string, std::vector<Use>> uses;
    for (const StmtInfo &s : g_.stmts) {
      const GreenNode &n = *s.node.green();
      const StmtData &d = n.stmt();
      if (d.op == StmtOp::Assign)
        defs[d.target].push_back(s.id);
      std::set<std::string> pred_sc, sc, ar;
      collect_reads(n.predicate(), pred_sc, ar);
      for (std::size_t i = 1; i < n.children().size(); ++i)
        collect_reads(n.children()[i], sc, ar);
      for (int l : s.loops)
        for (const Green &h : loop_node(l).header())
          collect_reads(h, sc, ar);
      for (const std::string &v : pred_sc)
        uses[v].push_back({s.id, DepKind::Control});
      for (const std::string &v : sc)
        uses[v].push_back({s.id, DepKind::Register});
    }
    for (const auto &[var, ds] : defs) {
      auto uit = uses.find(var);
      if (uit == uses.end())
        continue;
      for (int d : ds) {
        const StmtInfo &sd = g_.stmts[static_cast<std::size_t>(d)];
        std::set<std::size_t> last_value_levels;
        for (const Use &u : uit->second) {
          const StmtInfo &su = g_.stmts[static_cast<std::size_t>(u.stmt)];
          std::size_t m = common(sd, su);
          std::vector<int> loops(sd.loops.begin(), sd.loops.begin() + m);
          if (d < u.stmt)
            push_scalar(d, u.stmt, u.kind, var, loops, m, m);
          for (std::size_t p = 0; p < m; ++p)
            if (!killed(var, ds, su, p))
              push_scalar(d, u.stmt, u.kind, var, loops, p, m);
          if (u.stmt > d || m > 0)
            for (std::size_t k = m; k < sd.loops.size(); ++k)
              last_value_levels.insert(k);
        }
        for (std::size_t k : last_value_levels)
          push_scalar(d, d, DepKind::Register, var, sd.loops, k,
                      sd.loops.size());
      }
    }
  }

  // True if an unpredicated definition inside loop level p of the use's
  // chain precedes the use in every iteration of that loop.
  bool killed(const std::string &, const std::vector<int> &ds,
              const StmtInfo &use, std::size_t p) const {
    for (int k : ds) {
      const StmtInfo &sk = g_.stmts[static_cast<std::size_t>(k)];
      if (k >= use.id || !is_true_lit(sk.node->predicate()))
        continue;
      if (sk.loops.size() < p + 1 || sk.loops.size() > use.loops.size())
        continue;
      if (std::equal(sk.loops.begin(), sk.loops.end(), use.loops.begin()))
        return true;
    }
    return false;
  }

  // Vector with '=' before level p, '<' at p and '*' after; p == m gives the
  // loop-independent all-'=' vector.
  void push_scalar(int src, int dst, DepKind kind, const std::string &var,
                   const std::vector<int> &all_loops, std::size_t p,
                   std::size_t m) {
    DependenceEdge e;
    e.src = src;
    e.dst = dst;
    e.kind = kind;
    e.name = var;
    e.loops.assign(all_loops.begin(), all_loops.begin() + m);
    for (std::size_t i = 0; i < m; ++i) {
      if (i < p) {
        e.vector.push_back(Dir::Eq);
        e.distance.push_back(0);
      } else if (i == p) {
        e.vector.push_back(Dir::Lt);
        e.distance.push_back(std::nullopt);
      } else {
        e.vector.push_back(Dir::Any);
        e.distance.push_back(std::nullopt);
      }
    }
    g_.edges.push_back(std::move(e));
  }

  Green root_;
  const FunctionData *fn_ = nullptr;
  DepGraph g_;
  std::set<std::string> assigned_;
  std::set<std::string> invariant_;
};

} // namespace

DepGraph analyze_deps(const Green &root) { return Analyzer(root).run(); }

} // namespace loopdag
