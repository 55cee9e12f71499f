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

std::size_t count_reads(const Green &n, const std::string &var) {
  std::size_t c = 0;
  if (n->is_expr() && n->expr().op == Op::Var && n->expr().name == var)
    ++c;
  for (const Green &k : n->children())
    c += count_reads(k, var);
  return c;
}

std::size_t count_defs(const Green &n, const std::string &var) {
  if (n->is_stmt())
    return n->stmt().op == StmtOp::Assign && n->stmt().target == var ? 1 : 0;
  if (n->is_expr())
    return 0;
  std::size_t c = 0;
  for (const Green &k : n->body())
    c += count_defs(k, var);
  return c;
}

bool is_unpredicated_assign(const Green &n) {
  return n->is_stmt() && n->stmt().op == StmtOp::Assign &&
         !n->stmt().props.opaque && is_true_lit(n->predicate());
}

// Stores, calls and opaque statements below n that may modify `array`, plus
// writes of any scalar in `scalars`.
bool clobbers(const FunctionData &f, const Green &n, const std::string &array,
              const std::set<std::string> &scalars) {
  if (n->is_stmt()) {
    const StmtData &d = n->stmt();
    if (d.props.opaque)
      return true;
    switch (d.op) {
    case StmtOp::Assign:
      return scalars.count(d.target) > 0;
    case StmtOp::Store:
    case StmtOp::Update:
      return may_alias(f, d.target, array);
    case StmtOp::Call:
      return true;
    }
    return true;
  }
  if (n->is_loop() && scalars.count(n->loop().iv))
    return true;
  for (const Green &k : n->body())
    if (clobbers(f, k, array, scalars))
      return true;
  return false;
}

class Normalizer {
public:
  Normalizer(Builder &b, const Green &root) : b_(b), root_(root) {}

  Green run() {
    Green cur = root_;
    for (;;) {
      fn_ = &cur->function();
      root_ = cur;
      bool changed = false;
      Green next = process(cur, changed);
      if (!changed)
        return cur;
      cur = next;
    }
  }

private:
  Green process(const Green &n, bool &changed) {
    std::vector<Green> kids = n->children();
    std::size_t h = n->header_size();
    for (std::size_t i = h; i < kids.size(); ++i) {
      if (!kids[i]->is_loop())
        continue;
      Green k = process(kids[i], changed);
      if (changed) {
        kids[i] = k;
        return b_.with_children(n, std::move(kids));
      }
    }
    std::vector<Green> body(kids.begin() + static_cast<long>(h), kids.end());
    if (sink_load(body) || depromote(body)) {
      changed = true;
      kids.resize(h);
      kids.insert(kids.end(), body.begin(), body.end());
      return b_.with_children(n, std::move(kids));
    }
    if (n->is_loop() && !n->loop().empty && stmt_count(n) == 0) {
      changed = true;
      LoopData d = n->loop();
      d.empty = true;
      return b_.with_loop(n, d);
    }
    return n;
  }

  // Rule (a).
  bool sink_load(std::vector<Green> &body) {
    for (std::size_t i = 0; i < body.size(); ++i) {
      const Green &d = body[i];
      if (!is_unpredicated_assign(d) || d->value()->expr().op != Op::Load)
        continue;
      const std::string &t = d->stmt().target;
      if (fn_->param(t) || count_defs(root_, t) != 1)
        continue;
      if (count_reads(d->value(), t) != 0)
        continue;
      std::size_t region = 0;
      for (std::size_t j = i + 1; j < body.size(); ++j)
        region += count_reads(body[j], t);
      if (region == 0 || region != count_reads(root_, t))
        continue;
      std::set<std::string> sc, ar;
      collect_reads(d->value(), sc, ar);
      const std::string &array = d->value()->expr().name;
      bool blocked = false;
      for (std::size_t j = i + 1; j < body.size() && !blocked; ++j)
        blocked = clobbers(*fn_, body[j], array, sc);
      if (blocked)
        continue;
      std::map<std::string, Green> map{{t, d->value()}};
      std::vector<Green> out(body.begin(), body.begin() + static_cast<long>(i));
      for (std::size_t j = i + 1; j < body.size(); ++j)
        out.push_back(substitute(b_, body[j], map));
      body = std::move(out);
      return true;
    }
    return false;
  }

  // Rule (b).
  bool depromote(std::vector<Green> &body) {
    for (std::size_t i = 0; i + 2 < body.size(); ++i) {
      const Green &d1 = body[i], &l = body[i + 1], &d2 = body[i + 2];
      if (!is_unpredicated_assign(d1) || d1->value()->expr().op != Op::Load)
        continue;
      const std::string &t = d1->stmt().target;
      const Green &load = d1->value();
      const std::string &array = load->expr().name;
      if (!l->is_loop() || l->loop().is_while || l->body().size() != 1)
        continue;
      const Green &s = l->body()[0];
      if (!is_unpredicated_assign(s) || s->stmt().target != t)
        continue;
      const Green &v = s->value();
      if (v->expr().op != Op::Add)
        continue;
      Green e;
      if (v->children()[0]->expr().op == Op::Var &&
          v->children()[0]->expr().name == t)
        e = v->children()[1];
      else if (v->children()[1]->expr().op == Op::Var &&
               v->children()[1]->expr().name == t)
        e = v->children()[0];
      else
        continue;
      if (count_reads(e, t) != 0)
        continue;
      if (!d2->is_stmt() || d2->stmt().op != StmtOp::Store ||
          d2->stmt().target != array || !is_true_lit(d2->predicate()) ||
          d2->stmt().props.opaque || d2->value()->expr().op != Op::Var ||
          d2->value()->expr().name != t)
        continue;
      auto subs = d2->subscripts();
      const auto &lsubs = load->children();
      if (subs.size() != lsubs.size() ||
          !std::equal(subs.begin(), subs.end(), lsubs.begin(),
                      [](const Green &a, const Green &b2) {
                        return structural_equal(a, b2);
                      }))
        continue;
      std::set<std::string> idx_sc, idx_ar;
      for (const Green &x : lsubs)
        collect_reads(x, idx_sc, idx_ar);
      if (idx_sc.count(l->loop().iv) || idx_sc.count(t) || !idx_ar.empty())
        continue;
      std::set<std::string> e_sc, e_ar;
      collect_reads(e, e_sc, e_ar);
      bool aliased = false;
      for (const std::string &a : e_ar)
        aliased = aliased || may_alias(*fn_, a, array);
      if (aliased)
        continue;
      if (count_defs(root_, t) != 2 || count_reads(root_, t) != 2)
        continue;
      for (const Green &hdr : l->header())
        if (count_reads(hdr, t) != 0)
          aliased = true;
      if (aliased)
        continue;
      const mir::Type *at = fn_->array_type(array);
      auto st = fn_->scalars.find(t);
      if (!at || st == fn_->scalars.end() || st->second != at->elem)
        continue;
      StmtData u;
      u.op = StmtOp::Update;
      u.target = array;
      u.origin = d2->stmt().origin;
      u.props.idempotent = false;
      u.props.speculatable = s->stmt().props.speculatable;
      std::vector<Green> kids{b_.true_pred()};
      kids.insert(kids.end(), subs.begin(), subs.end());
      kids.push_back(e);
      Green upd = b_.stmt(u, std::move(kids));
      std::vector<Green> lk(l->header().begin(), l->header().end());
      lk.push_back(upd);
      Green nl = b_.with_children(l, std::move(lk));
      body.erase(body.begin() + static_cast<long>(i),
                 body.begin() + static_cast<long>(i) + 3);
      body.insert(body.begin() + static_cast<long>(i), nl);
      return true;
    }
    return false;
  }

  Builder &b_;
  Green root_;
  const FunctionData *fn_ = nullptr;
};

} // namespace

Green normalize(Builder &b, const Green &root) {
  return Normalizer(b, root).run();
}

} // namespace loopdag
