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

bool is_var(const Green &e, std::string *name) {
  if (e->expr().op != Op::Var)
    return false;
  *name = e->expr().name;
  return true;
}

// A canonical unit-step loop starting at zero whose only item is `inner`.
bool simple_loop(const Green &l) {
  if (!l->is_loop() || l->loop().is_while || !l->loop().canonical ||
      l->loop().step != 1 || l->loop().reversed || l->loop().label.empty())
    return false;
  return l->lower()->expr().op == Op::IntLit && l->lower()->expr().ival == 0;
}

// Two plain iv subscripts of an access.
bool iv_pair(std::span<const Green> subs, std::string &a, std::string &b) {
  return subs.size() == 2 && is_var(subs[0], &a) && is_var(subs[1], &b);
}

} // namespace

std::vector<MatmulMatch> detect_idiom_matmul(const Green &root) {
  std::vector<MatmulMatch> out;
  walk_items(red_root(root), [&](const RedNode &r) {
    const Green &l1 = r.green();
    if (!simple_loop(l1) || l1->body().size() != 1)
      return true;
    const Green &l2 = l1->body()[0];
    if (!simple_loop(l2) || l2->body().size() != 1)
      return true;
    const Green &l3 = l2->body()[0];
    if (!simple_loop(l3) || l3->body().size() != 1)
      return true;
    const Green &s = l3->body()[0];
    if (!s->is_stmt() || s->stmt().op != StmtOp::Update ||
        s->stmt().props.opaque || !is_true_lit(s->predicate()))
      return true;
    const Green &v = s->value();
    if (v->expr().op != Op::Mul)
      return true;
    const Green &la = v->children()[0], &lb = v->children()[1];
    if (la->expr().op != Op::Load || lb->expr().op != Op::Load)
      return true;
    std::string ci, cj, ai, ak, bk, bj;
    if (!iv_pair(s->subscripts(), ci, cj) || !iv_pair(la->children(), ai, ak) ||
        !iv_pair(lb->children(), bk, bj))
      return true;
    if (ci != ai || cj != bj || ak != bk || ci == cj || ci == ak || cj == ak)
      return true;
    const std::string &c = s->stmt().target, &a = la->expr().name,
                      &b = lb->expr().name;
    if (c == a || c == b || a == b)
      return true;
    std::map<std::string, const Green *> by_iv;
    for (const Green *l : {&l1, &l2, &l3})
      by_iv[(*l)->loop().iv] = l;
    if (!by_iv.count(ci) || !by_iv.count(cj) || !by_iv.count(ak))
      return true;
    // Bounds must not depend on the nest's own ivs.
    for (const Green *l : {&l1, &l2, &l3}) {
      std::set<std::string> sc, ar;
      collect_reads((*l)->upper(), sc, ar);
      if (sc.count(ci) || sc.count(cj) || sc.count(ak) || !ar.empty())
        return true;
    }
    MatmulMatch m;
    m.outer = l1->loop().label;
    m.loop_i = (*by_iv[ci])->loop().label;
    m.loop_j = (*by_iv[cj])->loop().label;
    m.loop_k = (*by_iv[ak])->loop().label;
    m.c = c;
    m.a = a;
    m.b = b;
    m.ni = (*by_iv[ci])->upper();
    m.nj = (*by_iv[cj])->upper();
    m.nk = (*by_iv[ak])->upper();
    out.push_back(std::move(m));
    return false;
  });
  return out;
}

} // namespace loopdag
