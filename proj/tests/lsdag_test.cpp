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


#include <gtest/gtest.h>

#include <random>
#include <set>

#include <json.hpp>

#include "loopdag/lsdag.hpp"

using namespace loopdag;

namespace {

LoopData for_loop(const std::string &label, const std::string &iv) {
  LoopData d;
  d.label = label;
  d.iv = iv;
  d.canonical = true;
  return d;
}

Green store(Builder &b, const std::string &array, std::vector<Green> subs,
            Green value) {
  StmtData s;
  s.op = StmtOp::Store;
  s.target = array;
  std::vector<Green> kids{b.true_pred()};
  for (Green &g : subs)
    kids.push_back(std::move(g));
  kids.push_back(std::move(value));
  return b.stmt(s, std::move(kids));
}

Green angle(Builder &b) {
  return b.binary(Op::Div,
                  b.binary(Op::Mul, b.binary(Op::Mul, b.int_lit(2), b.var("PI")),
                           b.var("i")),
                  b.int_lit(128));
}

Green trig_rows(Builder &b) {
  Green sa = store(b, "A", {b.var("i"), b.var("j")},
                   b.binary(Op::Mul, b.var("j"),
                            b.call("sin", {angle(b)})));
  Green sb = store(b, "B", {b.var("i"), b.var("k")},
                   b.binary(Op::Mul, b.var("k"),
                            b.call("cos", {angle(b)})));
  Green lj = b.loop(for_loop("Lj", "j"),
                    {b.int_lit(0), b.int_lit(64), b.int_lit(1), sa});
  Green lk = b.loop(for_loop("Lk", "k"),
                    {b.int_lit(0), b.int_lit(256), b.int_lit(1), sb});
  Green li = b.loop(for_loop("Li", "i"),
                    {b.int_lit(0), b.int_lit(128), b.int_lit(1), lj, lk});
  FunctionData f;
  f.name = "trig_rows";
  return b.function(f, {li});
}

std::multiset<const GreenNode *> identities(const Green &root) {
  std::multiset<const GreenNode *> out;
  for (const GreenNode *n : reachable(root))
    out.insert(n);
  return out;
}

} // namespace

TEST(Builder, HashConsesPureExpressions) {
  Builder b;
  EXPECT_EQ(angle(b), angle(b));
  EXPECT_NE(b.var("x"), b.var("y"));
  EXPECT_EQ(b.float_lit(0.5), b.float_lit(0.5));
  EXPECT_NE(b.float_lit(0.0), b.float_lit(-0.0));
}

TEST(Builder, TrigRowsAngleSharedByBothStores) {
  Builder b;
  Green root = trig_rows(b);
  const Green &li = root->children()[0];
  const Green &sa = li->body()[0]->body()[0];
  const Green &sb = li->body()[1]->body()[0];
  EXPECT_EQ(sa->value()->children()[1]->children()[0],
            sb->value()->children()[1]->children()[0]);
}

TEST(Builder, Folding) {
  Builder b;
  Green x = b.var("x");
  EXPECT_EQ(b.add(x, b.int_lit(0)), x);
  EXPECT_EQ(b.mul(b.int_lit(1), x), x);
  EXPECT_EQ(b.add(b.int_lit(2), b.int_lit(3)), b.int_lit(5));
  EXPECT_EQ(b.add(b.add(x, b.int_lit(2)), b.int_lit(-2)), x);
  EXPECT_EQ(b.add(x, b.int_lit(-1)), b.binary(Op::Sub, x, b.int_lit(1)));
  EXPECT_EQ(b.sub(x, x), b.int_lit(0));
  EXPECT_EQ(b.logical_and(b.true_pred(), x), x);
  Green c = b.binary(Op::Lt, x, b.int_lit(3));
  EXPECT_EQ(b.logical_not(b.logical_not(c)), c);
}

TEST(Structural, EqualityIgnoresIdentity) {
  Builder b1, b2;
  Green r1 = trig_rows(b1), r2 = trig_rows(b2);
  EXPECT_NE(r1, r2);
  EXPECT_TRUE(structural_equal(r1, r1));
  EXPECT_TRUE(structural_equal(r1, r2));
  EXPECT_EQ(r1->hash(), r2->hash());
  LoopData other = r2->children()[0]->loop();
  other.parallel = true;
  Green changed = b2.with_loop(r2->children()[0], other);
  EXPECT_FALSE(structural_equal(r1->children()[0], changed));
}

TEST(Red, NavigationTrigRows) {
  Builder b;
  Green root = trig_rows(b);
  RedNode r = red_root(root);
  EXPECT_FALSE(red_parent(r).has_value());
  RedNode li = red_child(r, 0);
  RedNode lj = red_child(li, 3);
  RedNode st = red_child(lj, 3);
  EXPECT_TRUE(st->is_stmt());
  EXPECT_EQ(st.depth(), 3u);
  EXPECT_EQ(red_parent(st)->green(), lj.green());
  EXPECT_EQ(red_parent(*red_parent(st))->green(), li.green());
  EXPECT_EQ(red_parent(li)->green(), root);
  EXPECT_EQ(st.path(), (std::vector<std::size_t>{0, 3, 3}));
  EXPECT_THROW(red_child(st, 99), std::out_of_range);
}

TEST(Red, RandomDagNavigationRoundTrips) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Builder b;
    std::vector<Green> items;
    for (int i = 0; i < 6; ++i)
      items.push_back(store(b, "A", {b.int_lit(static_cast<int>(rng() % 4))},
                            b.var("x")));
    for (int round = 0; round < 5; ++round) {
      std::size_t k = rng() % items.size();
      std::vector<Green> kids{b.int_lit(0), b.int_lit(4), b.int_lit(1)};
      kids.push_back(items[k]);
      kids.push_back(items[rng() % items.size()]);
      items.push_back(
          b.loop(for_loop("L" + std::to_string(round), "i"), std::move(kids)));
    }
    FunctionData f;
    f.name = "r";
    Green root = b.function(f, items);
    std::vector<RedNode> stack{red_root(root)};
    std::size_t visited = 0;
    while (!stack.empty()) {
      RedNode r = stack.back();
      stack.pop_back();
      ++visited;
      if (auto p = red_parent(r)) {
        EXPECT_EQ(p->green()->children()[r.index()], r.green());
        EXPECT_EQ(red_child(*p, r.index()).green(), r.green());
      }
      for (std::size_t i = 0; i < r->children().size(); ++i)
        stack.push_back(red_child(r, i));
    }
    EXPECT_GT(visited, 10u);
  }
}

TEST(Rewrite, IdentityReplacement) {
  Builder b;
  Green root = trig_rows(b);
  Green out = rewrite(b, root, red_root(root), root);
  EXPECT_TRUE(structural_equal(out, root));
}

TEST(Rewrite, ReversingKLoopSharesJSubtree) {
  Builder b;
  Green root = trig_rows(b);
  auto before = identities(root);
  std::uint64_t hash_before = root->hash();
  RedNode lk = *find_loop(root, "Lk");
  LoopData d = lk->loop();
  d.reversed = true;
  Green rev = b.with_loop(lk.green(), d);
  std::uint64_t start = GreenNode::constructed();
  Green out = rewrite(b, root, lk, rev);
  EXPECT_EQ(GreenNode::constructed() - start, lk.depth());
  EXPECT_EQ(out->children()[0]->body()[0], root->children()[0]->body()[0]);
  EXPECT_EQ(root->hash(), hash_before);
  EXPECT_EQ(identities(root), before);
}

TEST(Rewrite, AllocatesExactlyThePath) {
  for (int d = 1; d <= 8; ++d) {
    Builder b;
    Green leaf = store(b, "A", {b.int_lit(0)}, b.int_lit(1));
    Green side = store(b, "B", {b.int_lit(0)}, b.int_lit(2));
    Green cur = leaf;
    for (int i = 0; i < d; ++i)
      cur = b.loop(for_loop("L" + std::to_string(i), "i" + std::to_string(i)),
                   {b.int_lit(0), b.int_lit(4), b.int_lit(1), cur, side});
    FunctionData f;
    f.name = "chain";
    Green root = b.function(f, {cur});
    RedNode target = red_root(root);
    for (int i = 0; i < d; ++i)
      target = red_child(target, i == 0 ? 0 : 3);
    Green repl = store(b, "A", {b.int_lit(0)}, b.int_lit(9));
    auto old_ids = identities(root);
    std::uint64_t start = GreenNode::constructed();
    Green out = rewrite(b, root, red_child(target, 3), repl);
    EXPECT_EQ(GreenNode::constructed() - start, static_cast<std::uint64_t>(d + 1))
        << "depth " << d;
    auto new_ids = identities(out);
    std::size_t fresh = 0;
    auto repl_ids = identities(repl);
    for (const GreenNode *n : new_ids)
      if (!old_ids.count(n) && !repl_ids.count(n))
        ++fresh;
    EXPECT_EQ(fresh, static_cast<std::size_t>(d + 1));
  }
}

TEST(Rewrite, Errors) {
  Builder b;
  Green root = trig_rows(b);
  Green other = trig_rows(b);
  RedNode foreign = red_child(red_root(other), 0);
  EXPECT_THROW(rewrite(b, root, foreign, foreign.green()), RewriteError);
  RedNode li = red_child(red_root(root), 0);
  EXPECT_THROW(rewrite(b, root, li, b.int_lit(3)), RewriteError);
  EXPECT_THROW(rewrite(b, root, red_child(li, 0), li.green()), RewriteError);
  EXPECT_THROW(rewrite(b, root, red_root(root), li.green()), RewriteError);
}

TEST(Rewrite, SpliceReplacesOneItemWithMany) {
  Builder b;
  Green root = trig_rows(b);
  RedNode lj = *find_loop(root, "Lj");
  Green lk = find_loop(root, "Lk")->green();
  std::vector<Green> items{lk, lj.green()};
  Green out = splice(b, root, lj, items);
  auto body = out->children()[0]->body();
  ASSERT_EQ(body.size(), 3u);
  EXPECT_EQ(body[0], lk);
  EXPECT_EQ(body[1], lj.green());
  std::vector<Green> none;
  Green gone = splice(b, root, lj, none);
  EXPECT_EQ(gone->children()[0]->body().size(), 1u);
}

TEST(Dump, SharedNodesAppearOnce) {
  Builder b;
  Green root = trig_rows(b);
  nlohmann::json j = nlohmann::json::parse(dag_to_json({&root, 1}));
  EXPECT_EQ(j["nodes"].size(), node_count(root));
  EXPECT_EQ(j["roots"][0], 0);
  Green copy = root;
  RedNode lk = *find_loop(root, "Lk");
  LoopData d = lk->loop();
  d.reversed = true;
  Green rev = rewrite(b, root, lk, b.with_loop(lk.green(), d));
  std::vector<Green> both{root, rev};
  nlohmann::json two = nlohmann::json::parse(dag_to_json(both));
  EXPECT_EQ(two["nodes"].size(), node_count(root) + 3);
}

TEST(Dump, TextMentionsLoops) {
  Builder b;
  std::string t = to_text(trig_rows(b));
  EXPECT_NE(t.find("Loop Lk for k in [0, 256) step 1"), std::string::npos);
}
