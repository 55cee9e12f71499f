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

#include "loopdag/analysis.hpp"
#include "loopdag/pipeline.hpp"
#include "loopdag/xform.hpp"
#include "test_util.hpp"

using namespace loopdag;
using loopdag::testing::corpus_text;
using xform::Origin;
using xform::TransformError;

namespace {

struct Session {
  std::string text;
  mir::Program prog;
  Builder b;
  Green root;
  DepGraph g;
};

std::unique_ptr<Session> open_source(const std::string &text) {
  auto s = std::make_unique<Session>();
  s->text = text;
  s->prog = mir::parse(text);
  s->root = normalize(s->b, build_dag(s->b, s->prog.functions[0]));
  s->g = analyze_deps(s->root);
  return s;
}

std::unique_ptr<Session> open_corpus(const std::string &name) {
  return open_source(corpus_text(name));
}

xform::Result op(Session &s, const std::string &directive,
                 xform::Options opts = {}, Origin origin = Origin::Cli) {
  mir::Directive d = mir::parse_directives(directive).at(0);
  return xform::apply_one(s.b, s.root, s.g, {d, origin}, opts);
}

xform::Options forced() {
  xform::Options o;
  o.force = true;
  return o;
}

/// Lowers `out` and compares it against the source function.
interp::DiffVerdict oracle(Session &s, const Green &out,
                           std::map<std::string, interp::Value> scalars = {},
                           bool reassoc = false) {
  mir::Program transformed = s.prog;
  transformed.functions[0] = pipeline::lower_root(s.b, out);
  mir::number_statements(transformed.functions[0]);
  auto params = interp::header_params(s.text);
  for (auto &[k, v] : scalars)
    params[k] = v;
  interp::Env env = interp::default_env(s.prog.functions[0], params);
  interp::DiffOptions o;
  o.reassoc = reassoc;
  const std::string &name = s.prog.functions[0].name;
  return interp::diff(s.prog, name, transformed, name, env, o);
}

TransformError::Kind failure_kind(Session &s, const std::string &directive,
                                  xform::Options opts = {},
                                  Origin origin = Origin::Cli) {
  try {
    op(s, directive, opts, origin);
  } catch (const TransformError &e) {
    return e.kind();
  }
  ADD_FAILURE() << directive << " did not fail";
  return TransformError::Kind::NotApplicable;
}

bool cites(Session &s, const std::string &directive, const std::string &name,
           std::vector<Dir> vec) {
  try {
    op(s, directive);
  } catch (const TransformError &e) {
    for (const DependenceEdge &x : e.edges())
      if (x.name == name && x.vector == vec)
        return true;
  }
  return false;
}

std::size_t count_loops(const Green &n) {
  std::size_t c = n->is_loop() ? 1 : 0;
  for (const Green &k : n->body())
    c += count_loops(k);
  return c;
}

std::vector<const GreenNode *> opaque_stmts(const Green &n) {
  std::vector<const GreenNode *> out;
  walk_items(red_root(n), [&](const RedNode &r) {
    if (r->is_stmt() && r->stmt().props.opaque)
      out.push_back(r.green().get());
    return true;
  });
  return out;
}

const std::string kCopy = "// params: n=8\n"
                          "func f(n: i64, A: [n] i64, B: [n] i64) {\n"
                          "  L: for (i = 0; i < n; i += 1) { A[i] = B[i]; }\n"
                          "}\n";

const std::string kRecurrence = corpus_text("recurrence.mir");

} // namespace

// reverse --------------------------------------------------------------------

TEST(Reverse, TrigRowsSharesUntouchedSubtree) {
  auto s = open_corpus("trig_rows.mir");
  auto r = op(*s, "reverse(Lk)");
  const Green &li0 = s->root->body()[0];
  const Green &li1 = r.root->body()[0];
  EXPECT_NE(li0, li1);
  EXPECT_EQ(li0->body()[0], li1->body()[0]); // j-loop shared
  EXPECT_EQ(li0->body()[1]->body()[0], li1->body()[1]->body()[0]);
  EXPECT_TRUE(li1->body()[1]->loop().reversed);
  EXPECT_TRUE(r.assumptions.empty());
  EXPECT_TRUE(oracle(*s, r.root).equal);
}

TEST(Reverse, CopyIsLegal) {
  auto s = open_source(kCopy);
  auto r = op(*s, "reverse(L)");
  EXPECT_TRUE(oracle(*s, r.root).equal);
}

TEST(Reverse, RecurrenceIsIllegal) {
  auto s = open_source(kRecurrence);
  EXPECT_TRUE(cites(*s, "reverse(L)", "A", {Dir::Lt}));
  auto r = op(*s, "reverse(L)", forced());
  EXPECT_FALSE(oracle(*s, r.root).equal);
}

TEST(Reverse, IntegerReductionIsReorderable) {
  auto s = open_source("// params: n=8\n"
                       "func f(n: i64, A: [n] i64, S: [1] i64) {\n"
                       "  L: for (i = 0; i < n; i += 1) { S[0] += A[i]; }\n"
                       "}\n");
  auto r = op(*s, "reverse(L)");
  EXPECT_FALSE(r.reassociates);
  EXPECT_TRUE(oracle(*s, r.root).equal);
}

TEST(Reverse, FloatReductionNeedsReassoc) {
  auto s = open_source("// params: n=8\n"
                       "func f(n: i64, A: [n] f64, S: [1] f64) {\n"
                       "  L: for (i = 0; i < n; i += 1) { S[0] += A[i]; }\n"
                       "}\n");
  EXPECT_EQ(failure_kind(*s, "reverse(L)"), TransformError::Kind::Illegal);
  xform::Options o;
  o.reassoc = true;
  auto r = op(*s, "reverse(L)", o);
  EXPECT_TRUE(r.reassociates);
  EXPECT_TRUE(oracle(*s, r.root, {}, true).equal);
}

// interchange ----------------------------------------------------------------

TEST(Interchange, ColSumPlainToIJ) {
  auto s = open_corpus("colsum_plain.mir");
  auto r = op(*s, "interchange(Lj,Li)");
  auto ij = open_corpus("colsum_ij.mir");
  EXPECT_TRUE(structural_equal(normalize(s->b, r.root),
                               normalize(s->b, build_dag(s->b, ij->prog.functions[0]))));
  EXPECT_TRUE(oracle(*s, r.root).equal);
}

TEST(Interchange, IndependentNest) {
  auto s = open_corpus("fill2d.mir");
  auto outer = s->g.loops.at(0).label;
  auto inner = s->g.loops.at(1).label;
  auto r = op(*s, "interchange(" + outer + "," + inner + ")");
  EXPECT_EQ(r.root->body()[0]->loop().label, inner);
  EXPECT_TRUE(oracle(*s, r.root).equal);
}

TEST(Interchange, SkewIsIllegal) {
  auto s = open_corpus("skew.mir");
  EXPECT_TRUE(cites(*s, "interchange(Li,Lj)", "A", {Dir::Lt, Dir::Gt}));
  auto r = op(*s, "interchange(Li,Lj)", forced());
  EXPECT_FALSE(oracle(*s, r.root).equal);
}

TEST(Interchange, ImperfectNestNotApplicable) {
  auto s = open_corpus("trig_rows.mir");
  EXPECT_EQ(failure_kind(*s, "interchange(Li,Lj)"),
            TransformError::Kind::NotApplicable);
}

// fuse -----------------------------------------------------------------------

TEST(Fuse, ProducerConsumer) {
  auto s = open_corpus("fuse_ok.mir");
  auto r = op(*s, "fuse(L1,L2)");
  ASSERT_EQ(r.root->body().size(), 1u);
  EXPECT_EQ(count_loops(r.root), 1u);
  EXPECT_TRUE(oracle(*s, r.root).equal);
}

TEST(Fuse, SelfIsNotApplicable) {
  auto s = open_corpus("fuse_ok.mir");
  EXPECT_EQ(failure_kind(*s, "fuse(L1,L1)"),
            TransformError::Kind::NotApplicable);
}

TEST(Fuse, FusionPreventingAnti) {
  auto s = open_corpus("fuse_bad.mir");
  EXPECT_EQ(failure_kind(*s, "fuse(L1,L2)"), TransformError::Kind::Illegal);
  auto r = op(*s, "fuse(L1,L2)", forced());
  EXPECT_FALSE(oracle(*s, r.root).equal);
}

TEST(Fuse, DifferentBoundsNotApplicable) {
  auto s = open_source("func f(A: [8] i64, B: [8] i64) {\n"
                       "  L1: for (i = 0; i < 8; i += 1) { A[i] = i; }\n"
                       "  L2: for (i = 0; i < 7; i += 1) { B[i] = i; }\n"
                       "}\n");
  EXPECT_EQ(failure_kind(*s, "fuse(L1,L2)"),
            TransformError::Kind::NotApplicable);
}

// distribute -----------------------------------------------------------------

TEST(Distribute, OrderPreserved) {
  auto s = open_corpus("distribute_scc.mir");
  auto r = op(*s, "distribute(L)");
  ASSERT_EQ(r.root->body().size(), 2u);
  EXPECT_EQ(r.root->body()[0]->loop().label, "L1");
  EXPECT_EQ(r.root->body()[0]->body()[0]->stmt().target, "A");
  EXPECT_EQ(r.root->body()[1]->body()[0]->stmt().target, "C");
  EXPECT_TRUE(oracle(*s, r.root).equal);
}

TEST(Distribute, SingleStatementNotApplicable) {
  auto s = open_source(kCopy);
  EXPECT_EQ(failure_kind(*s, "distribute(L)"),
            TransformError::Kind::NotApplicable);
}

TEST(Distribute, ScalarExpansion) {
  auto s = open_corpus("distribute_expand.mir");
  auto r = op(*s, "distribute(L)");
  EXPECT_GE(r.root->body().size(), 2u);
  ASSERT_FALSE(r.notes.empty());
  EXPECT_NE(r.notes[0].find("t"), std::string::npos);
  const auto &locals = r.root->function().locals;
  ASSERT_EQ(locals.size(), 1u);
  EXPECT_EQ(locals[0].name, "t_exp");
  EXPECT_TRUE(oracle(*s, r.root).equal);
  EXPECT_TRUE(oracle(*s, r.root, {{"n", interp::Value::of_int(13)}}).equal);
}

TEST(Distribute, RecurrenceCycleStaysTogether) {
  auto s = open_source("// params: n=8\n"
                       "func f(n: i64, A: [n] i64, B: [n] i64) {\n"
                       "  L: for (i = 1; i < n; i += 1) {\n"
                       "    A[i] = B[i - 1] + 1;\n"
                       "    B[i] = A[i] * 2;\n"
                       "  }\n"
                       "}\n");
  EXPECT_EQ(failure_kind(*s, "distribute(L)"),
            TransformError::Kind::NotApplicable);
}

// unroll ---------------------------------------------------------------------

TEST(Unroll, ExactFactorHasNoEpilogue) {
  auto s = open_corpus("unroll.mir");
  auto r = op(*s, "unroll(L8,4)");
  EXPECT_EQ(r.root->body().size(), s->root->body().size());
  const Green &main = r.root->body()[0];
  EXPECT_EQ(main->loop().step, 4);
  EXPECT_EQ(main->body().size(), 4u);
  EXPECT_EQ(r.root->body()[1], s->root->body()[1]);
  EXPECT_TRUE(oracle(*s, r.root).equal);
}

TEST(Unroll, RemainderGetsEpilogue) {
  auto s = open_corpus("unroll.mir");
  auto r = op(*s, "unroll(L7,4)");
  EXPECT_EQ(r.root->body().size(), s->root->body().size() + 1);
  EXPECT_TRUE(find_loop(r.root, "L7_epi").has_value());
  EXPECT_TRUE(oracle(*s, r.root).equal);
}

TEST(Unroll, SymbolicTripGetsEpilogue) {
  auto s = open_source(kCopy);
  auto r = op(*s, "unroll(L,3)");
  EXPECT_TRUE(oracle(*s, r.root).equal);
  EXPECT_TRUE(oracle(*s, r.root, {{"n", interp::Value::of_int(7)}}).equal);
  EXPECT_TRUE(oracle(*s, r.root, {{"n", interp::Value::of_int(0)}}).equal);
}

TEST(Unroll, FactorOneIsIdentity) {
  auto s = open_corpus("unroll.mir");
  auto r = xform::unroll(s->b, s->root, s->g, "L8", 1);
  EXPECT_TRUE(structural_equal(r.root, s->root));
  auto l = open_corpus("colsum_ij.mir");
  auto j = xform::unroll_jam(l->b, l->root, l->g, "Li", 1);
  EXPECT_TRUE(structural_equal(j.root, l->root));
}

TEST(Unroll, FullUnrollReplacesLoop) {
  auto s = open_corpus("unroll.mir");
  auto r = op(*s, "unroll_full(L3)");
  EXPECT_FALSE(find_loop(r.root, "L3").has_value());
  EXPECT_EQ(r.root->body().size(), 2u + 3u);
  for (std::size_t i = 2; i < 5; ++i)
    EXPECT_TRUE(r.root->body()[i]->is_stmt());
  EXPECT_TRUE(oracle(*s, r.root).equal);
}

TEST(Unroll, FullUnrollNeedsLiteralTrip) {
  auto s = open_source(kCopy);
  EXPECT_EQ(failure_kind(*s, "unroll_full(L)"),
            TransformError::Kind::NotApplicable);
}

TEST(Unroll, ReversedLoopIsMaterializedFirst) {
  auto s = open_corpus("unroll.mir");
  auto r1 = op(*s, "reverse(L8)");
  auto g1 = analyze_deps(r1.root);
  auto r2 = xform::unroll(s->b, r1.root, g1, "L8", 3);
  EXPECT_TRUE(oracle(*s, r2.root).equal);
}

TEST(UnrollJam, ColSum) {
  auto s = open_corpus("colsum_ij.mir");
  auto r = op(*s, "unroll_jam(Li,2)");
  EXPECT_TRUE(oracle(*s, r.root).equal);
  EXPECT_TRUE(oracle(*s, r.root, {{"n", interp::Value::of_int(7)}}).equal);
}

TEST(UnrollJam, SkewIsIllegal) {
  auto s = open_corpus("skew.mir");
  EXPECT_TRUE(cites(*s, "unroll_jam(Li,2)", "A", {Dir::Lt, Dir::Gt}));
  auto r = op(*s, "unroll_jam(Li,2)", forced());
  EXPECT_FALSE(oracle(*s, r.root).equal);
}

// unswitch -------------------------------------------------------------------

TEST(Unswitch, ParameterCondition) {
  auto s = open_corpus("unswitch.mir");
  auto r = op(*s, "unswitch(L)");
  EXPECT_EQ(count_loops(r.root), count_loops(s->root) + 1);
  EXPECT_TRUE(xform::loop_guard(*r.root->body()[0]).has_value());
  for (int c : {-3, 0, 1, 5})
    EXPECT_TRUE(oracle(*s, r.root, {{"c", interp::Value::of_int(c)}}).equal)
        << "c=" << c;
}

TEST(Unswitch, ParameterExpression) {
  auto s = open_corpus("unswitch.mir");
  auto r = op(*s, "unswitch(M)");
  EXPECT_EQ(count_loops(r.root), count_loops(s->root) + 1);
  for (int n : {5, 20})
    EXPECT_TRUE(oracle(*s, r.root, {{"n", interp::Value::of_int(n)}}).equal)
        << "n=" << n;
}

TEST(Unswitch, NoInvariantPredicate) {
  auto s = open_source(kCopy);
  EXPECT_EQ(failure_kind(*s, "unswitch(L)"),
            TransformError::Kind::NotApplicable);
}

// parallel / delete_empty ----------------------------------------------------

TEST(Parallel, IndependentLoop) {
  auto s = open_source(kCopy);
  auto r = op(*s, "parallel(L)", {}, Origin::Auto);
  EXPECT_TRUE(r.root->body()[0]->loop().parallel);
  ASSERT_EQ(r.assumptions.size(), 1u); // A and B are not restrict
  EXPECT_EQ(r.assumptions[0].to_string(), "no_alias(A,B)");
  EXPECT_TRUE(oracle(*s, r.root).equal);
}

TEST(Parallel, CarriedDependenceIsIllegal) {
  auto s = open_source(kRecurrence);
  EXPECT_EQ(failure_kind(*s, "parallel(L)", {}, Origin::Auto),
            TransformError::Kind::Illegal);
}

TEST(Parallel, PragmaForcesFlag) {
  auto s = open_source(kRecurrence);
  auto r = op(*s, "parallel(L)", {}, Origin::Pragma);
  EXPECT_TRUE(r.root->body()[0]->loop().parallel);
  EXPECT_TRUE(r.assumptions.empty());
  // The interpreter permutes parallel loops, exposing the carried edge.
  EXPECT_FALSE(oracle(*s, r.root).equal);
}

TEST(DeleteEmpty, RemovesEmptyLoop) {
  auto s = open_corpus("empty.mir");
  auto r = op(*s, "delete_empty(E)");
  ASSERT_EQ(r.root->body().size(), 1u);
  EXPECT_EQ(r.root->body()[0], s->root->body()[1]);
  EXPECT_TRUE(oracle(*s, r.root).equal);
}

TEST(DeleteEmpty, LoopWithEffectsNotApplicable) {
  auto s = open_corpus("empty.mir");
  EXPECT_EQ(failure_kind(*s, "delete_empty(L)"),
            TransformError::Kind::NotApplicable);
}

// gemm -----------------------------------------------------------------------

TEST(Gemm, CanonicalMatmul) {
  auto s = open_corpus("matmul_ijk.mir");
  auto r = op(*s, "gemm(Li)");
  ASSERT_EQ(r.root->body().size(), 1u);
  const Green &call = r.root->body()[0];
  ASSERT_TRUE(call->is_stmt());
  EXPECT_EQ(call->stmt().op, StmtOp::Call);
  EXPECT_EQ(call->stmt().target, "gemm");
  EXPECT_TRUE(call->stmt().props.opaque);
  EXPECT_TRUE(call->stmt().parallel);
  EXPECT_TRUE(r.assumptions.empty());
  EXPECT_TRUE(oracle(*s, r.root, {}, true).equal);
}

TEST(Gemm, NoMatch) {
  auto s = open_corpus("colsum_ij.mir");
  EXPECT_EQ(failure_kind(*s, "gemm(Li)"), TransformError::Kind::NotApplicable);
}

TEST(Gemm, MayAliasNeedsOneCheck) {
  auto s = open_corpus("matmul_alias.mir");
  auto r = op(*s, "gemm(Li)");
  ASSERT_EQ(r.assumptions.size(), 1u);
  EXPECT_EQ(r.assumptions[0].to_string(), "no_alias(A,C)");
}

// apply ----------------------------------------------------------------------

TEST(Apply, DistributeEnablesParallel) {
  auto s = open_source("// params: n=8\n"
                       "func f(n: i64, A: [n] i64 restrict, B: [n] i64 restrict,"
                       " C: [n] i64 restrict) {\n"
                       "  L: for (i = 1; i < n; i += 1) {\n"
                       "    C[i] = B[i] * 2;\n"
                       "    A[i] = A[i - 1] + B[i];\n"
                       "  }\n"
                       "}\n");
  auto alone = xform::apply(
      s->b, s->root, {{mir::parse_directives("parallel(L)")[0], Origin::Cli}});
  EXPECT_EQ(alone.failures.size(), 1u);
  std::vector<xform::Request> reqs;
  for (auto &d : mir::parse_directives("distribute(L);parallel(L1)"))
    reqs.push_back({d, Origin::Cli});
  auto out = xform::apply(s->b, s->root, reqs);
  EXPECT_TRUE(out.failures.empty());
  EXPECT_EQ(out.applied.size(), 2u);
  EXPECT_TRUE(find_loop(out.root, "L1")->green()->loop().parallel);
  EXPECT_TRUE(oracle(*s, out.root).equal);
}

TEST(Apply, EmptyListReturnsRoot) {
  auto s = open_source(kCopy);
  auto out = xform::apply(s->b, s->root, {});
  EXPECT_EQ(out.root, s->root);
  EXPECT_TRUE(out.applied.empty());
}

TEST(Apply, InterchangeThenReverse) {
  auto s = open_corpus("colsum_plain.mir");
  std::vector<xform::Request> reqs;
  for (auto &d : mir::parse_directives("interchange(Lj,Li);reverse(Li)"))
    reqs.push_back({d, Origin::Cli});
  auto out = xform::apply(s->b, s->root, reqs);
  EXPECT_TRUE(out.failures.empty()) << out.failures[0].message;
  EXPECT_TRUE(oracle(*s, out.root).equal);
}

TEST(Apply, StrictRethrows) {
  auto s = open_source(kRecurrence);
  std::vector<xform::Request> reqs = {
      {mir::parse_directives("reverse(L)")[0], Origin::Cli}};
  EXPECT_THROW(xform::apply(s->b, s->root, reqs, {}, true), TransformError);
  auto lenient = xform::apply(s->b, s->root, reqs);
  ASSERT_EQ(lenient.failures.size(), 1u);
  EXPECT_EQ(lenient.failures[0].kind, TransformError::Kind::Illegal);
  EXPECT_FALSE(lenient.failures[0].edges.empty());
  EXPECT_EQ(lenient.root, s->root);
}

TEST(Apply, ChecksAreDeduplicated) {
  auto s = open_corpus("versioned.mir");
  std::vector<xform::Request> reqs;
  for (auto &d : mir::parse_directives("reverse(L1);parallel(L2);parallel(L3)"))
    reqs.push_back({d, Origin::Cli});
  auto out = xform::apply(s->b, s->root, reqs);
  EXPECT_TRUE(out.failures.empty());
  ASSERT_EQ(out.checks.size(), 1u);
  EXPECT_EQ(out.checks[0].to_string(), "no_alias(A,B)");
}

TEST(Apply, UnknownLabel) {
  auto s = open_source(kCopy);
  EXPECT_EQ(failure_kind(*s, "reverse(Nope)"),
            TransformError::Kind::NotApplicable);
}

// properties -----------------------------------------------------------------

TEST(Opaque, CallsBlockDuplication) {
  auto s = open_source("// params: n=4\n"
                       "func g(X: [4] i64) { X[0] = X[0] + 1; }\n"
                       "func f(n: i64, A: [4] i64) {\n"
                       "  L: for (i = 0; i < 4; i += 1) { call g(A); }\n"
                       "}\n");
  EXPECT_EQ(failure_kind(*s, "unroll(L,2)"),
            TransformError::Kind::NotApplicable);
  EXPECT_EQ(failure_kind(*s, "reverse(L)"),
            TransformError::Kind::NotApplicable);
}

TEST(Opaque, AcceptedTransformsKeepOpaqueOrder) {
  auto s = open_corpus("calls.mir");
  auto before = opaque_stmts(s->root);
  ASSERT_FALSE(before.empty());
  for (const char *d : {"fuse(L,M)", "reverse(L)", "reverse(M)", "parallel(L)",
                        "unroll(L,2)", "unroll(M,2)"}) {
    try {
      auto r = op(*s, d);
      EXPECT_EQ(opaque_stmts(r.root), before) << d;
      EXPECT_TRUE(oracle(*s, r.root).equal) << d;
    } catch (const TransformError &) {
    }
  }
}

TEST(CoW, UntouchedSiblingsShared) {
  auto s = open_corpus("unroll.mir");
  for (const char *d : {"reverse(L8)", "unroll(L3,2)", "parallel(L8)",
                        "unroll_full(L3)"}) {
    auto r = op(*s, d);
    std::set<const GreenNode *> out;
    for (const Green &n : r.root->body())
      out.insert(n.get());
    std::size_t shared = 0;
    for (const Green &n : s->root->body())
      shared += out.count(n.get());
    EXPECT_EQ(shared, s->root->body().size() - 1) << d;
  }
}
