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

#include <cmath>

#include "loopdag/interp.hpp"
#include "test_util.hpp"

using namespace loopdag;
using namespace loopdag::interp;
using loopdag::testing::corpus_env;
using loopdag::testing::corpus_program;

namespace {

double f64_at(const Env &e, const std::string &buf, std::size_t i) {
  return e.buffers.at(buf).floats.at(i);
}

std::int64_t i64_at(const Env &e, const std::string &buf, std::size_t i) {
  return e.buffers.at(buf).ints.at(i);
}

} // namespace

TEST(Run, TrigRowsMatchesDirectEvaluation) {
  mir::Program p = corpus_program("trig_rows.mir");
  RunResult r = run(p, "trig_rows", corpus_env("trig_rows.mir"));
  const double pi = 3.141592653589793;
  for (int i = 0; i < 128; ++i) {
    double s = std::sin(2 * pi * i / 128);
    double c = std::cos(2 * pi * i / 128);
    for (int j = 0; j < 64; ++j)
      ASSERT_EQ(f64_at(r.env, "A", i * 64 + j), j * s) << i << "," << j;
    for (int k = 0; k < 256; ++k)
      ASSERT_EQ(f64_at(r.env, "B", i * 256 + k), k * c) << i << "," << k;
  }
  for (int j = 0; j < 64; ++j)
    EXPECT_EQ(f64_at(r.env, "A", j), 0.0);
  EXPECT_EQ(r.statements, 128u * (64 + 256));
}

TEST(Run, EmptyFunctionLeavesEnvUnchanged) {
  mir::Program p = mir::parse("func e(A: [4] i64) {}");
  Env env = default_env(p.functions[0]);
  randomize(env, 3);
  RunResult r = run(p, "e", env);
  EXPECT_EQ(r.statements, 0u);
  EXPECT_FALSE(compare_envs(env, r.env, false, 0).has_value());
}

TEST(Run, GemmMatchesLoops) {
  mir::Program loops = corpus_program("matmul_ijk.mir");
  mir::Program call = mir::parse(
      "func g(C: [4, 4] f64 restrict, A: [4, 4] f64 restrict, "
      "B: [4, 4] f64 restrict) { call gemm(C, A, B, 4, 4, 4); }");
  Env env = default_env(loops.functions[0]);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    randomize(env, seed);
    RunResult a = run(loops, "matmul_ijk", env);
    RunResult b = run(call, "g", env);
    EXPECT_FALSE(compare_envs(a.env, b.env, false, 0).has_value());
    EXPECT_EQ(b.statements, 1u);
  }
}

TEST(Run, IntegerArithmeticWraps) {
  mir::Program p = mir::parse("func w(A: [1] i64) { A[0] = A[0] * 2; }");
  Env env = default_env(p.functions[0]);
  env.buffers["A"].ints[0] = std::numeric_limits<std::int64_t>::max();
  RunResult r = run(p, "w", env);
  EXPECT_EQ(i64_at(r.env, "A", 0), -2);
}

TEST(Run, DivisionByZeroTraps) {
  mir::Program p = mir::parse(
      "func d(n: i64, A: [4] i64) { L: for (i = 0; i < 4; i += 1) "
      "{ A[i] = 10 / (i - 2); } }");
  try {
    run(p, "d", default_env(p.functions[0]));
    FAIL() << "expected trap";
  } catch (const Trap &t) {
    EXPECT_EQ(t.iters(), std::vector<std::int64_t>{2});
  }
}

TEST(Run, OutOfBoundsTraps) {
  mir::Program p = mir::parse(
      "func o(A: [4] i64) { L: for (i = 0; i < 5; i += 1) { A[i] = 1; } }");
  EXPECT_THROW(run(p, "o", default_env(p.functions[0])), Trap);
}

TEST(Run, StepLimitGuardsWhileLoops) {
  mir::Program p = mir::parse(
      "func s(A: [1] i64) { while (A[0] == 0) { A[0] = 0; } }");
  RunOptions opts;
  opts.step_limit = 1000;
  EXPECT_THROW(run(p, "s", default_env(p.functions[0]), opts),
               StepLimitExceeded);
}

TEST(Run, Deterministic) {
  mir::Program p = corpus_program("stencil.mir");
  Env env = corpus_env("stencil.mir");
  randomize(env, 42);
  RunResult a = run(p, p.functions[0].name, env);
  RunResult b = run(p, p.functions[0].name, env);
  EXPECT_FALSE(compare_envs(a.env, b.env, false, 0).has_value());
  EXPECT_EQ(a.statements, b.statements);
}

TEST(DynamicDeps, RecurrenceIsOneFlowEdgeOfDistanceOne) {
  mir::Program p = corpus_program("recurrence.mir");
  auto edges = dynamic_deps(p, "recurrence", corpus_env("recurrence.mir"));
  ASSERT_EQ(edges.size(), 1u);
  EXPECT_EQ(edges[0].kind, "flow");
  EXPECT_EQ(edges[0].array, "A");
  EXPECT_EQ(edges[0].distance, std::vector<std::int64_t>{1});
}

TEST(DynamicDeps, RecurrenceInstancesBruteForce) {
  mir::Program p = corpus_program("recurrence.mir");
  RunOptions opts;
  opts.trace = true;
  RunResult r = run(p, "recurrence", corpus_env("recurrence.mir"), opts);
  // Write of A[c] followed by a read of A[c].
  int flows = 0;
  for (std::size_t a = 0; a < r.trace.size(); ++a)
    for (std::size_t b = a + 1; b < r.trace.size(); ++b)
      if (r.trace[a].write && !r.trace[b].write &&
          r.trace[a].cell == r.trace[b].cell)
        ++flows;
  EXPECT_EQ(flows, 7 - 1 + 0); // A[1..6] written then read; A[7] never read
}

TEST(DynamicDeps, DisjointCopyHasNone) {
  mir::Program p = corpus_program("copy.mir");
  EXPECT_TRUE(dynamic_deps(p, "copy", corpus_env("copy.mir")).empty());
}

TEST(DynamicDeps, GcdSplitHasNone) {
  mir::Program p = corpus_program("gcd_split.mir");
  EXPECT_TRUE(dynamic_deps(p, "gcd_split", corpus_env("gcd_split.mir")).empty());
}

TEST(Diff, ProgramAgainstItself) {
  mir::Program p = corpus_program("colsum_plain.mir");
  DiffVerdict v =
      diff(p, "colsum", p, "colsum", corpus_env("colsum_plain.mir"));
  EXPECT_TRUE(v.equal);
  EXPECT_EQ(v.seeds_run, 10);
}

TEST(Diff, ForcedReversalOfRecurrenceDiverges) {
  mir::Program p = corpus_program("recurrence.mir");
  mir::Program rev = mir::parse(
      "func recurrence(n: i64, A: [n] i64) { L: for (t = 1; t < n; t += 1) "
      "{ A[n - t] = A[n - t - 1] + 1; } }");
  DiffVerdict v = diff(p, "recurrence", rev, "recurrence",
                       corpus_env("recurrence.mir"));
  EXPECT_FALSE(v.equal);
  EXPECT_FALSE(v.divergence.empty());
}

TEST(Diff, TrapIsAVerdict) {
  mir::Program p = corpus_program("copy.mir");
  mir::Program bad = mir::parse(
      "func copy(n: i64, A: [n] f64 restrict, B: [n] f64 restrict) "
      "{ L: for (i = 0; i < n + 1; i += 1) { A[i] = B[i]; } }");
  DiffVerdict v = diff(p, "copy", bad, "copy", corpus_env("copy.mir"));
  EXPECT_FALSE(v.equal);
}

TEST(Diff, ReassocToleranceAbsorbsRounding) {
  Env a, b;
  a.buffers["X"].type = ScalarType::F64;
  a.buffers["X"].floats = {1.0};
  b = a;
  b.buffers["X"].floats = {1.0 + 1e-12};
  EXPECT_TRUE(compare_envs(a, b, false, 1e-9).has_value());
  EXPECT_FALSE(compare_envs(a, b, true, 1e-9).has_value());
}

TEST(Env, FromJson) {
  mir::Program p = corpus_program("colsum_plain.mir");
  Env e = env_from_json(
      R"({"bind":{"A":{"buffer":"buf0","offset":2,"extents":[8]},
                  "B":{"buffer":"buf0","offset":0,"extents":[6]}},
          "scalars":{"n":8,"m":6},
          "init":{"buf0":"iota"}})",
      p.functions[0]);
  ASSERT_EQ(e.buffers.count("buf0"), 1u);
  EXPECT_EQ(e.bindings.at("A").offset, 2);
  EXPECT_EQ(e.scalars.at("n").i, 8);
  const Buffer &buf = e.buffers.at("buf0");
  ASSERT_GE(buf.size(), 10u);
  EXPECT_EQ(buf.floats[3], 3.0);
}

TEST(Env, HeaderParams) {
  auto m = header_params("// x\n// params: n=8, m=6, PI=3.5\nfunc f() {}");
  EXPECT_EQ(m.at("n").i, 8);
  EXPECT_EQ(m.at("m").i, 6);
  EXPECT_TRUE(m.at("PI").is_float);
  EXPECT_EQ(m.at("PI").f, 3.5);
}

TEST(Env, AliasAllSharesOneBuffer) {
  mir::Program p = corpus_program("versioned.mir");
  Env e = default_env(p.functions[0], {}, true);
  std::set<std::string> bufs;
  for (const auto &[name, bind] : e.bindings)
    bufs.insert(bind.buffer);
  EXPECT_LT(bufs.size(), e.bindings.size());
}

TEST(Env, RandomizeIsSeeded) {
  mir::Program p = corpus_program("copy.mir");
  Env a = default_env(p.functions[0]);
  Env b = a;
  randomize(a, 7);
  randomize(b, 7);
  EXPECT_FALSE(compare_envs(a, b, false, 0).has_value());
  randomize(b, 8);
  EXPECT_TRUE(compare_envs(a, b, false, 0).has_value());
}
