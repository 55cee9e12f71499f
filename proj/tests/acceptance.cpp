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


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "loopdag/analysis.hpp"
#include "loopdag/pipeline.hpp"
#include "loopdag/soundness.hpp"
#include "loopdag/xform.hpp"
#include "test_util.hpp"

using namespace loopdag;
using loopdag::testing::corpus_env;
using loopdag::testing::corpus_files;
using loopdag::testing::corpus_program;
using loopdag::testing::corpus_text;

namespace {

constexpr int kSeeds = 10;
constexpr double kTolerance = 1e-9;
constexpr double kTimeLimitSeconds = 60.0;
constexpr int kRandomChains = 3;
constexpr int kChainLength = 3;

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int number;
  const char *title;
  std::function<Verdict()> check;
};

/// Collects failure messages; the first few end up in the detail column.
class Failures {
public:
  void add(const std::string &msg) {
    if (count_++ < 3)
      first_ += (first_.empty() ? "" : "; ") + msg;
  }
  bool empty() const { return count_ == 0; }
  Verdict verdict(const std::string &ok) const {
    if (count_ == 0)
      return {true, ok};
    return {false, std::to_string(count_) + " failure(s): " + first_};
  }

private:
  int count_ = 0;
  std::string first_;
};

interp::DiffVerdict diff_against_source(const std::string &file,
                                        const mir::Program &out,
                                        bool reassoc = false,
                                        bool alias_all = false,
                                        int seeds = kSeeds) {
  mir::Program in = corpus_program(file);
  interp::DiffOptions o;
  o.seeds = seeds;
  o.reassoc = reassoc;
  o.tolerance = kTolerance;
  const std::string &f = in.functions[0].name;
  return interp::diff(in, f, out, f, corpus_env(file, alias_all), o);
}

/// Candidate directives for a function: every single-loop op on every
/// labeled loop plus every interchange, fuse and unroll_jam pairing.
std::vector<std::string> directive_space(const mir::Program &p) {
  Builder b;
  Green root = normalize(b, build_dag(b, p.functions[0]));
  DepGraph g = analyze_deps(root);
  std::vector<std::string> out;
  for (const LoopInfo &l : g.loops) {
    if (l.label.empty())
      continue;
    const std::string &L = l.label;
    for (const char *op : {"reverse", "parallel", "distribute", "unroll_full",
                           "unswitch", "delete_empty", "gemm"})
      out.push_back(std::string(op) + "(" + L + ")");
    out.push_back("unroll(" + L + ",2)");
    out.push_back("unroll(" + L + ",3)");
    out.push_back("unroll_jam(" + L + ",2)");
    if (l.parent >= 0 && !g.loops[static_cast<std::size_t>(l.parent)].label.empty())
      out.push_back("interchange(" + g.loops[static_cast<std::size_t>(l.parent)].label +
                    "," + L + ")");
    for (const LoopInfo &m : g.loops)
      if (m.id != l.id && m.parent == l.parent && !m.label.empty())
        out.push_back("fuse(" + L + "," + m.label + ")");
  }
  return out;
}

pipeline::Optimized optimize_with(const mir::Program &p,
                                  const std::string &directives, bool strict) {
  pipeline::OptimizeOptions o;
  o.directives = directives;
  o.strict = strict;
  o.xform.reassoc = true;
  return pipeline::optimize(p, o);
}

// 1 ---------------------------------------------------------------------------

Verdict differential_preservation() {
  auto start = std::chrono::steady_clock::now();
  Failures fails;
  std::size_t programs = 0, applied = 0, chains = 0, runs = 0;
  std::mt19937_64 rng(20261016);
  for (const std::string &file : corpus_files()) {
    mir::Program p = corpus_program(file);
    ++programs;
    auto check = [&](const std::string &dirs, bool strict) {
      pipeline::Optimized o;
      try {
        o = optimize_with(p, dirs, strict);
      } catch (const xform::TransformError &) {
        return false;
      }
      bool reassoc = o.candidates.at(static_cast<std::size_t>(o.selected)).reassociates;
      interp::DiffVerdict v = diff_against_source(file, o.program, reassoc);
      runs += static_cast<std::size_t>(v.seeds_run);
      if (!v.equal)
        fails.add(file + " [" + dirs + "]: " + v.divergence);
      return true;
    };
    std::vector<std::string> space = directive_space(p);
    for (const std::string &d : space)
      applied += check(d, true) ? 1 : 0;
    if (space.empty())
      continue;
    std::uniform_int_distribution<std::size_t> pick(0, space.size() - 1);
    for (int c = 0; c < kRandomChains; ++c) {
      std::string chain;
      for (int k = 0; k < kChainLength; ++k)
        chain += (k ? ";" : "") + space[pick(rng)];
      check(chain, false);
      ++chains;
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              start)
                    .count();
  if (programs < 20)
    fails.add("corpus has only " + std::to_string(programs) + " programs");
  if (secs >= kTimeLimitSeconds)
    fails.add("took " + std::to_string(secs) + " s");
  std::ostringstream ok;
  ok << programs << " programs, " << applied << " applicable directives, "
     << chains << " random chains, " << runs << " seeded runs, " << secs
     << " s";
  return fails.verdict(ok.str());
}

// 2 ---------------------------------------------------------------------------

Verdict cow_sharing() {
  mir::Program p = corpus_program("trig_rows.mir");
  Builder b;
  Green root = normalize(b, build_dag(b, p.functions[0]));
  DepGraph g = analyze_deps(root);
  auto lk = find_loop(root, "Lk");
  auto lj = find_loop(root, "Lj");
  if (!lk || !lj)
    return {false, "trig_rows loops not found"};
  std::size_t depth = lk->depth();
  xform::Result r = xform::reverse(b, root, g, "Lk");
  auto old_nodes = reachable(root);
  std::set<const GreenNode *> old_set(old_nodes.begin(), old_nodes.end());
  std::size_t fresh = 0;
  for (const GreenNode *n : reachable(r.root))
    fresh += old_set.count(n) ? 0 : 1;
  auto new_lj = find_loop(r.root, "Lj");
  bool shared = new_lj && new_lj->green() == lj->green();
  for (const GreenNode *n : reachable(lj->green()))
    shared = shared && old_set.count(n);
  std::ostringstream os;
  os << "fresh nodes " << fresh << ", expected " << depth + 1
     << ", j-loop shared " << (shared ? "yes" : "no");
  return {shared && fresh == depth + 1, os.str()};
}

// 3 ---------------------------------------------------------------------------

Verdict normalization_isomorphism() {
  Builder b;
  auto norm = [&](const std::string &file) {
    return normalize(b, build_dag(b, corpus_program(file).functions[0]));
  };
  Green plain = norm("colsum_plain.mir");
  Green licm = norm("colsum_licm.mir");
  Green promoted = norm("colsum_promoted.mir");
  Failures fails;
  if (!structural_equal(plain, licm))
    fails.add("plain and LICM'd forms differ");
  auto swap = [&](const Green &root) -> std::optional<Green> {
    DepGraph g = analyze_deps(root);
    const std::string outer = root->body()[0]->loop().label;
    const std::string inner = g.loops.at(1).label;
    try {
      return xform::interchange(b, root, g, outer, inner).root;
    } catch (const xform::TransformError &e) {
      fails.add(std::string("interchange failed: ") + e.what());
      return std::nullopt;
    }
  };
  auto plain_x = swap(plain);
  auto licm_x = swap(licm);
  auto promoted_x = swap(promoted);
  // The promoted accumulator is i-outer by construction; it matches the
  // plain nest once that is interchanged.
  if (plain_x && !structural_equal(*plain_x, promoted))
    fails.add("promoted form differs from interchanged plain form");
  if (promoted_x && !structural_equal(*promoted_x, plain))
    fails.add("interchanged promoted form differs from plain form");
  if (plain_x && licm_x && !structural_equal(*plain_x, *licm_x))
    fails.add("interchanged plain and LICM'd forms differ");
  return fails.verdict("plain == LICM'd, promoted == interchange(plain), "
                       "interchange succeeds on all three");
}

// 4 ---------------------------------------------------------------------------

Verdict dependence_soundness() {
  Failures fails;
  std::size_t checked = 0, edges = 0;
  for (const std::string &file : corpus_files()) {
    mir::Program p = corpus_program(file);
    interp::Env env = corpus_env(file);
    interp::randomize(env, 7);
    interp::RunOptions o;
    o.trace = true;
    const std::string &f = p.functions[0].name;
    auto run = interp::run(p, f, env, o);
    if (loopdag::testing::max_trip(run.trace) > 8)
      continue;
    auto dyn = interp::dynamic_deps(p, f, env);
    Builder b;
    DepGraph g = analyze_deps(build_dag(b, p.functions[0]));
    SoundnessReport r = check_soundness(p.functions[0], g, dyn);
    ++checked;
    edges += r.dynamic_edges;
    if (!r.sound)
      fails.add(file + ": " + r.missing.front());
  }
  for (const char *file : {"recurrence.mir", "skew.mir", "distribute_scc.mir",
                           "fuse_bad.mir", "stencil.mir"}) {
    mir::Program p = corpus_program(file);
    auto dyn = interp::dynamic_deps(p, p.functions[0].name, corpus_env(file));
    Builder b;
    DepGraph g = analyze_deps(build_dag(b, p.functions[0]));
    SoundnessReport r = check_soundness(p.functions[0], g, dyn);
    if (!r.exact)
      fails.add(std::string(file) + ": static distance not observed: " +
                r.unobserved.front());
  }
  {
    Builder b;
    DepGraph g = analyze_deps(
        normalize(b, build_dag(b, corpus_program("gcd_split.mir").functions[0])));
    for (const DependenceEdge &e : g.edges)
      if (e.is_memory())
        fails.add("gcd_split reports a memory dependence on " + e.name);
  }
  return fails.verdict(std::to_string(checked) + " programs, " +
                       std::to_string(edges) +
                       " dynamic edges covered; strong-SIV distances exact; "
                       "A[2i] vs A[2i+1] independent");
}

// 5 ---------------------------------------------------------------------------

struct Witness {
  std::string file;
  std::string directive;
  xform::Origin origin = xform::Origin::Cli;
};

/// Applies one directive and diffs the lowered result against the source.
/// Returns nullopt when the transform was rejected.
std::optional<bool> witness_diff(const Witness &w, bool force) {
  mir::Program p = corpus_program(w.file);
  Builder b;
  Green root = normalize(b, build_dag(b, p.functions[0]));
  DepGraph g = analyze_deps(root);
  xform::Options opts;
  opts.force = force;
  mir::Directive d = mir::parse_directives(w.directive).at(0);
  xform::Result r;
  try {
    r = xform::apply_one(b, root, g, {d, w.origin}, opts);
  } catch (const xform::TransformError &e) {
    if (e.kind() != xform::TransformError::Kind::Illegal)
      throw;
    return std::nullopt;
  }
  mir::Program out = p;
  out.functions[0] = pipeline::lower_root(b, r.root);
  mir::number_statements(out.functions[0]);
  return diff_against_source(w.file, out).equal;
}

Verdict legality_witnesses() {
  struct Case {
    const char *op;
    Witness rejected, accepted;
  };
  const std::vector<Case> cases = {
      {"reverse", {"recurrence.mir", "reverse(L)"}, {"copy.mir", "reverse(L)"}},
      {"interchange",
       {"skew.mir", "interchange(Li,Lj)"},
       {"fill2d.mir", "interchange(Li,Lj)"}},
      {"fuse", {"fuse_bad.mir", "fuse(L1,L2)"}, {"fuse_ok.mir", "fuse(L1,L2)"}},
      {"unroll_jam",
       {"skew.mir", "unroll_jam(Li,2)"},
       {"colsum_ij.mir", "unroll_jam(Li,2)"}},
      {"parallel_mark",
       {"recurrence.mir", "parallel(L)", xform::Origin::Auto},
       {"copy.mir", "parallel(L)", xform::Origin::Auto}},
  };
  Failures fails;
  for (const Case &c : cases) {
    try {
      if (witness_diff(c.rejected, false).has_value())
        fails.add(std::string(c.op) + ": witness " + c.rejected.file +
                  " was not rejected");
      auto forced = witness_diff(c.rejected, true);
      if (!forced || *forced)
        fails.add(std::string(c.op) + ": forcing on " + c.rejected.file +
                  " did not change memory");
      auto ok = witness_diff(c.accepted, false);
      if (!ok || !*ok)
        fails.add(std::string(c.op) + ": accepted case " + c.accepted.file +
                  " does not diff clean");
    } catch (const std::exception &e) {
      fails.add(std::string(c.op) + ": " + e.what());
    }
  }
  return fails.verdict("5 ops: rejected witness mismatches when forced, "
                       "accepted case diffs clean");
}

// 6 ---------------------------------------------------------------------------

Verdict motivating_scenario() {
  mir::Program p = corpus_program("mixed.mir");
  pipeline::OptimizeOptions o;
  o.explore = true;
  pipeline::Optimized out = pipeline::optimize(p, o);
  const pipeline::Candidate &c =
      out.candidates.at(static_cast<std::size_t>(out.selected));
  Failures fails;
  std::string chain;
  for (const auto &d : c.applied)
    chain += (chain.empty() ? "" : ";") + mir::to_string(d);
  bool has_distribute = false, has_parallel = false;
  for (const auto &d : c.applied) {
    has_distribute |= d.name == "distribute";
    has_parallel |= d.name == "parallel";
  }
  if (!has_distribute || !has_parallel)
    fails.add("selected [" + chain + "]");
  std::size_t loops = 0, parallel = 0;
  for (const Green &n : c.root->body())
    if (n->is_loop()) {
      ++loops;
      parallel += n->loop().parallel ? 1 : 0;
    }
  if (loops < 2 || parallel < 1)
    fails.add("no parallel loop among the distributed pieces");
  auto v = diff_against_source("mixed.mir", out.program);
  if (!v.equal)
    fails.add("diff: " + v.divergence);
  return fails.verdict("selected [" + chain + "], " + std::to_string(parallel) +
                       " of " + std::to_string(loops) +
                       " loops parallel, diff clean");
}

// 7 ---------------------------------------------------------------------------

void collect_ids(const std::vector<mir::Stmt> &body, std::set<int> &out) {
  for (const mir::Stmt &s : body) {
    out.insert(s.id);
    collect_ids(s.body, out);
    collect_ids(s.else_body, out);
  }
}

std::size_t count_substr(const std::string &s, const std::string &needle) {
  std::size_t n = 0;
  for (auto at = s.find(needle); at != std::string::npos;
       at = s.find(needle, at + 1))
    ++n;
  return n;
}

Verdict single_version() {
  const std::string file = "versioned.mir";
  const std::string chain = "reverse(L1);parallel(L2);parallel(L3)";
  pipeline::Optimized o = optimize_with(corpus_program(file), chain, true);
  const pipeline::Candidate &c =
      o.candidates.at(static_cast<std::size_t>(o.selected));
  Failures fails;
  if (c.applied.size() != 3)
    fails.add("applied " + std::to_string(c.applied.size()) + " transforms");
  if (c.checks.size() != 1)
    fails.add(std::to_string(c.checks.size()) + " checks");
  std::string text = mir::print(o.program);
  if (count_substr(text, "extent(") != 2)
    fails.add("emitted text contains " +
              std::to_string(count_substr(text, "extent(") / 2) +
              " alias checks");
  mir::Program out = mir::parse(text);
  const mir::Function &f = out.functions[0];
  std::size_t splits = 0;
  const mir::Stmt *split = nullptr;
  for (const mir::Stmt &s : f.body)
    if (s.kind == mir::StmtKind::If) {
      ++splits;
      split = &s;
    }
  if (splits != 1 || f.body.size() != 1 || !split->has_else)
    fails.add("expected one two-arm split at function entry");
  if (split) {
    std::set<int> then_ids, else_ids;
    collect_ids(split->body, then_ids);
    collect_ids(split->else_body, else_ids);
    interp::Env env = corpus_env(file, true);
    interp::randomize(env, 1);
    interp::RunOptions ro;
    ro.trace = true;
    auto r = interp::run(out, f.name, env, ro);
    bool in_then = false, in_else = false;
    for (const auto &a : r.trace) {
      in_then |= then_ids.count(a.stmt) > 0;
      in_else |= else_ids.count(a.stmt) > 0;
    }
    if (in_then || !in_else)
      fails.add("aliased binding did not take the fallback arm");
  }
  auto plain = diff_against_source(file, o.program);
  auto aliased = diff_against_source(file, o.program, false, true);
  if (!plain.equal)
    fails.add("diff: " + plain.divergence);
  if (!aliased.equal)
    fails.add("aliased diff: " + aliased.divergence);
  return fails.verdict("1 check (" +
                       (c.checks.empty() ? std::string("-")
                                         : c.checks[0].to_string()) +
                       "), one two-arm split, aliased run takes fallback and "
                       "matches");
}

// 8 ---------------------------------------------------------------------------

Verdict cost_selection() {
  const std::string file = "colmajor.mir";
  constexpr std::int64_t kN = 100;
  mir::Program p = corpus_program(file);
  Builder b;
  Green root = normalize(b, build_dag(b, p.functions[0]));
  DepGraph g = analyze_deps(root);
  pipeline::TripHints hints{{"n", kN}};
  std::size_t base_nodes = node_count(root);
  pipeline::Candidate base;
  base.root = root;
  base.cost = pipeline::estimate_cost(base, base_nodes, hints);
  auto x = xform::interchange(b, root, g, "Lj", "Li");
  pipeline::Candidate swapped;
  swapped.id = 1;
  swapped.root = x.root;
  swapped.applied = mir::parse_directives("interchange(Lj,Li)");
  swapped.checks = pipeline::synthesize_checks(root->function(), x.assumptions);
  swapped.cost = pipeline::estimate_cost(swapped, base_nodes, hints);
  Failures fails;
  if (pipeline::select({base, swapped}).id != 1)
    fails.add("select kept the baseline");

  interp::Env env =
      interp::default_env(p.functions[0], {{"n", interp::Value::of_int(kN)}});
  auto r = interp::run(p, p.functions[0].name, env);
  if (static_cast<double>(r.statements) != base.cost.work)
    fails.add("interpreter counted " + std::to_string(r.statements) +
              " statements, model work " + std::to_string(base.cost.work));
  std::ostringstream os;
  os << "baseline total " << base.cost.total << " (locality "
     << base.cost.locality_penalty << "), interchanged total "
     << swapped.cost.total << " (locality " << swapped.cost.locality_penalty
     << "); work " << base.cost.work << " == " << r.statements
     << " executed statements";
  return fails.verdict(os.str());
}

// 9 ---------------------------------------------------------------------------

Verdict gemm_idiom() {
  Failures fails;
  for (const char *file : {"matmul_ijk.mir", "matmul_kij.mir"}) {
    mir::Program p = corpus_program(file);
    Builder b;
    Green root = normalize(b, build_dag(b, p.functions[0]));
    auto matches = detect_idiom_matmul(root);
    if (matches.size() != 1) {
      fails.add(std::string(file) + ": " + std::to_string(matches.size()) +
                " matches");
      continue;
    }
    pipeline::Optimized o =
        optimize_with(p, "gemm(" + matches[0].outer + ")", true);
    std::string text = mir::print(o.program);
    if (text.find("call gemm(") == std::string::npos ||
        text.find("for (") != std::string::npos)
      fails.add(std::string(file) + ": nest not replaced");
    auto v = diff_against_source(file, o.program);
    if (!v.equal)
      fails.add(std::string(file) + ": " + v.divergence);
  }
  return fails.verdict("ijk and kij detected, replaced by gemm, diff clean");
}

} // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "differential preservation", differential_preservation},
      {2, "copy-on-write sharing", cow_sharing},
      {3, "normalization isomorphism", normalization_isomorphism},
      {4, "dependence soundness", dependence_soundness},
      {5, "legality witnesses", legality_witnesses},
      {6, "distribute + parallel scenario", motivating_scenario},
      {7, "single-version emission", single_version},
      {8, "cost-model selection", cost_selection},
      {9, "gemm idiom", gemm_idiom},
  };
  int failed = 0;
  for (const Criterion &c : criteria) {
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception &e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << c.number << "] "
              << c.title << ": " << v.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/"
            << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
