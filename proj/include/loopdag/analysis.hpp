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


// Lifting Mini-IR into the DAG, normalization, dependence analysis and idiom
// recognition.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "loopdag/lsdag.hpp"
#include "loopdag/mir.hpp"

namespace loopdag {

// Lifting -----------------------------------------------------------------------

struct LiftedFunction {
  Green root;
  /// Pragmas in source order. Implicit-target pragmas name the auto label
  /// assigned to the loop that follows them.
  std::vector<mir::Directive> directives;
};

/// Builds the DAG of f. If/else is converted into statement predicates;
/// conditions reading values written in a branch are first evaluated into a
/// fresh `__p<n>` scalar.
LiftedFunction lift(Builder &b, const mir::Function &f);
Green build_dag(Builder &b, const mir::Function &f);

/// Rules: (a) forward-substitute single-definition loads whose array is not
/// stored to before the uses, (b) turn a register-promoted accumulator back
/// into an in-loop `+=`, (c) CSE through hash-consing, (d) mark loops without
/// statements as empty. Returns root itself when nothing applies.
Green normalize(Builder &b, const Green &root);

// Affine forms ------------------------------------------------------------------

/// Linear combination of induction variables and loop-invariant symbols.
struct Affine {
  std::map<std::string, std::int64_t> ivs;     // by iv name
  std::map<std::string, std::int64_t> symbols; // never-assigned scalars
  std::int64_t constant = 0;

  bool is_constant() const { return ivs.empty() && symbols.empty(); }
};

/// `ivs` names the induction variables in scope; `invariant` the scalars
/// that never change within the function.
std::optional<Affine> affine_of(const Green &e,
                                const std::set<std::string> &ivs,
                                const std::set<std::string> &invariant);

// Dependences -------------------------------------------------------------------

enum class DepKind : std::uint8_t { Flow, Anti, Output, Register, Control };
std::string_view to_string(DepKind k);

enum class Dir : char { Lt = '<', Eq = '=', Gt = '>', Any = '*' };

struct LoopInfo {
  int id = 0;
  std::string label;
  RedNode node;
  int parent = -1; // enclosing loop id
  std::size_t depth = 0;
};

struct StmtInfo {
  int id = 0; // pre-order position among statements
  RedNode node;
  std::vector<int> loops; // enclosing loop ids, outermost first
};

struct DependenceEdge {
  int src = 0;
  int dst = 0;
  DepKind kind = DepKind::Flow;
  std::string name;       // array or scalar
  std::vector<int> loops; // common enclosing loops, outermost first
  std::vector<Dir> vector;
  std::vector<std::optional<std::int64_t>> distance; // in iterations

  bool is_memory() const {
    return kind == DepKind::Flow || kind == DepKind::Anti ||
           kind == DepKind::Output;
  }
  /// Position of loop id in the vector, or -1.
  int position(int loop) const;
  bool operator==(const DependenceEdge &) const = default;
};

class DepGraph {
public:
  std::vector<StmtInfo> stmts;
  std::vector<LoopInfo> loops;
  std::vector<DependenceEdge> edges;
  std::vector<bool> carries; // by loop id

  const LoopInfo *loop(const std::string &label) const;
  bool carries_dependence(const std::string &label) const;
  /// Labels of loops without carried dependences, in pre-order.
  std::vector<std::string> parallel_loops() const;
  std::vector<const DependenceEdge *> edges_between(int a, int b) const;
  /// {"edges":[...],"parallel_loops":[...]}
  std::string to_json() const;
  std::string to_text() const;
};

DepGraph analyze_deps(const Green &root);

/// Arrays that may share storage: the same name, or two parameters neither
/// of which is `restrict`. Locals never alias anything else.
bool may_alias(const FunctionData &f, const std::string &a,
               const std::string &b);

// Idioms ------------------------------------------------------------------------

struct MatmulMatch {
  std::string outer; // label of the outermost loop of the nest
  std::string loop_i, loop_j, loop_k;
  std::string c, a, b;
  Green ni, nj, nk; // trip bounds
};

std::vector<MatmulMatch> detect_idiom_matmul(const Green &root);

// Shared helpers ----------------------------------------------------------------

/// Scalars and arrays read by an expression.
void collect_reads(const Green &e, std::set<std::string> &scalars,
                   std::set<std::string> &arrays);
/// Scalar names assigned anywhere below root.
std::set<std::string> assigned_scalars(const Green &root);
/// Literal trip count of a canonical loop with literal bounds.
std::optional<std::int64_t> literal_trip_count(const GreenNode &loop);
/// Substitutes expressions for variables throughout a subtree.
Green substitute(Builder &b, const Green &n,
                 const std::map<std::string, Green> &map);
/// Number of Stmt nodes below n (counting shared nodes once per path).
std::size_t stmt_count(const Green &n);

} // namespace loopdag
