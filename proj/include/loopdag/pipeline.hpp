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


// Candidate management: runtime checks, cost estimation, selection, greedy
// exploration and lowering back to Mini-IR with a single version split.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "loopdag/analysis.hpp"
#include "loopdag/mir.hpp"
#include "loopdag/xform.hpp"

namespace loopdag::pipeline {

using xform::RuntimeCheck;

/// Constants of the cost formula.
struct CostConfig {
  double stride_penalty = 3.0;
  double parallel_discount = 0.25;
  double check_overhead = 10.0;
  double size_penalty = 0.05;
  double default_trip = 100.0;
};

struct CostEstimate {
  double work = 0;             // statement instances
  double locality_penalty = 1; // >= 1
  double parallel_discount = 1; // <= 1
  double check_overhead = 0;
  double size_penalty = 0;
  double total = 0;
};

/// Values of scalar parameters used to evaluate symbolic loop bounds.
using TripHints = std::map<std::string, std::int64_t>;

struct Candidate {
  int id = 0;
  Green root;
  std::vector<mir::Directive> applied;
  std::vector<RuntimeCheck> checks;
  CostEstimate cost;
  bool reassociates = false;
};

/// Drops checks that hold statically (restrict parameters, locals) and
/// duplicates.
std::vector<RuntimeCheck>
synthesize_checks(const FunctionData &f,
                  const std::vector<RuntimeCheck> &assumptions);

/// `base(A)+extent(A) <= base(B) || base(B)+extent(B) <= base(A)`.
mir::Expr check_expr(const RuntimeCheck &c);

/// `baseline_nodes` is the node count of the untransformed DAG.
CostEstimate estimate_cost(const Candidate &c, std::size_t baseline_nodes,
                           const TripHints &hints = {},
                           const CostConfig &cfg = {});

/// Lowest total; ties go to fewer checks, fewer directives, lower id.
const Candidate &select(const std::vector<Candidate> &candidates);

struct ExploreOptions {
  int budget = 16; // maximum number of candidates, baseline included
  bool reassoc = false;
  TripHints hints;
  CostConfig cost;
};

/// Greedy search from the baseline. The result starts with the baseline
/// (id 0); every other candidate improves on the one it was derived from.
std::vector<Candidate> auto_explore(Builder &b, const Green &baseline,
                                    const ExploreOptions &opts = {});

enum class PredicateStyle : std::uint8_t { Branches, Flags };

struct LowerOptions {
  PredicateStyle style = PredicateStyle::Branches;
  bool rematerialize = false; // recompute shared expressions at each use
};

/// Emits the candidate as a function. With checks, the body becomes
/// `if (checks) { candidate } else { baseline }`.
mir::Function lower(Builder &b, const Candidate &c, const Green &baseline,
                    const LowerOptions &opts = {});

/// Emits a DAG without versioning.
mir::Function lower_root(Builder &b, const Green &root,
                         const LowerOptions &opts = {});

/// {"candidates":[{"id","transforms","checks","cost"}],"selected":id}
std::string report_json(const std::vector<Candidate> &candidates,
                        int selected);
std::string report_text(const std::vector<Candidate> &candidates,
                        int selected);

// End-to-end driver ---------------------------------------------------------------

struct OptimizeOptions {
  std::string function; // empty: the first function
  std::string directives;
  bool explore = false;
  bool strict = false;
  xform::Options xform;
  ExploreOptions search;
  LowerOptions lowering;
};

struct Optimized {
  mir::Program program; // input with the function replaced
  std::vector<Candidate> candidates;
  int selected = 0;
  std::vector<xform::Failure> failures;
  std::vector<std::string> notes;
};

/// Lifts, normalizes, applies in-source pragmas and `directives` (or
/// explores), selects and lowers. Throws TransformError under strict.
Optimized optimize(const mir::Program &p, const OptimizeOptions &opts = {});

} // namespace loopdag::pipeline
