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


// Loop transformations. Every transform maps an input root to a new root by
// copy-on-write rewrites, so subtrees outside the rewritten loops stay shared
// with the input. Legality is decided from the dependence graph of the input.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopdag/analysis.hpp"
#include "loopdag/lsdag.hpp"
#include "loopdag/mir.hpp"

namespace loopdag::xform {

enum class Origin : std::uint8_t { Pragma, Cli, Auto };

struct Request {
  mir::Directive directive;
  Origin origin = Origin::Cli;
};

/// A fact a transform relied on that the analysis could not prove.
struct RuntimeCheck {
  enum class Kind : std::uint8_t { NoAlias, Bound };
  Kind kind = Kind::NoAlias;
  std::string a, b;      // NoAlias: array names, a < b
  Green expr;            // Bound: expr >= literal
  std::int64_t literal = 0;

  bool operator==(const RuntimeCheck &o) const;
  std::string to_string() const;
};

struct Result {
  Green root;
  std::vector<RuntimeCheck> assumptions;
  std::vector<std::string> notes;
  bool reassociates = false; // reorders a floating-point reduction
};

struct Options {
  bool reassoc = false; // permit reordering floating-point reductions
  bool force = false;   // skip dependence legality (testing aid)
};

class TransformError : public std::runtime_error {
public:
  enum class Kind : std::uint8_t { Illegal, NotApplicable };
  TransformError(Kind kind, const std::string &msg,
                 std::vector<DependenceEdge> edges = {});
  Kind kind() const { return kind_; }
  const std::vector<DependenceEdge> &edges() const { return edges_; }

private:
  Kind kind_;
  std::vector<DependenceEdge> edges_;
};

Result reverse(Builder &b, const Green &root, const DepGraph &g,
               const std::string &loop, const Options &opts = {});
Result interchange(Builder &b, const Green &root, const DepGraph &g,
                   const std::string &outer, const std::string &inner,
                   const Options &opts = {});
Result fuse(Builder &b, const Green &root, const DepGraph &g,
            const std::string &first, const std::string &second,
            const Options &opts = {});
Result distribute(Builder &b, const Green &root, const DepGraph &g,
                  const std::string &loop, const Options &opts = {});
Result unroll(Builder &b, const Green &root, const DepGraph &g,
              const std::string &loop, std::int64_t factor,
              const Options &opts = {});
Result unroll_full(Builder &b, const Green &root, const DepGraph &g,
                   const std::string &loop, const Options &opts = {});
Result unroll_jam(Builder &b, const Green &root, const DepGraph &g,
                  const std::string &outer, std::int64_t factor,
                  const Options &opts = {});
Result unswitch(Builder &b, const Green &root, const DepGraph &g,
                const std::string &loop, const Options &opts = {});
Result parallel_mark(Builder &b, const Green &root, const DepGraph &g,
                     const std::string &loop, Origin origin,
                     const Options &opts = {});
Result delete_empty(Builder &b, const Green &root, const DepGraph &g,
                    const std::string &loop, const Options &opts = {});
/// Replaces the matmul nest whose outermost loop is `loop` by a gemm call.
Result replace_gemm(Builder &b, const Green &root, const DepGraph &g,
                    const std::string &loop, const Options &opts = {});

/// Dispatches one directive by name.
Result apply_one(Builder &b, const Green &root, const DepGraph &g,
                 const Request &req, const Options &opts = {});

struct Failure {
  mir::Directive directive;
  TransformError::Kind kind;
  std::string message;
  std::vector<DependenceEdge> edges;
};

struct Outcome {
  Green root;
  std::vector<mir::Directive> applied;
  std::vector<Result> results;
  std::vector<Failure> failures;
  std::vector<RuntimeCheck> checks; // deduplicated union of assumptions
  bool reassociates = false;
};

/// Applies requests in order, re-analyzing dependences after each step.
/// Failed requests are recorded and skipped; with `strict` the first
/// failure is rethrown.
Outcome apply(Builder &b, const Green &root,
              const std::vector<Request> &requests, const Options &opts = {},
              bool strict = false);

/// Relabels every labeled loop below n by appending suffix.
Green relabel(Builder &b, const Green &n, const std::string &suffix);

/// Rewrites a reversed loop into a forward loop over [0, N) whose body maps
/// the iv back to lo + (N-1-iv)*step. Other loops are returned unchanged.
Green materialize_reversal(Builder &b, const Green &loop);

/// Trip count expression of a canonical for-loop.
Green trip_count(Builder &b, const GreenNode &loop);

/// Upper bound of a loop, looking through an unswitch guard.
const Green &unguarded_upper(const GreenNode &loop);
/// Guard condition placed on a loop by unswitch, if any.
std::optional<Green> loop_guard(const GreenNode &loop);

} // namespace loopdag::xform
