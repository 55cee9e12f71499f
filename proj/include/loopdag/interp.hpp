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


// Reference interpreter for Mini-IR.
//
// Also serves as the ground truth for dependence analysis (access traces and
// exact dynamic dependences) and as the differential-testing oracle.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopdag/mir.hpp"

namespace loopdag::interp {

using mir::ScalarType;

struct Value {
  bool is_float = false;
  std::int64_t i = 0;
  double f = 0.0;

  static Value of_int(std::int64_t v) { return {false, v, 0.0}; }
  static Value of_float(double v) { return {true, 0, v}; }
  double as_float() const { return is_float ? f : static_cast<double>(i); }
  bool truthy() const { return is_float ? f != 0.0 : i != 0; }
};

struct Buffer {
  ScalarType type = ScalarType::I64;
  std::vector<std::int64_t> ints;
  std::vector<double> floats;

  std::size_t size() const {
    return type == ScalarType::I64 ? ints.size() : floats.size();
  }
  void resize(std::size_t n);
};

struct Binding {
  std::string buffer;
  std::int64_t offset = 0;
  std::vector<std::int64_t> extents;
};

struct Env {
  std::map<std::string, Buffer> buffers;
  std::map<std::string, Binding> bindings; // array parameter -> storage
  std::map<std::string, Value> scalars;    // scalar parameters
};

struct RunOptions {
  std::uint64_t step_limit = 100'000'000;
  bool trace = false;
  /// Run loops named by a `parallel` pragma in reverse iteration order, so a
  /// wrongly parallelized loop changes the observable result.
  bool reverse_parallel = false;
};

struct AccessRecord {
  int stmt = 0;                    // statement id in the entry function
  std::uint64_t instance = 0;      // dynamic execution number of stmt
  std::vector<int> loops;          // enclosing loop statement ids
  std::vector<std::int64_t> iters; // iteration count per enclosing loop
  std::string array;
  std::size_t buffer = 0; // index into Env::buffers order
  std::int64_t cell = 0;
  bool write = false;
};

struct RunResult {
  Env env;
  std::uint64_t statements = 0; // executed side-effecting statements
  std::vector<AccessRecord> trace;
};

/// Runtime error raised by the program (division by zero, out of bounds).
class Trap : public std::runtime_error {
public:
  Trap(const std::string &msg, int stmt, std::vector<std::int64_t> iters);
  int stmt() const { return stmt_; }
  const std::vector<std::int64_t> &iters() const { return iters_; }

private:
  int stmt_;
  std::vector<std::int64_t> iters_;
};

class StepLimitExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Runs `function` of p. Parameters must all be bound in env.
RunResult run(const mir::Program &p, const std::string &function, Env env,
              const RunOptions &opts = {});

/// Exact dependence between two statement instances, summarized by distance.
struct DynamicEdge {
  int src = 0;
  int dst = 0;
  std::string kind; // "flow", "anti" or "output"
  std::string array;
  std::vector<int> loops; // common enclosing loops (statement ids)
  std::vector<std::int64_t> distance;

  auto operator<=>(const DynamicEdge &) const = default;
};

std::vector<DynamicEdge> dynamic_deps(const mir::Program &p,
                                      const std::string &function,
                                      const Env &env,
                                      const RunOptions &opts = {});

// Environments --------------------------------------------------------------------

/// One buffer per array parameter, named after it, zero-filled. Scalars are
/// taken from `scalars`; missing i64 parameters default to 8 and missing f64
/// ones to 1.0. With alias_all, same-typed non-restrict arrays share one
/// buffer from offset 0.
Env default_env(const mir::Function &f,
                const std::map<std::string, Value> &scalars = {},
                bool alias_all = false);

/// Parses {"bind":{...},"scalars":{...},"init":{...}}. Unbound arrays get a
/// buffer of their own.
Env env_from_json(const std::string &json, const mir::Function &f);

/// Fills every buffer with seeded random values: i64 in [-100, 100], f64 in
/// [-1, 1).
void randomize(Env &env, std::uint64_t seed);

/// Scalar values from a `// params: n=8, m=6` line in the source.
std::map<std::string, Value> header_params(const std::string &source);

// Differential testing --------------------------------------------------------------

struct DiffOptions {
  int seeds = 10;
  bool reassoc = false; // f64 cells compared with relative tolerance
  double tolerance = 1e-9;
  RunOptions run;
  bool permute_parallel = true; // sets run.reverse_parallel for both sides
};

struct DiffVerdict {
  bool equal = true;
  int seeds_run = 0;
  std::string divergence; // first difference, empty when equal
};

/// Compares final buffers of fa and fb on randomized copies of `tmpl`.
DiffVerdict diff(const mir::Program &pa, const std::string &fa,
                 const mir::Program &pb, const std::string &fb,
                 const Env &tmpl, const DiffOptions &opts = {});

/// Compares two final environments buffer by buffer.
std::optional<std::string> compare_envs(const Env &a, const Env &b,
                                        bool reassoc, double tolerance);

} // namespace loopdag::interp
