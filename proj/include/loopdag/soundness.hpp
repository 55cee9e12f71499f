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


// Checks static dependence edges against exact dynamic ones.

#pragma once

#include <string>
#include <vector>

#include "loopdag/analysis.hpp"
#include "loopdag/interp.hpp"

namespace loopdag {

struct SoundnessReport {
  bool sound = true;  // every dynamic edge is covered by a static edge
  bool exact = true;  // every fully-known static distance is observed
  std::size_t dynamic_edges = 0;
  std::vector<std::string> missing;    // uncovered dynamic edges
  std::vector<std::string> unobserved; // static distances never seen
};

/// `f` is the numbered source function the DAG of `g` was lifted from and
/// `dynamic` its dynamic_deps.
SoundnessReport check_soundness(const mir::Function &f, const DepGraph &g,
                                const std::vector<interp::DynamicEdge> &dynamic);

std::string describe(const interp::DynamicEdge &e);

} // namespace loopdag
