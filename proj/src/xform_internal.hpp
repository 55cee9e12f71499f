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


// Helpers shared by the transform implementations.

#pragma once

#include <set>
#include <string>
#include <vector>

#include "loopdag/xform.hpp"

namespace loopdag::xform::detail {

[[noreturn]] void not_applicable(const std::string &msg);
[[noreturn]] void illegal(const std::string &msg,
                          std::vector<DependenceEdge> edges);

const LoopInfo &require_loop(const DepGraph &g, const std::string &label);
/// Canonical for-loop, or NotApplicable.
void require_for(const LoopInfo &l, const char *op);
void require_no_opaque(const Green &n, const char *op);

bool subtree_opaque(const Green &n);
bool in_loop(const StmtInfo &s, int loop);
/// True when e is carried at `loop`: '=' before its position, then '<'/'*'.
bool carried_at(const DependenceEdge &e, int loop);
/// Self edge of `x op= e` with op in {+, *}; floating point only when
/// reassoc is set.
bool reorderable_reduction(const DepGraph &g, const DependenceEdge &e,
                           const FunctionData &f, bool reassoc);

/// No-alias assumptions for may-alias pairs accessed under region where at
/// least one array of the pair is written.
std::vector<RuntimeCheck> alias_assumptions(const FunctionData &f,
                                            const Green &region);

std::set<std::string> labels_in(const Green &n);
/// `base` + suffix, made unique against taken.
std::string fresh_label(const std::set<std::string> &taken,
                        const std::string &base, const std::string &suffix);

/// Arrays read and written by one statement.
void stmt_arrays(const GreenNode &stmt, std::set<std::string> &reads,
                 std::set<std::string> &writes);
/// Scalars read by items below n (including headers) and assigned.
void item_scalars(const Green &n, std::set<std::string> &reads,
                  std::set<std::string> &writes);

/// Interchange/unroll-and-jam legality for adjacent loops outer, inner.
std::vector<DependenceEdge> interchange_violations(const DepGraph &g,
                                                   int outer, int inner);

/// Perfectly nested inner loop of outer (sole body item), or nullptr.
const LoopInfo *perfect_inner(const DepGraph &g, const LoopInfo &outer);

Green with_function_data(Builder &b, const Green &root, FunctionData data);

} // namespace loopdag::xform::detail
