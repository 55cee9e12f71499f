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

// Loop Structure DAG.
//
// Green nodes are immutable and carry only their children, so a subtree can
// be referenced from any number of parents and from several roots at once.
// Red nodes are a traversal-time overlay adding the parent link and the
// position within the parent. Rewrites are copy-on-write: replacing a node
// reallocates the path from it to the root and shares everything else.
//
// Child layout by kind:
//   FunctionRoot: body items (Loop or Stmt)
//   Loop (for):   lower, upper, step, body items...
//   Loop (while): exit condition, body items...
//   Stmt:         predicate, then by op:
//                   Assign: value
//                   Store/Update: subscripts..., value
//                   Call: arguments...
//   Expr:         operands

#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "loopdag/mir.hpp"

namespace loopdag {

using mir::Op;
using mir::ScalarType;

enum class NodeKind : std::uint8_t { FunctionRoot, Loop, Stmt, Expr };

std::string_view to_string(NodeKind k);

struct ExprData {
  Op op = Op::IntLit;
  std::int64_t ival = 0;
  double fval = 0.0;
  std::string name;
};

struct LoopData {
  std::string label; // empty or user label; auto labels start with "__L"
  std::string iv;    // empty for while-style loops
  bool is_while = false;
  bool canonical = false; // literal positive step, invariant bounds
  std::int64_t step = 1;  // valid when canonical
  bool parallel = false;
  bool opaque = false;
  bool reversed = false; // iterates lo + (N-1-t)*step for t = 0..N-1
  bool empty = false;    // no statements below; set by normalization
  int origin = -1;       // source statement id
};

enum class StmtOp : std::uint8_t { Assign, Store, Update, Call };

struct PropertySet {
  bool idempotent = true;
  bool speculatable = false;
  bool opaque = false; // hard to transform
};

struct StmtData {
  StmtOp op = StmtOp::Assign;
  std::string target; // scalar, array or callee
  PropertySet props;
  bool parallel = false; // library calls that run in parallel
  int origin = -1;
};

struct LocalArray {
  std::string name;
  mir::Type type;
};

struct FunctionData {
  std::string name;
  std::vector<mir::Param> params;
  std::vector<LocalArray> locals;
  /// Element types of scalars and ivs. Bookkeeping only: not part of
  /// structural equality.
  std::map<std::string, ScalarType> scalars;

  const mir::Param *param(const std::string &n) const;
  /// Type of a parameter or local array, or nullptr.
  const mir::Type *array_type(const std::string &n) const;
};

class GreenNode;
using Green = std::shared_ptr<const GreenNode>;

class GreenNode {
public:
  using Payload = std::variant<FunctionData, LoopData, StmtData, ExprData>;

  GreenNode(Payload payload, std::vector<Green> children);
  GreenNode(const GreenNode &) = delete;
  GreenNode &operator=(const GreenNode &) = delete;

  NodeKind kind() const { return static_cast<NodeKind>(payload_.index()); }
  const std::vector<Green> &children() const { return children_; }
  std::uint64_t hash() const { return hash_; }
  const Payload &payload() const { return payload_; }

  const FunctionData &function() const;
  const LoopData &loop() const;
  const StmtData &stmt() const;
  const ExprData &expr() const;

  bool is_expr() const { return kind() == NodeKind::Expr; }
  bool is_loop() const { return kind() == NodeKind::Loop; }
  bool is_stmt() const { return kind() == NodeKind::Stmt; }

  /// Number of leading children that are not body items.
  std::size_t header_size() const;
  std::span<const Green> body() const;
  std::span<const Green> header() const;

  // Loop helpers (for-style only).
  const Green &lower() const { return children_[0]; }
  const Green &upper() const { return children_[1]; }
  const Green &step_expr() const { return children_[2]; }
  // Stmt helpers.
  const Green &predicate() const { return children_[0]; }
  const Green &value() const { return children_.back(); }
  std::span<const Green> subscripts() const;
  std::span<const Green> call_args() const;

  /// Total number of green nodes ever constructed in this process.
  static std::uint64_t constructed() { return constructed_.load(); }

private:
  Payload payload_;
  std::vector<Green> children_;
  std::uint64_t hash_;
  static std::atomic<std::uint64_t> constructed_;
};

bool payload_equal(const GreenNode &a, const GreenNode &b);
bool structural_equal(const Green &a, const Green &b);

/// Boolean guard of a statement node.
struct Predicate {
  Green expr;
  bool trivially_true = false;
};

/// Node factory for one optimization session. Expression nodes are
/// hash-consed: building the same pure expression twice yields one node.
class Builder {
public:
  Green int_lit(std::int64_t v);
  Green float_lit(double v);
  Green var(const std::string &name);
  Green load(const std::string &array, std::vector<Green> subs);
  Green array_ref(const std::string &array);
  Green call(const std::string &fn, std::vector<Green> args);
  Green unary(Op op, Green a);
  Green binary(Op op, Green a, Green b);
  Green expr(ExprData data, std::vector<Green> operands);

  // Folding constructors for synthesized index arithmetic.
  Green add(Green a, Green b);
  Green sub(Green a, Green b);
  Green mul(Green a, Green b);
  Green div(Green a, Green b);
  Green logical_and(Green a, Green b);
  Green logical_not(Green a);

  /// The shared always-true predicate.
  Green true_pred();

  Green loop(LoopData data, std::vector<Green> children);
  Green stmt(StmtData data, std::vector<Green> children);
  Green function(FunctionData data, std::vector<Green> body);

  /// Same payload, new children. Expressions go through hash-consing.
  Green with_children(const Green &n, std::vector<Green> children);
  Green with_loop(const Green &n, LoopData data);
  Green with_stmt(const Green &n, StmtData data);
  Green with_function(const Green &n, FunctionData data);

  Green from_ast(const mir::Expr &e);

  std::size_t interned() const { return interned_count_; }

private:
  std::unordered_map<std::uint64_t, std::vector<Green>> exprs_;
  std::size_t interned_count_ = 0;
};

bool is_true_lit(const Green &e);
bool is_false_lit(const Green &e);
Predicate predicate_of(const GreenNode &stmt);

mir::Expr to_ast(const Green &e);

/// Parent-aware facade over a green node.
class RedNode {
public:
  static RedNode root(Green g);

  const Green &green() const { return green_; }
  const GreenNode *operator->() const { return green_.get(); }
  std::optional<RedNode> parent() const;
  std::size_t index() const { return index_; }
  std::size_t depth() const;
  RedNode child(std::size_t i) const;
  /// Child indices from the root down to this node.
  std::vector<std::size_t> path() const;

private:
  RedNode(Green g, std::shared_ptr<const RedNode> parent, std::size_t index)
      : green_(std::move(g)), parent_(std::move(parent)), index_(index) {}

  Green green_;
  std::shared_ptr<const RedNode> parent_;
  std::size_t index_ = 0;
};

RedNode red_root(const Green &g);
RedNode red_child(const RedNode &r, std::size_t i);
std::optional<RedNode> red_parent(const RedNode &r);

class RewriteError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Replaces target's green node under root. Only nodes on the target-to-root
/// path are reallocated; the old root is left untouched.
Green rewrite(Builder &b, const Green &root, const RedNode &target,
              const Green &replacement);

/// Replaces the body item at target with zero or more items.
Green splice(Builder &b, const Green &root, const RedNode &target,
             std::span<const Green> replacements);

/// Distinct nodes reachable from root.
std::vector<const GreenNode *> reachable(const Green &root);
std::size_t node_count(const Green &root);

/// Pre-order walk over loops and statements; fn(red) returns false to skip
/// the node's children.
template <typename F> void walk_items(const RedNode &r, F &&fn) {
  if (!fn(r))
    return;
  const GreenNode &g = *r.green();
  for (std::size_t i = g.header_size(); i < g.children().size(); ++i)
    walk_items(r.child(i), fn);
}

std::optional<RedNode> find_loop(const Green &root, const std::string &label);

/// Indented text rendering for diagnostics.
std::string to_text(const Green &root);

/// JSON dump: {"nodes":[{id,kind,payload,children}],"roots":[ids]}. Shared
/// nodes appear once; ids are stable within one dump.
std::string dag_to_json(std::span<const Green> roots);

} // namespace loopdag
