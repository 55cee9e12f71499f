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

#include "loopdag/lsdag.hpp"

#include <cstring>
#include <functional>
#include <unordered_set>

#include <json.hpp>

namespace loopdag {

std::atomic<std::uint64_t> GreenNode::constructed_{0};

std::string_view to_string(NodeKind k) {
  switch (k) {
  case NodeKind::FunctionRoot:
    return "FunctionRoot";
  case NodeKind::Loop:
    return "Loop";
  case NodeKind::Stmt:
    return "Stmt";
  case NodeKind::Expr:
    return "Expr";
  }
  return "?";
}

namespace {

inline std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h * 0xff51afd7ed558ccdULL;
}

std::uint64_t hash_str(const std::string &s) {
  return std::hash<std::string>{}(s);
}

std::uint64_t hash_double(double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  return bits;
}

std::uint64_t hash_payload(const GreenNode::Payload &p) {
  std::uint64_t h = p.index() + 1;
  if (auto *e = std::get_if<ExprData>(&p)) {
    h = mix(h, static_cast<std::uint64_t>(e->op));
    h = mix(h, static_cast<std::uint64_t>(e->ival));
    h = mix(h, hash_double(e->fval));
    h = mix(h, hash_str(e->name));
  } else if (auto *l = std::get_if<LoopData>(&p)) {
    h = mix(h, hash_str(l->label));
    h = mix(h, hash_str(l->iv));
    h = mix(h, static_cast<std::uint64_t>(l->step));
    h = mix(h, (l->is_while ? 1u : 0u) | (l->canonical ? 2u : 0u) |
                   (l->parallel ? 4u : 0u) | (l->opaque ? 8u : 0u) |
                   (l->reversed ? 16u : 0u) | (l->empty ? 32u : 0u));
  } else if (auto *s = std::get_if<StmtData>(&p)) {
    h = mix(h, static_cast<std::uint64_t>(s->op));
    h = mix(h, hash_str(s->target));
    h = mix(h, (s->props.idempotent ? 1u : 0u) |
                   (s->props.speculatable ? 2u : 0u) |
                   (s->props.opaque ? 4u : 0u) | (s->parallel ? 8u : 0u));
  } else if (auto *f = std::get_if<FunctionData>(&p)) {
    h = mix(h, hash_str(f->name));
    h = mix(h, f->params.size());
    h = mix(h, f->locals.size());
    for (const LocalArray &l : f->locals)
      h = mix(h, hash_str(l.name));
  }
  return h;
}

bool same_type(const mir::Type &a, const mir::Type &b) {
  if (a.elem != b.elem || a.extents.size() != b.extents.size())
    return false;
  for (std::size_t i = 0; i < a.extents.size(); ++i)
    if (!mir::equal(a.extents[i], b.extents[i]))
      return false;
  return true;
}

} // namespace

const mir::Param *FunctionData::param(const std::string &n) const {
  for (const mir::Param &p : params)
    if (p.name == n)
      return &p;
  return nullptr;
}

const mir::Type *FunctionData::array_type(const std::string &n) const {
  if (const mir::Param *p = param(n))
    return p->type.is_array() ? &p->type : nullptr;
  for (const LocalArray &l : locals)
    if (l.name == n)
      return &l.type;
  return nullptr;
}

GreenNode::GreenNode(Payload payload, std::vector<Green> children)
    : payload_(std::move(payload)), children_(std::move(children)) {
  hash_ = hash_payload(payload_);
  for (const Green &c : children_)
    hash_ = mix(hash_, c->hash());
  constructed_.fetch_add(1, std::memory_order_relaxed);
}

const FunctionData &GreenNode::function() const {
  return std::get<FunctionData>(payload_);
}
const LoopData &GreenNode::loop() const { return std::get<LoopData>(payload_); }
const StmtData &GreenNode::stmt() const { return std::get<StmtData>(payload_); }
const ExprData &GreenNode::expr() const { return std::get<ExprData>(payload_); }

std::size_t GreenNode::header_size() const {
  switch (kind()) {
  case NodeKind::FunctionRoot:
    return 0;
  case NodeKind::Loop:
    return loop().is_while ? 1 : 3;
  default:
    return children_.size();
  }
}

std::span<const Green> GreenNode::body() const {
  return std::span<const Green>(children_).subspan(header_size());
}

std::span<const Green> GreenNode::header() const {
  return std::span<const Green>(children_).first(header_size());
}

std::span<const Green> GreenNode::subscripts() const {
  if (children_.size() < 2)
    return {};
  return std::span<const Green>(children_).subspan(1, children_.size() - 2);
}

std::span<const Green> GreenNode::call_args() const {
  return std::span<const Green>(children_).subspan(1);
}

bool payload_equal(const GreenNode &a, const GreenNode &b) {
  if (a.kind() != b.kind())
    return false;
  switch (a.kind()) {
  case NodeKind::Expr: {
    const ExprData &x = a.expr(), &y = b.expr();
    return x.op == y.op && x.ival == y.ival &&
           hash_double(x.fval) == hash_double(y.fval) && x.name == y.name;
  }
  case NodeKind::Loop: {
    const LoopData &x = a.loop(), &y = b.loop();
    return x.label == y.label && x.iv == y.iv && x.is_while == y.is_while &&
           x.canonical == y.canonical && x.step == y.step &&
           x.parallel == y.parallel && x.opaque == y.opaque &&
           x.reversed == y.reversed && x.empty == y.empty;
  }
  case NodeKind::Stmt: {
    const StmtData &x = a.stmt(), &y = b.stmt();
    return x.op == y.op && x.target == y.target &&
           x.props.idempotent == y.props.idempotent &&
           x.props.speculatable == y.props.speculatable &&
           x.props.opaque == y.props.opaque && x.parallel == y.parallel;
  }
  case NodeKind::FunctionRoot: {
    const FunctionData &x = a.function(), &y = b.function();
    if (x.name != y.name || x.params.size() != y.params.size() ||
        x.locals.size() != y.locals.size())
      return false;
    for (std::size_t i = 0; i < x.params.size(); ++i) {
      const mir::Param &p = x.params[i], &q = y.params[i];
      if (p.name != q.name || p.restrict_ != q.restrict_ ||
          p.opaque != q.opaque || !same_type(p.type, q.type))
        return false;
    }
    for (std::size_t i = 0; i < x.locals.size(); ++i)
      if (x.locals[i].name != y.locals[i].name ||
          !same_type(x.locals[i].type, y.locals[i].type))
        return false;
    return true;
  }
  }
  return false;
}

bool structural_equal(const Green &a, const Green &b) {
  if (a == b)
    return true;
  if (!a || !b || a->hash() != b->hash() || !payload_equal(*a, *b) ||
      a->children().size() != b->children().size())
    return false;
  for (std::size_t i = 0; i < a->children().size(); ++i)
    if (!structural_equal(a->children()[i], b->children()[i]))
      return false;
  return true;
}

// Builder --------------------------------------------------------------------

Green Builder::expr(ExprData data, std::vector<Green> operands) {
  GreenNode::Payload payload(std::move(data));
  std::uint64_t h = hash_payload(payload);
  for (const Green &c : operands)
    h = mix(h, c->hash());
  auto &bucket = exprs_[h];
  for (const Green &g : bucket) {
    if (g->children().size() != operands.size())
      continue;
    bool same = true;
    for (std::size_t i = 0; i < operands.size() && same; ++i)
      same = g->children()[i] == operands[i];
    if (!same)
      continue;
    const ExprData &x = g->expr(), &y = std::get<ExprData>(payload);
    if (x.op == y.op && x.ival == y.ival &&
        hash_double(x.fval) == hash_double(y.fval) && x.name == y.name)
      return g;
  }
  auto g = std::make_shared<const GreenNode>(std::move(payload),
                                             std::move(operands));
  bucket.push_back(g);
  ++interned_count_;
  return g;
}

Green Builder::int_lit(std::int64_t v) {
  ExprData d;
  d.op = Op::IntLit;
  d.ival = v;
  return expr(std::move(d), {});
}

Green Builder::float_lit(double v) {
  ExprData d;
  d.op = Op::FloatLit;
  d.fval = v;
  return expr(std::move(d), {});
}

Green Builder::var(const std::string &name) {
  ExprData d;
  d.op = Op::Var;
  d.name = name;
  return expr(std::move(d), {});
}

Green Builder::load(const std::string &array, std::vector<Green> subs) {
  ExprData d;
  d.op = Op::Load;
  d.name = array;
  return expr(std::move(d), std::move(subs));
}

Green Builder::array_ref(const std::string &array) {
  ExprData d;
  d.op = Op::ArrayRef;
  d.name = array;
  return expr(std::move(d), {});
}

Green Builder::call(const std::string &fn, std::vector<Green> args) {
  ExprData d;
  d.op = Op::Call;
  d.name = fn;
  return expr(std::move(d), std::move(args));
}

Green Builder::unary(Op op, Green a) {
  ExprData d;
  d.op = op;
  return expr(std::move(d), {std::move(a)});
}

Green Builder::binary(Op op, Green a, Green b) {
  ExprData d;
  d.op = op;
  return expr(std::move(d), {std::move(a), std::move(b)});
}

namespace {

std::optional<std::int64_t> int_value(const Green &e) {
  if (e->is_expr() && e->expr().op == Op::IntLit)
    return e->expr().ival;
  return std::nullopt;
}

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) +
                                   static_cast<std::uint64_t>(b));
}

std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) *
                                   static_cast<std::uint64_t>(b));
}

} // namespace

Green Builder::add(Green a, Green b) {
  auto x = int_value(a), y = int_value(b);
  if (x && y)
    return int_lit(wrap_add(*x, *y));
  if (x && !y)
    return add(b, a);
  if (y) {
    if (*y == 0)
      return a;
    const ExprData &ad = a->expr();
    if ((ad.op == Op::Add || ad.op == Op::Sub) && int_value(a->children()[1])) {
      std::int64_t c = *int_value(a->children()[1]);
      std::int64_t total = ad.op == Op::Add ? wrap_add(c, *y) : wrap_add(*y, -c);
      return add(a->children()[0], int_lit(total));
    }
    if (*y < 0 && *y != INT64_MIN)
      return binary(Op::Sub, a, int_lit(-*y));
  }
  return binary(Op::Add, a, b);
}

Green Builder::sub(Green a, Green b) {
  auto x = int_value(a), y = int_value(b);
  if (x && y)
    return int_lit(wrap_add(*x, -*y));
  if (a == b)
    return int_lit(0);
  if (y) {
    if (*y == 0)
      return a;
    return add(a, int_lit(-*y));
  }
  return binary(Op::Sub, a, b);
}

Green Builder::mul(Green a, Green b) {
  auto x = int_value(a), y = int_value(b);
  if (x && y)
    return int_lit(wrap_mul(*x, *y));
  if (x && *x == 1)
    return b;
  if (y && *y == 1)
    return a;
  return binary(Op::Mul, a, b);
}

Green Builder::div(Green a, Green b) {
  auto x = int_value(a), y = int_value(b);
  if (x && y && *y != 0 && !(*x == INT64_MIN && *y == -1))
    return int_lit(*x / *y);
  if (y && *y == 1)
    return a;
  return binary(Op::Div, a, b);
}

Green Builder::logical_and(Green a, Green b) {
  if (is_true_lit(a))
    return b;
  if (is_true_lit(b))
    return a;
  return binary(Op::And, a, b);
}

Green Builder::logical_not(Green a) {
  if (is_true_lit(a))
    return int_lit(0);
  if (is_false_lit(a))
    return true_pred();
  if (a->expr().op == Op::Not) {
    Op inner = a->children()[0]->expr().op;
    if (inner >= Op::Lt || inner == Op::Not)
      return a->children()[0];
  }
  return unary(Op::Not, a);
}

Green Builder::true_pred() { return int_lit(1); }

bool is_true_lit(const Green &e) {
  return e->is_expr() && e->expr().op == Op::IntLit && e->expr().ival == 1;
}

bool is_false_lit(const Green &e) {
  return e->is_expr() && e->expr().op == Op::IntLit && e->expr().ival == 0;
}

Predicate predicate_of(const GreenNode &stmt) {
  Predicate p;
  p.expr = stmt.predicate();
  p.trivially_true = is_true_lit(p.expr);
  return p;
}

Green Builder::loop(LoopData data, std::vector<Green> children) {
  return std::make_shared<const GreenNode>(std::move(data),
                                           std::move(children));
}

Green Builder::stmt(StmtData data, std::vector<Green> children) {
  return std::make_shared<const GreenNode>(std::move(data),
                                           std::move(children));
}

Green Builder::function(FunctionData data, std::vector<Green> body) {
  return std::make_shared<const GreenNode>(std::move(data), std::move(body));
}

Green Builder::with_children(const Green &n, std::vector<Green> children) {
  if (n->is_expr())
    return expr(n->expr(), std::move(children));
  return std::make_shared<const GreenNode>(n->payload(), std::move(children));
}

Green Builder::with_loop(const Green &n, LoopData data) {
  return std::make_shared<const GreenNode>(std::move(data), n->children());
}

Green Builder::with_stmt(const Green &n, StmtData data) {
  return std::make_shared<const GreenNode>(std::move(data), n->children());
}

Green Builder::with_function(const Green &n, FunctionData data) {
  return std::make_shared<const GreenNode>(std::move(data), n->children());
}

Green Builder::from_ast(const mir::Expr &e) {
  std::vector<Green> ops;
  ops.reserve(e.args.size());
  for (const mir::Expr &a : e.args)
    ops.push_back(from_ast(a));
  ExprData d;
  d.op = e.op;
  d.ival = e.ival;
  d.fval = e.fval;
  d.name = e.name;
  return expr(std::move(d), std::move(ops));
}

mir::Expr to_ast(const Green &e) {
  mir::Expr out;
  const ExprData &d = e->expr();
  out.op = d.op;
  out.ival = d.ival;
  out.fval = d.fval;
  out.name = d.name;
  for (const Green &c : e->children())
    out.args.push_back(to_ast(c));
  return out;
}

// Red overlay -----------------------------------------------------------------

RedNode RedNode::root(Green g) { return RedNode(std::move(g), nullptr, 0); }

std::optional<RedNode> RedNode::parent() const {
  if (!parent_)
    return std::nullopt;
  return *parent_;
}

std::size_t RedNode::depth() const {
  std::size_t d = 0;
  for (const RedNode *r = this; r->parent_; r = r->parent_.get())
    ++d;
  return d;
}

RedNode RedNode::child(std::size_t i) const {
  if (i >= green_->children().size())
    throw std::out_of_range("red child index " + std::to_string(i) +
                            " out of range");
  return RedNode(green_->children()[i], std::make_shared<const RedNode>(*this),
                 i);
}

std::vector<std::size_t> RedNode::path() const {
  std::vector<std::size_t> out;
  for (const RedNode *r = this; r->parent_; r = r->parent_.get())
    out.push_back(r->index_);
  return {out.rbegin(), out.rend()};
}

RedNode red_root(const Green &g) { return RedNode::root(g); }
RedNode red_child(const RedNode &r, std::size_t i) { return r.child(i); }
std::optional<RedNode> red_parent(const RedNode &r) { return r.parent(); }

// Copy-on-write rewriting ------------------------------------------------------

namespace {

const GreenNode &top_of(const RedNode &r) {
  std::optional<RedNode> cur = r;
  while (auto p = cur->parent())
    cur = p;
  return *cur->green();
}

bool in_body_position(const RedNode &r) {
  auto p = r.parent();
  if (!p)
    return false;
  const GreenNode &g = *p->green();
  return (g.kind() == NodeKind::FunctionRoot || g.is_loop()) &&
         r.index() >= g.header_size();
}

} // namespace

Green rewrite(Builder &b, const Green &root, const RedNode &target,
              const Green &replacement) {
  if (&top_of(target) != root.get())
    throw RewriteError("rewrite target is not under the given root");
  auto parent = target.parent();
  if (!parent) {
    if (replacement->kind() != NodeKind::FunctionRoot)
      throw RewriteError("root can only be replaced by a function root");
    return replacement;
  }
  if (in_body_position(target)) {
    if (!replacement->is_loop() && !replacement->is_stmt())
      throw RewriteError("body items must be loops or statements");
  } else if (!replacement->is_expr()) {
    throw RewriteError("kind mismatch: expected an expression node");
  }
  Green cur = replacement;
  std::optional<RedNode> node = target;
  while (auto p = node->parent()) {
    std::vector<Green> kids = p->green()->children();
    kids[node->index()] = cur;
    cur = b.with_children(p->green(), std::move(kids));
    node = p;
  }
  return cur;
}

Green splice(Builder &b, const Green &root, const RedNode &target,
             std::span<const Green> replacements) {
  if (!in_body_position(target))
    throw RewriteError("splice target must be a body item");
  for (const Green &g : replacements)
    if (!g->is_loop() && !g->is_stmt())
      throw RewriteError("body items must be loops or statements");
  RedNode parent = *target.parent();
  std::vector<Green> kids;
  const auto &old = parent.green()->children();
  kids.insert(kids.end(), old.begin(), old.begin() + target.index());
  kids.insert(kids.end(), replacements.begin(), replacements.end());
  kids.insert(kids.end(), old.begin() + target.index() + 1, old.end());
  Green np = b.with_children(parent.green(), std::move(kids));
  if (!parent.parent()) {
    if (&top_of(parent) != root.get())
      throw RewriteError("rewrite target is not under the given root");
    return np;
  }
  return rewrite(b, root, parent, np);
}

std::vector<const GreenNode *> reachable(const Green &root) {
  std::vector<const GreenNode *> out;
  std::unordered_set<const GreenNode *> seen;
  std::vector<const GreenNode *> stack{root.get()};
  while (!stack.empty()) {
    const GreenNode *n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second)
      continue;
    out.push_back(n);
    for (auto it = n->children().rbegin(); it != n->children().rend(); ++it)
      stack.push_back(it->get());
  }
  return out;
}

std::size_t node_count(const Green &root) { return reachable(root).size(); }

std::optional<RedNode> find_loop(const Green &root, const std::string &label) {
  std::optional<RedNode> found;
  walk_items(red_root(root), [&](const RedNode &r) {
    if (found)
      return false;
    if (r->is_loop() && r->loop().label == label) {
      found = r;
      return false;
    }
    return true;
  });
  return found;
}

// Rendering ---------------------------------------------------------------------

namespace {

std::string stmt_text(const GreenNode &s) {
  const StmtData &d = s.stmt();
  std::string out;
  switch (d.op) {
  case StmtOp::Assign:
    out = d.target + " = " + mir::print(to_ast(s.value()));
    break;
  case StmtOp::Store:
  case StmtOp::Update:
    out = d.target;
    for (const Green &e : s.subscripts())
      out += "[" + mir::print(to_ast(e)) + "]";
    out += d.op == StmtOp::Update ? " += " : " = ";
    out += mir::print(to_ast(s.value()));
    break;
  case StmtOp::Call: {
    out = "call " + d.target + "(";
    auto args = s.call_args();
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i)
        out += ", ";
      out += mir::print(to_ast(args[i]));
    }
    out += ")";
    break;
  }
  }
  if (!is_true_lit(s.predicate()))
    out += "  if " + mir::print(to_ast(s.predicate()));
  if (d.props.opaque)
    out += "  [opaque]";
  return out;
}

void text_rec(const GreenNode &n, int depth, std::string &out) {
  std::string ind(static_cast<std::size_t>(depth) * 2, ' ');
  switch (n.kind()) {
  case NodeKind::FunctionRoot:
    out += ind + "Function " + n.function().name + "\n";
    break;
  case NodeKind::Loop: {
    const LoopData &l = n.loop();
    out += ind + "Loop";
    if (!l.label.empty())
      out += " " + l.label;
    if (l.is_while) {
      out += " while (" + mir::print(to_ast(n.children()[0])) + ")";
    } else {
      out += " for " + l.iv + " in [" + mir::print(to_ast(n.lower())) + ", " +
             mir::print(to_ast(n.upper())) + ") step " +
             mir::print(to_ast(n.step_expr()));
    }
    if (l.reversed)
      out += " reversed";
    if (l.parallel)
      out += " parallel";
    if (l.empty)
      out += " empty";
    if (!l.canonical && !l.is_while)
      out += " non-canonical";
    out += "\n";
    break;
  }
  case NodeKind::Stmt:
    out += ind + "Stmt " + stmt_text(n) + "\n";
    return;
  case NodeKind::Expr:
    out += ind + "Expr " + mir::print(to_ast(std::shared_ptr<const GreenNode>(
                               std::shared_ptr<const GreenNode>{}, &n))) +
           "\n";
    return;
  }
  for (const Green &c : n.body())
    text_rec(*c, depth + 1, out);
}

nlohmann::json payload_json(const GreenNode &n) {
  nlohmann::json j;
  switch (n.kind()) {
  case NodeKind::FunctionRoot: {
    j["name"] = n.function().name;
    nlohmann::json locals = nlohmann::json::array();
    for (const LocalArray &l : n.function().locals)
      locals.push_back(l.name);
    j["locals"] = locals;
    break;
  }
  case NodeKind::Loop: {
    const LoopData &l = n.loop();
    j["label"] = l.label;
    j["iv"] = l.iv;
    j["while"] = l.is_while;
    j["canonical"] = l.canonical;
    j["step"] = l.step;
    j["parallel"] = l.parallel;
    j["opaque"] = l.opaque;
    j["reversed"] = l.reversed;
    j["empty"] = l.empty;
    break;
  }
  case NodeKind::Stmt: {
    const StmtData &s = n.stmt();
    static const char *ops[] = {"assign", "store", "update", "call"};
    j["op"] = ops[static_cast<int>(s.op)];
    j["target"] = s.target;
    j["idempotent"] = s.props.idempotent;
    j["speculatable"] = s.props.speculatable;
    j["opaque"] = s.props.opaque;
    j["parallel"] = s.parallel;
    break;
  }
  case NodeKind::Expr: {
    const ExprData &e = n.expr();
    switch (e.op) {
    case Op::IntLit:
      j["op"] = "int";
      j["value"] = e.ival;
      break;
    case Op::FloatLit:
      j["op"] = "float";
      j["value"] = e.fval;
      break;
    case Op::Var:
      j["op"] = "var";
      j["name"] = e.name;
      break;
    case Op::Load:
      j["op"] = "load";
      j["name"] = e.name;
      break;
    case Op::ArrayRef:
      j["op"] = "array";
      j["name"] = e.name;
      break;
    case Op::Call:
      j["op"] = "call";
      j["name"] = e.name;
      break;
    case Op::Neg:
      j["op"] = "neg";
      break;
    default:
      j["op"] = std::string(mir::op_spelling(e.op));
      break;
    }
    break;
  }
  }
  return j;
}

} // namespace

std::string to_text(const Green &root) {
  std::string out;
  text_rec(*root, 0, out);
  return out;
}

std::string dag_to_json(std::span<const Green> roots) {
  std::unordered_map<const GreenNode *, std::size_t> ids;
  nlohmann::json nodes = nlohmann::json::array();
  std::function<std::size_t(const GreenNode *)> visit =
      [&](const GreenNode *n) -> std::size_t {
    auto it = ids.find(n);
    if (it != ids.end())
      return it->second;
    std::size_t id = ids.size();
    ids.emplace(n, id);
    nodes.push_back(nullptr);
    nlohmann::json j;
    j["id"] = id;
    j["kind"] = std::string(to_string(n->kind()));
    j["payload"] = payload_json(*n);
    nlohmann::json kids = nlohmann::json::array();
    for (const Green &c : n->children())
      kids.push_back(visit(c.get()));
    j["children"] = kids;
    nodes[id] = std::move(j);
    return id;
  };
  nlohmann::json root_ids = nlohmann::json::array();
  for (const Green &r : roots)
    root_ids.push_back(visit(r.get()));
  nlohmann::json out;
  out["nodes"] = std::move(nodes);
  out["roots"] = std::move(root_ids);
  return out.dump(2);
}

} // namespace loopdag
