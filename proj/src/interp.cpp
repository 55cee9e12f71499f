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


#include "loopdag/interp.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

namespace loopdag::interp {

using mir::Expr;
using mir::Op;
using mir::Stmt;
using mir::StmtKind;

void Buffer::resize(std::size_t n) {
  if (type == ScalarType::I64)
    ints.assign(n, 0);
  else
    floats.assign(n, 0.0);
}

Trap::Trap(const std::string &msg, int stmt, std::vector<std::int64_t> iters)
    : std::runtime_error(msg), stmt_(stmt), iters_(std::move(iters)) {}

namespace {

std::int64_t wrap(std::uint64_t v) { return static_cast<std::int64_t>(v); }

std::int64_t product(const std::vector<std::int64_t> &v) {
  std::int64_t p = 1;
  for (std::int64_t x : v)
    p *= x;
  return p;
}

struct Frame {
  const mir::Function *fn = nullptr;
  std::map<std::string, Value> scalars;
  std::map<std::string, Binding> arrays;
  std::map<std::string, ScalarType> types;
  std::map<std::string, std::string> top_names; // callee array -> entry array
  std::set<std::string> parallel_labels;
  bool parallel_next = false; // argless parallel pragma seen

  const std::string &top_name(const std::string &a) const {
    auto it = top_names.find(a);
    return it == top_names.end() ? a : it->second;
  }
};

class Machine {
public:
  Machine(const mir::Program &p, Env &env, const RunOptions &opts,
          RunResult &out)
      : prog_(p), env_(env), opts_(opts), out_(out) {
    std::size_t idx = 0;
    for (const auto &[name, _] : env_.buffers)
      buffer_index_[name] = idx++;
  }

  void call_entry(const mir::Function &f) {
    Frame fr;
    fr.fn = &f;
    fr.types = mir::scalar_types(f);
    for (const mir::Param &p : f.params) {
      if (p.type.is_array()) {
        auto it = env_.bindings.find(p.name);
        if (it == env_.bindings.end())
          throw std::invalid_argument("array parameter '" + p.name +
                                      "' is not bound");
        fr.arrays[p.name] = it->second;
        check_binding(p.name, fr.arrays[p.name], p.type.elem);
      } else {
        auto it = env_.scalars.find(p.name);
        if (it == env_.scalars.end())
          throw std::invalid_argument("scalar parameter '" + p.name +
                                      "' is not bound");
        fr.scalars[p.name] = coerce(it->second, p.type.elem);
      }
    }
    top_ = true;
    execute(fr);
  }

private:
  void check_binding(const std::string &name, const Binding &b,
                     ScalarType elem) {
    auto it = env_.buffers.find(b.buffer);
    if (it == env_.buffers.end())
      throw std::invalid_argument("array '" + name + "' bound to unknown buffer '" +
                                  b.buffer + "'");
    if (it->second.type != elem)
      throw std::invalid_argument("array '" + name +
                                  "' bound to a buffer of another type");
    if (b.offset < 0 || b.offset + product(b.extents) >
                            static_cast<std::int64_t>(it->second.size()))
      throw std::invalid_argument("array '" + name +
                                  "' does not fit in its buffer");
  }

  static Value coerce(Value v, ScalarType t) {
    if (t == ScalarType::F64 && !v.is_float)
      return Value::of_float(static_cast<double>(v.i));
    return v;
  }

  void execute(Frame &fr) {
    std::vector<std::string> local_buffers;
    for (const Stmt &s : fr.fn->body) {
      if (s.kind != StmtKind::Local)
        continue;
      Binding b;
      b.buffer = "local." + std::to_string(depth_) + "." + s.name;
      for (const Expr &e : s.local_type.extents)
        b.extents.push_back(eval(fr, e).i);
      Buffer buf;
      buf.type = s.local_type.elem;
      buf.resize(static_cast<std::size_t>(std::max<std::int64_t>(0, product(b.extents))));
      env_.buffers[b.buffer] = std::move(buf);
      buffer_index_[b.buffer] = 1000000 + buffer_index_.size();
      fr.arrays[s.name] = b;
      if (depth_ > 0)
        fr.top_names[s.name] = ""; // private to this call, never traced
      local_buffers.push_back(b.buffer);
    }
    if (opts_.reverse_parallel)
      collect_parallel(fr, fr.fn->body);
    block(fr, fr.fn->body);
    for (const std::string &b : local_buffers) {
      env_.buffers.erase(b);
      buffer_index_.erase(b);
    }
  }

  [[noreturn]] void trap(const std::string &msg) {
    throw Trap("trap at statement " + std::to_string(cur_stmt_) + ": " + msg,
               cur_stmt_, iters_);
  }

  void tick() {
    if (++steps_ > opts_.step_limit)
      throw StepLimitExceeded("step limit of " +
                              std::to_string(opts_.step_limit) + " exceeded");
  }

  static void collect_parallel(Frame &fr, const std::vector<Stmt> &body) {
    for (const Stmt &s : body) {
      if (s.kind == StmtKind::Pragma && s.directive.name == "parallel")
        for (const std::string &l : s.directive.labels())
          fr.parallel_labels.insert(l);
      collect_parallel(fr, s.body);
      collect_parallel(fr, s.else_body);
    }
  }

  void block(Frame &fr, const std::vector<Stmt> &body) {
    for (const Stmt &s : body)
      stmt(fr, s);
  }

  bool reversed_schedule(Frame &fr, const Stmt &s) {
    bool next = fr.parallel_next;
    fr.parallel_next = false;
    if (!opts_.reverse_parallel)
      return false;
    return next || (!s.label.empty() && fr.parallel_labels.count(s.label));
  }

  void reversed_for(Frame &fr, const Stmt &s) {
    std::int64_t lo = eval(fr, s.lower).i;
    std::int64_t hi = eval(fr, s.upper).i;
    std::int64_t step = eval(fr, s.step).i;
    std::int64_t n = 0;
    if (step > 0 && hi > lo)
      n = (hi - lo + step - 1) / step;
    loops_.push_back(s.id);
    iters_.push_back(0);
    for (std::int64_t t = n - 1; t >= 0; --t) {
      enter(s);
      tick();
      fr.scalars[s.name] = Value::of_int(lo + t * step);
      block(fr, s.body);
      ++iters_.back();
    }
    fr.scalars[s.name] = Value::of_int(lo + n * step);
    loops_.pop_back();
    iters_.pop_back();
  }

  void enter(const Stmt &s) {
    if (top_) {
      cur_stmt_ = s.id;
      cur_instance_ = ++instances_[s.id];
    }
  }

  void stmt(Frame &fr, const Stmt &s) {
    switch (s.kind) {
    case StmtKind::Pragma:
      if (s.directive.name == "parallel" && s.directive.args.empty())
        fr.parallel_next = true;
      return;
    case StmtKind::Local:
      return;
    case StmtKind::Assign: {
      enter(s);
      tick();
      count();
      Value v = eval(fr, s.value);
      auto t = fr.types.find(s.name);
      if (t != fr.types.end())
        v = coerce(v, t->second);
      fr.scalars[s.name] = v;
      return;
    }
    case StmtKind::Store: {
      enter(s);
      tick();
      count();
      Cell at = address(fr, s.name, s.subs);
      Value v = eval(fr, s.value);
      if (s.update)
        v = arith(Op::Add, load_cell(fr.top_name(s.name), at), v);
      store_cell(fr.top_name(s.name), at, v);
      return;
    }
    case StmtKind::Call: {
      enter(s);
      tick();
      count();
      call(fr, s);
      return;
    }
    case StmtKind::If: {
      enter(s);
      if (eval(fr, s.cond).truthy())
        block(fr, s.body);
      else
        block(fr, s.else_body);
      return;
    }
    case StmtKind::While: {
      fr.parallel_next = false;
      loops_.push_back(s.id);
      iters_.push_back(0);
      for (;;) {
        enter(s);
        tick();
        if (!eval(fr, s.cond).truthy())
          break;
        block(fr, s.body);
        ++iters_.back();
      }
      loops_.pop_back();
      iters_.pop_back();
      return;
    }
    case StmtKind::For: {
      enter(s);
      if (reversed_schedule(fr, s)) {
        reversed_for(fr, s);
        return;
      }
      fr.scalars[s.name] = Value::of_int(eval(fr, s.lower).i);
      loops_.push_back(s.id);
      iters_.push_back(0);
      for (;;) {
        enter(s);
        tick();
        Value hi = eval(fr, s.upper);
        if (!(fr.scalars[s.name].i < hi.i))
          break;
        block(fr, s.body);
        ++iters_.back();
        enter(s);
        std::int64_t step = eval(fr, s.step).i;
        fr.scalars[s.name] = Value::of_int(
            wrap(static_cast<std::uint64_t>(fr.scalars[s.name].i) +
                 static_cast<std::uint64_t>(step)));
      }
      loops_.pop_back();
      iters_.pop_back();
      return;
    }
    }
  }

  void count() {
    if (top_)
      ++out_.statements;
  }

  struct Cell {
    Buffer *buf;
    std::int64_t cell;
    std::size_t index;
  };

  Cell address(Frame &fr, const std::string &array,
               const std::vector<Expr> &subs) {
    auto it = fr.arrays.find(array);
    if (it == fr.arrays.end())
      trap("unknown array '" + array + "'");
    const Binding &b = it->second;
    if (subs.size() != b.extents.size())
      trap("rank mismatch on '" + array + "'");
    std::int64_t lin = 0;
    for (std::size_t d = 0; d < subs.size(); ++d) {
      std::int64_t x = eval(fr, subs[d]).i;
      if (x < 0 || x >= b.extents[d])
        trap("index " + std::to_string(x) + " out of bounds for '" + array +
             "' dimension " + std::to_string(d));
      lin = lin * b.extents[d] + x;
    }
    return {&env_.buffers.at(b.buffer), b.offset + lin,
            buffer_index_.at(b.buffer)};
  }

  void record(const std::string &array, const Cell &c, bool write) {
    if (!opts_.trace || array.empty())
      return;
    AccessRecord r;
    r.stmt = cur_stmt_;
    r.instance = cur_instance_;
    r.loops = loops_;
    r.iters = iters_;
    r.array = array;
    r.buffer = c.index;
    r.cell = c.cell;
    r.write = write;
    out_.trace.push_back(std::move(r));
  }

  Value load_cell(const std::string &array, const Cell &at) {
    record(array, at, false);
    auto c = static_cast<std::size_t>(at.cell);
    const Buffer *buf = at.buf;
    return buf->type == ScalarType::I64 ? Value::of_int(buf->ints[c])
                                        : Value::of_float(buf->floats[c]);
  }

  void store_cell(const std::string &array, const Cell &at, Value v) {
    record(array, at, true);
    auto c = static_cast<std::size_t>(at.cell);
    Buffer *buf = at.buf;
    if (buf->type == ScalarType::I64)
      buf->ints[c] = v.is_float ? static_cast<std::int64_t>(v.f) : v.i;
    else
      buf->floats[c] = v.as_float();
  }

  void call(Frame &fr, const Stmt &s) {
    if (s.name == "gemm") {
      gemm(fr, s);
      return;
    }
    const mir::Function *callee = prog_.find(s.name);
    if (!callee)
      trap("unknown function '" + s.name + "'");
    Frame cf;
    cf.fn = callee;
    cf.types = mir::scalar_types(*callee);
    for (std::size_t i = 0; i < callee->params.size(); ++i) {
      const mir::Param &p = callee->params[i];
      const Expr &a = s.subs[i];
      if (p.type.is_array()) {
        Binding b = fr.arrays.at(a.name);
        b.extents.clear();
        for (const Expr &e : p.type.extents)
          b.extents.push_back(eval(cf, e).i);
        std::int64_t cap = product(fr.arrays.at(a.name).extents);
        if (product(b.extents) > cap)
          trap("argument '" + a.name + "' is smaller than parameter '" +
               p.name + "'");
        cf.arrays[p.name] = b;
        cf.top_names[p.name] = fr.top_name(a.name);
      } else {
        cf.scalars[p.name] = coerce(eval(fr, a), p.type.elem);
      }
    }
    bool was_top = top_;
    top_ = false;
    ++depth_;
    auto saved_loops = loops_;
    auto saved_iters = iters_;
    execute(cf);
    loops_ = std::move(saved_loops);
    iters_ = std::move(saved_iters);
    --depth_;
    top_ = was_top;
  }

  void gemm(Frame &fr, const Stmt &s) {
    auto arr = [&](std::size_t i) -> const std::string & {
      return s.subs[i].name;
    };
    std::int64_t ni = eval(fr, s.subs[3]).i, nj = eval(fr, s.subs[4]).i,
                 nk = eval(fr, s.subs[5]).i;
    for (std::int64_t i = 0; i < ni; ++i)
      for (std::int64_t j = 0; j < nj; ++j)
        for (std::int64_t k = 0; k < nk; ++k) {
          tick();
          Cell ct = cell2(fr, arr(0), i, j);
          Value c = load_cell(fr.top_name(arr(0)), ct);
          Value a = load_cell(fr.top_name(arr(1)), cell2(fr, arr(1), i, k));
          Value b = load_cell(fr.top_name(arr(2)), cell2(fr, arr(2), k, j));
          store_cell(fr.top_name(arr(0)), ct, arith(Op::Add, c, arith(Op::Mul, a, b)));
        }
  }

  Cell cell2(Frame &fr, const std::string &array,
                                          std::int64_t x, std::int64_t y) {
    std::vector<Expr> subs{Expr::int_lit(x), Expr::int_lit(y)};
    return address(fr, array, subs);
  }

  Value arith(Op op, Value a, Value b) {
    if (a.is_float || b.is_float) {
      double x = a.as_float(), y = b.as_float();
      switch (op) {
      case Op::Add:
        return Value::of_float(x + y);
      case Op::Sub:
        return Value::of_float(x - y);
      case Op::Mul:
        return Value::of_float(x * y);
      case Op::Div:
        if (y == 0.0)
          trap("division by zero");
        return Value::of_float(x / y);
      case Op::Mod:
        trap("'%' on f64");
      case Op::Lt:
        return Value::of_int(x < y);
      case Op::Le:
        return Value::of_int(x <= y);
      case Op::Gt:
        return Value::of_int(x > y);
      case Op::Ge:
        return Value::of_int(x >= y);
      case Op::Eq:
        return Value::of_int(x == y);
      case Op::Ne:
        return Value::of_int(x != y);
      default:
        break;
      }
      trap("bad float operator");
    }
    std::uint64_t x = static_cast<std::uint64_t>(a.i),
                  y = static_cast<std::uint64_t>(b.i);
    switch (op) {
    case Op::Add:
      return Value::of_int(wrap(x + y));
    case Op::Sub:
      return Value::of_int(wrap(x - y));
    case Op::Mul:
      return Value::of_int(wrap(x * y));
    case Op::Div:
      if (b.i == 0)
        trap("division by zero");
      if (a.i == INT64_MIN && b.i == -1)
        return Value::of_int(INT64_MIN);
      return Value::of_int(a.i / b.i);
    case Op::Mod:
      if (b.i == 0)
        trap("modulo by zero");
      if (b.i == -1)
        return Value::of_int(0);
      return Value::of_int(a.i % b.i);
    case Op::Lt:
      return Value::of_int(a.i < b.i);
    case Op::Le:
      return Value::of_int(a.i <= b.i);
    case Op::Gt:
      return Value::of_int(a.i > b.i);
    case Op::Ge:
      return Value::of_int(a.i >= b.i);
    case Op::Eq:
      return Value::of_int(a.i == b.i);
    case Op::Ne:
      return Value::of_int(a.i != b.i);
    default:
      break;
    }
    trap("bad integer operator");
  }

  Value eval(Frame &fr, const Expr &e) {
    switch (e.op) {
    case Op::IntLit:
      return Value::of_int(e.ival);
    case Op::FloatLit:
      return Value::of_float(e.fval);
    case Op::Var: {
      auto it = fr.scalars.find(e.name);
      if (it != fr.scalars.end())
        return it->second;
      auto t = fr.types.find(e.name);
      if (t != fr.types.end() && t->second == ScalarType::F64)
        return Value::of_float(0.0);
      return Value::of_int(0);
    }
    case Op::Load: {
      return load_cell(fr.top_name(e.name), address(fr, e.name, e.args));
    }
    case Op::ArrayRef:
      trap("array '" + e.name + "' used as a value");
    case Op::Call:
      return intrinsic(fr, e);
    case Op::Neg: {
      Value v = eval(fr, e.args[0]);
      if (v.is_float)
        return Value::of_float(-v.f);
      return Value::of_int(wrap(0 - static_cast<std::uint64_t>(v.i)));
    }
    case Op::Not:
      return Value::of_int(!eval(fr, e.args[0]).truthy());
    case Op::And:
      if (!eval(fr, e.args[0]).truthy())
        return Value::of_int(0);
      return Value::of_int(eval(fr, e.args[1]).truthy());
    case Op::Or:
      if (eval(fr, e.args[0]).truthy())
        return Value::of_int(1);
      return Value::of_int(eval(fr, e.args[1]).truthy());
    default: {
      Value a = eval(fr, e.args[0]);
      Value b = eval(fr, e.args[1]);
      return arith(e.op, a, b);
    }
    }
  }

  Value intrinsic(Frame &fr, const Expr &e) {
    const std::string &n = e.name;
    if (n == "base" || n == "extent") {
      auto it = fr.arrays.find(e.args[0].name);
      if (it == fr.arrays.end())
        trap("unknown array '" + e.args[0].name + "'");
      if (n == "extent")
        return Value::of_int(product(it->second.extents));
      auto bi = static_cast<std::int64_t>(buffer_index_.at(it->second.buffer));
      return Value::of_int((bi << 40) + it->second.offset);
    }
    std::vector<Value> a;
    for (const Expr &x : e.args)
      a.push_back(eval(fr, x));
    if (n == "sin")
      return Value::of_float(std::sin(a[0].as_float()));
    if (n == "cos")
      return Value::of_float(std::cos(a[0].as_float()));
    if (n == "select")
      return a[0].truthy() ? a[1] : a[2];
    if (n == "min" || n == "max") {
      bool take_first;
      if (a[0].is_float || a[1].is_float) {
        double x = a[0].as_float(), y = a[1].as_float();
        take_first = n == "min" ? !(y < x) : !(y > x);
        return Value::of_float(take_first ? x : y);
      }
      take_first = n == "min" ? a[0].i <= a[1].i : a[0].i >= a[1].i;
      return take_first ? a[0] : a[1];
    }
    trap("unknown intrinsic '" + n + "'");
  }

  const mir::Program &prog_;
  Env &env_;
  const RunOptions &opts_;
  RunResult &out_;
  std::map<std::string, std::size_t> buffer_index_;
  std::map<int, std::uint64_t> instances_;
  std::vector<int> loops_;
  std::vector<std::int64_t> iters_;
  std::uint64_t steps_ = 0;
  int cur_stmt_ = -1;
  std::uint64_t cur_instance_ = 0;
  bool top_ = true;
  int depth_ = 0;
};

} // namespace

RunResult run(const mir::Program &p, const std::string &function, Env env,
              const RunOptions &opts) {
  const mir::Function *f = p.find(function);
  if (!f)
    throw std::invalid_argument("no function named '" + function + "'");
  RunResult out;
  Machine m(p, env, opts, out);
  m.call_entry(*f);
  out.env = std::move(env);
  return out;
}

std::vector<DynamicEdge> dynamic_deps(const mir::Program &p,
                                      const std::string &function,
                                      const Env &env, const RunOptions &opts) {
  RunOptions o = opts;
  o.trace = true;
  RunResult r = run(p, function, env, o);
  std::map<std::pair<std::size_t, std::int64_t>, std::vector<std::size_t>>
      by_cell;
  for (std::size_t i = 0; i < r.trace.size(); ++i)
    by_cell[{r.trace[i].buffer, r.trace[i].cell}].push_back(i);
  std::set<DynamicEdge> edges;
  for (const auto &[_, idx] : by_cell) {
    for (std::size_t x = 0; x < idx.size(); ++x) {
      const AccessRecord &a = r.trace[idx[x]];
      for (std::size_t y = x + 1; y < idx.size(); ++y) {
        const AccessRecord &b = r.trace[idx[y]];
        if (!a.write && !b.write)
          continue;
        if (a.stmt == b.stmt && a.instance == b.instance)
          continue;
        DynamicEdge e;
        e.src = a.stmt;
        e.dst = b.stmt;
        e.kind = a.write && b.write ? "output" : a.write ? "flow" : "anti";
        e.array = a.array;
        std::size_t m = 0;
        while (m < a.loops.size() && m < b.loops.size() &&
               a.loops[m] == b.loops[m])
          ++m;
        e.loops.assign(a.loops.begin(), a.loops.begin() + static_cast<long>(m));
        for (std::size_t k = 0; k < m; ++k)
          e.distance.push_back(b.iters[k] - a.iters[k]);
        edges.insert(std::move(e));
      }
    }
  }
  return {edges.begin(), edges.end()};
}

// Environments --------------------------------------------------------------------

namespace {

std::vector<std::int64_t> extents_of(const mir::Type &t,
                                     const std::map<std::string, Value> &sc) {
  std::vector<std::int64_t> out;
  for (const Expr &e : t.extents) {
    if (e.op == Op::IntLit) {
      out.push_back(e.ival);
    } else {
      auto it = sc.find(e.name);
      if (it == sc.end())
        throw std::invalid_argument("extent '" + e.name + "' is unbound");
      out.push_back(it->second.i);
    }
  }
  return out;
}

void bind_missing(Env &env, const mir::Function &f, bool alias_all) {
  std::map<ScalarType, std::string> shared;
  for (const mir::Param &p : f.params) {
    if (!p.type.is_array() || env.bindings.count(p.name))
      continue;
    Binding b;
    b.extents = extents_of(p.type, env.scalars);
    std::size_t size =
        static_cast<std::size_t>(std::max<std::int64_t>(0, product(b.extents)));
    if (alias_all && !p.restrict_) {
      auto [it, fresh] =
          shared.emplace(p.type.elem, std::string("shared_") +
                                          (p.type.elem == ScalarType::I64
                                               ? "i64"
                                               : "f64"));
      b.buffer = it->second;
      Buffer &buf = env.buffers[b.buffer];
      buf.type = p.type.elem;
      if (fresh || buf.size() < size)
        buf.resize(std::max(size, buf.size()));
    } else {
      b.buffer = p.name;
      Buffer buf;
      buf.type = p.type.elem;
      buf.resize(size);
      env.buffers[b.buffer] = std::move(buf);
    }
    env.bindings[p.name] = b;
  }
}

} // namespace

Env default_env(const mir::Function &f,
                const std::map<std::string, Value> &scalars, bool alias_all) {
  Env env;
  for (const mir::Param &p : f.params) {
    if (p.type.is_array())
      continue;
    auto it = scalars.find(p.name);
    Value v = it != scalars.end() ? it->second
              : p.type.elem == ScalarType::I64 ? Value::of_int(8)
                                               : Value::of_float(1.0);
    if (p.type.elem == ScalarType::F64 && !v.is_float)
      v = Value::of_float(static_cast<double>(v.i));
    env.scalars[p.name] = v;
  }
  bind_missing(env, f, alias_all);
  return env;
}

Env env_from_json(const std::string &text, const mir::Function &f) {
  nlohmann::json j = nlohmann::json::parse(text);
  Env env;
  if (j.contains("scalars"))
    for (auto &[k, v] : j["scalars"].items())
      env.scalars[k] = v.is_number_float() ? Value::of_float(v.get<double>())
                                           : Value::of_int(v.get<std::int64_t>());
  for (const mir::Param &p : f.params) {
    if (p.type.is_array())
      continue;
    auto it = env.scalars.find(p.name);
    if (it == env.scalars.end())
      throw std::invalid_argument("scalar parameter '" + p.name +
                                  "' missing from env");
    if (p.type.elem == ScalarType::F64 && !it->second.is_float)
      it->second = Value::of_float(static_cast<double>(it->second.i));
  }
  std::map<std::string, std::int64_t> sizes;
  std::map<std::string, ScalarType> types;
  if (j.contains("bind")) {
    for (auto &[k, v] : j["bind"].items()) {
      const mir::Param *p = f.find_param(k);
      if (!p || !p->type.is_array())
        throw std::invalid_argument("'" + k + "' is not an array parameter");
      Binding b;
      b.buffer = v.at("buffer").get<std::string>();
      b.offset = v.value("offset", std::int64_t{0});
      if (v.contains("extents"))
        b.extents = v["extents"].get<std::vector<std::int64_t>>();
      else
        b.extents = extents_of(p->type, env.scalars);
      sizes[b.buffer] = std::max(sizes[b.buffer], b.offset + product(b.extents));
      auto [it, fresh] = types.emplace(b.buffer, p->type.elem);
      if (!fresh && it->second != p->type.elem)
        throw std::invalid_argument("buffer '" + b.buffer +
                                    "' bound with two element types");
      env.bindings[k] = b;
    }
  }
  for (const auto &[name, size] : sizes) {
    Buffer buf;
    buf.type = types[name];
    buf.resize(static_cast<std::size_t>(size));
    env.buffers[name] = std::move(buf);
  }
  bind_missing(env, f, false);
  if (j.contains("init")) {
    for (auto &[k, v] : j["init"].items()) {
      auto it = env.buffers.find(k);
      if (it == env.buffers.end())
        throw std::invalid_argument("init names unknown buffer '" + k + "'");
      Buffer &buf = it->second;
      if (v.is_string() && v.get<std::string>() == "zero") {
        buf.resize(buf.size());
      } else if (v.is_string() && v.get<std::string>() == "iota") {
        for (std::size_t i = 0; i < buf.size(); ++i) {
          if (buf.type == ScalarType::I64)
            buf.ints[i] = static_cast<std::int64_t>(i);
          else
            buf.floats[i] = static_cast<double>(i);
        }
      } else if (v.is_object() && v.contains("seed")) {
        Env one;
        one.buffers[k] = buf;
        randomize(one, v["seed"].get<std::uint64_t>());
        buf = one.buffers[k];
      } else {
        throw std::invalid_argument("bad init for buffer '" + k + "'");
      }
    }
  }
  return env;
}

void randomize(Env &env, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> real(-1.0, 1.0);
  for (auto &[_, buf] : env.buffers) {
    if (buf.type == ScalarType::I64)
      for (auto &x : buf.ints)
        x = static_cast<std::int64_t>(rng() % 201) - 100;
    else
      for (auto &x : buf.floats)
        x = real(rng);
  }
}

std::map<std::string, Value> header_params(const std::string &source) {
  std::map<std::string, Value> out;
  static const std::regex line(R"(//\s*params:\s*(.*))");
  static const std::regex item(R"(([A-Za-z_]\w*)\s*=\s*(-?[0-9.eE+-]+))");
  std::smatch m;
  if (!std::regex_search(source, m, line))
    return out;
  std::string rest = m[1];
  rest = rest.substr(0, rest.find('\n'));
  for (std::sregex_iterator it(rest.begin(), rest.end(), item), end;
       it != end; ++it) {
    std::string v = (*it)[2];
    if (v.find_first_of(".eE") != std::string::npos)
      out[(*it)[1]] = Value::of_float(std::stod(v));
    else
      out[(*it)[1]] = Value::of_int(std::stoll(v));
  }
  return out;
}

// Differential testing --------------------------------------------------------------

std::optional<std::string> compare_envs(const Env &a, const Env &b,
                                        bool reassoc, double tolerance) {
  for (const auto &[name, ba] : a.buffers) {
    auto it = b.buffers.find(name);
    if (it == b.buffers.end())
      return "buffer '" + name + "' missing";
    const Buffer &bb = it->second;
    if (ba.type != bb.type || ba.size() != bb.size())
      return "buffer '" + name + "' differs in shape";
    for (std::size_t i = 0; i < ba.size(); ++i) {
      if (ba.type == ScalarType::I64) {
        if (ba.ints[i] != bb.ints[i])
          return name + "[" + std::to_string(i) + "]: " +
                 std::to_string(ba.ints[i]) + " vs " + std::to_string(bb.ints[i]);
        continue;
      }
      double x = ba.floats[i], y = bb.floats[i];
      bool same;
      if (reassoc)
        same = x == y || std::fabs(x - y) <=
                             tolerance * std::max(std::fabs(x), std::fabs(y));
      else
        same = std::memcmp(&x, &y, sizeof x) == 0;
      if (!same) {
        std::ostringstream os;
        os.precision(17);
        os << name << "[" << i << "]: " << x << " vs " << y;
        return os.str();
      }
    }
  }
  return std::nullopt;
}

DiffVerdict diff(const mir::Program &pa, const std::string &fa,
                 const mir::Program &pb, const std::string &fb,
                 const Env &tmpl, const DiffOptions &opts) {
  DiffVerdict v;
  RunOptions run_opts = opts.run;
  if (opts.permute_parallel)
    run_opts.reverse_parallel = true;
  for (int s = 0; s < opts.seeds; ++s) {
    Env env = tmpl;
    randomize(env, static_cast<std::uint64_t>(s) + 1);
    ++v.seeds_run;
    std::string prefix = "seed " + std::to_string(s + 1) + ": ";
    RunResult ra, rb;
    std::string ea, eb;
    try {
      ra = run(pa, fa, env, run_opts);
    } catch (const std::exception &e) {
      ea = e.what();
    }
    try {
      rb = run(pb, fb, env, run_opts);
    } catch (const std::exception &e) {
      eb = e.what();
    }
    if (!ea.empty() || !eb.empty()) {
      v.equal = false;
      v.divergence = prefix + (ea.empty() ? "" : "first run: " + ea) +
                     (!ea.empty() && !eb.empty() ? "; " : "") +
                     (eb.empty() ? "" : "second run: " + eb);
      return v;
    }
    if (auto d = compare_envs(ra.env, rb.env, opts.reassoc, opts.tolerance)) {
      v.equal = false;
      v.divergence = prefix + *d;
      return v;
    }
  }
  return v;
}

} // namespace loopdag::interp
