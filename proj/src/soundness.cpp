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


#include "loopdag/soundness.hpp"

#include <map>
#include <sstream>

namespace loopdag {

namespace {

void parents(const std::vector<mir::Stmt> &body, int parent,
             std::map<int, int> &out) {
  for (const mir::Stmt &s : body) {
    out[s.id] = parent;
    parents(s.body, s.id, out);
    parents(s.else_body, s.id, out);
  }
}

bool covers(const std::map<int, int> &parent, int origin, int ast) {
  for (int cur = origin; cur >= 0;) {
    if (cur == ast)
      return true;
    auto it = parent.find(cur);
    cur = it == parent.end() ? -1 : it->second;
  }
  return false;
}

bool entry_matches(Dir d, const std::optional<std::int64_t> &dist,
                   std::int64_t actual) {
  if (dist && *dist != actual)
    return false;
  switch (d) {
  case Dir::Any:
    return true;
  case Dir::Lt:
    return actual > 0;
  case Dir::Eq:
    return actual == 0;
  case Dir::Gt:
    return actual < 0;
  }
  return false;
}

std::string describe_static(const DepGraph &g, const DependenceEdge &e) {
  std::ostringstream os;
  os << to_string(e.kind) << " " << e.name << " S" << e.src << "(origin "
     << g.stmts[static_cast<std::size_t>(e.src)].node->stmt().origin
     << ") -> S" << e.dst << " (";
  for (std::size_t i = 0; i < e.vector.size(); ++i) {
    os << (i ? "," : "") << static_cast<char>(e.vector[i]);
    if (e.distance[i])
      os << *e.distance[i];
  }
  os << ")";
  return os.str();
}

} // namespace

std::string describe(const interp::DynamicEdge &e) {
  std::ostringstream os;
  os << e.kind << " " << e.array << " " << e.src << " -> " << e.dst << " (";
  for (std::size_t i = 0; i < e.distance.size(); ++i)
    os << (i ? "," : "") << e.distance[i];
  os << ")";
  return os.str();
}

SoundnessReport check_soundness(const mir::Function &f, const DepGraph &g,
                                const std::vector<interp::DynamicEdge> &dyn) {
  std::map<int, int> parent;
  parents(f.body, -1, parent);
  SoundnessReport r;
  r.dynamic_edges = dyn.size();
  std::vector<bool> observed(g.edges.size(), false);
  for (const interp::DynamicEdge &d : dyn) {
    bool found = false;
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
      const DependenceEdge &e = g.edges[k];
      if (!e.is_memory() && !(e.kind == DepKind::Output && e.name == "<opaque>"))
        continue;
      if (to_string(e.kind) != d.kind && e.name != "<opaque>")
        continue;
      if (e.name != d.array && e.name != "<opaque>")
        continue;
      int so = g.stmts[static_cast<std::size_t>(e.src)].node->stmt().origin;
      int dsto = g.stmts[static_cast<std::size_t>(e.dst)].node->stmt().origin;
      if (!covers(parent, so, d.src) || !covers(parent, dsto, d.dst))
        continue;
      std::size_t n = std::min(e.loops.size(), d.loops.size());
      bool ok = true;
      for (std::size_t p = 0; p < n && ok; ++p) {
        int origin =
            g.loops[static_cast<std::size_t>(e.loops[p])].node->loop().origin;
        ok = origin == d.loops[p] &&
             entry_matches(e.vector[p], e.distance[p], d.distance[p]);
      }
      if (!ok)
        continue;
      found = true;
      if (e.vector.size() == d.distance.size())
        observed[k] = true;
    }
    if (!found) {
      r.sound = false;
      r.missing.push_back(describe(d));
    }
  }
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const DependenceEdge &e = g.edges[k];
    if (!e.is_memory() || e.name == "<opaque>" || observed[k])
      continue;
    bool known = true;
    for (const auto &x : e.distance)
      known = known && x.has_value();
    if (known && !e.vector.empty()) {
      r.exact = false;
      r.unobserved.push_back(describe_static(g, e));
    }
  }
  return r;
}

} // namespace loopdag
