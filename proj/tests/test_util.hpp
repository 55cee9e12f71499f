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


// Shared helpers for the test binaries.

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "loopdag/interp.hpp"
#include "loopdag/mir.hpp"

namespace loopdag::testing {

inline std::string corpus_dir() { return LOOPDAG_CORPUS_DIR; }

inline std::string read_file(const std::string &path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string corpus_text(const std::string &name) {
  return read_file(corpus_dir() + "/" + name);
}

inline mir::Program corpus_program(const std::string &name) {
  return mir::parse(corpus_text(name));
}

/// Sorted file names of the .mir corpus.
inline std::vector<std::string> corpus_files() {
  std::vector<std::string> out;
  for (const auto &e : std::filesystem::directory_iterator(corpus_dir()))
    if (e.path().extension() == ".mir")
      out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

/// Default environment of a corpus program from its `// params:` line.
inline interp::Env corpus_env(const std::string &name,
                              bool alias_all = false) {
  std::string text = corpus_text(name);
  mir::Program p = mir::parse(text);
  return interp::default_env(p.functions[0], interp::header_params(text),
                             alias_all);
}

/// Largest iteration count of any loop in a traced run.
inline std::int64_t max_trip(const std::vector<interp::AccessRecord> &trace) {
  std::int64_t m = 0;
  for (const auto &r : trace)
    for (std::int64_t x : r.iters)
      m = std::max(m, x + 1);
  return m;
}

} // namespace loopdag::testing
