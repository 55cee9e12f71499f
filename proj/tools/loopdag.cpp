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


// Command-line driver: parse, dag, deps, opt, run and diff.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "loopdag/analysis.hpp"
#include "loopdag/interp.hpp"
#include "loopdag/mir.hpp"
#include "loopdag/pipeline.hpp"
#include "loopdag/soundness.hpp"
#include "loopdag/xform.hpp"

namespace {

using namespace loopdag;

enum Exit { kOk = 0, kParse = 1, kIllegal = 2, kMismatch = 3, kIo = 4 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path);
  if (!out || !(out << text))
    throw IoError("cannot write '" + path + "'");
}

// Parses and validates; diagnostics go to stderr.
mir::Program load(const std::string &path) {
  mir::Program p = mir::parse(read_file(path));
  auto diags = mir::validate(p);
  if (!diags.empty()) {
    for (const mir::Diagnostic &d : diags)
      std::cerr << path << ":" << d.pos.line << ":" << d.pos.col << ": "
                << d.message << "\n";
    throw mir::ParseError(diags[0].pos, "validation failed");
  }
  return p;
}

const mir::Function &pick(const mir::Program &p, const std::string &name) {
  if (name.empty()) {
    if (p.functions.empty())
      throw std::invalid_argument("program has no functions");
    return p.functions[0];
  }
  const mir::Function *f = p.find(name);
  if (!f)
    throw std::invalid_argument("no function '" + name + "'");
  return *f;
}

std::string dump_env(const interp::Env &env) {
  nlohmann::ordered_json j;
  for (const auto &[name, buf] : env.buffers) {
    if (buf.type == ScalarType::I64)
      j[name] = buf.ints;
    else
      j[name] = buf.floats;
  }
  return j.dump(2);
}

pipeline::TripHints parse_hints(const std::vector<std::string> &hs) {
  pipeline::TripHints out;
  for (const std::string &h : hs) {
    auto eq = h.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--hint", "expected NAME=VALUE: " + h);
    out[h.substr(0, eq)] = std::stoll(h.substr(eq + 1));
  }
  return out;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Loop Structure DAG optimizer for Mini-IR"};
  app.require_subcommand(1);

  std::string file, file_b, env_path, out_path, report_path, directives,
      function, oracle, style = "branches";
  bool json = false, dump = false, strict = false, reassoc = false,
       explore = false, rematerialize = false;
  int seeds = 10, budget = 16;
  std::vector<std::string> hints;
  pipeline::CostConfig cost;

  auto *parse = app.add_subcommand("parse", "Validate and pretty-print");
  parse->add_option("FILE", file)->required();

  auto *dag = app.add_subcommand("dag", "Build and normalize the DAG");
  dag->add_option("FILE", file)->required();
  dag->add_flag("--json", json);

  auto *deps = app.add_subcommand("deps", "Static dependences");
  deps->add_option("FILE", file)->required();
  deps->add_flag("--json", json);
  deps->add_option("--oracle", oracle, "Env file for the dynamic check");
  deps->add_option("--function", function);

  auto *opt = app.add_subcommand("opt", "Transform, select and emit");
  opt->add_option("FILE", file)->required();
  auto *apply_opt = opt->add_option("--apply", directives, "D;D;...");
  auto *auto_opt = opt->add_flag("--auto", explore, "Greedy exploration");
  apply_opt->excludes(auto_opt);
  opt->add_option("--budget", budget)->check(CLI::PositiveNumber);
  opt->add_option("-o", out_path);
  opt->add_option("--report", report_path, "Cost report JSON output");
  opt->add_flag("--strict", strict);
  opt->add_flag("--reassoc", reassoc);
  opt->add_flag("--rematerialize", rematerialize);
  opt->add_option("--predicate-style", style)
      ->check(CLI::IsMember({"branches", "flags"}));
  opt->add_option("--function", function);
  opt->add_option("--hint", hints, "Trip-count hint NAME=VALUE");
  opt->add_option("--stride-penalty", cost.stride_penalty);
  opt->add_option("--parallel-discount", cost.parallel_discount);
  opt->add_option("--check-overhead", cost.check_overhead);
  opt->add_option("--size-penalty", cost.size_penalty);
  opt->add_option("--default-trip", cost.default_trip);

  auto *run = app.add_subcommand("run", "Interpret");
  run->add_option("FILE", file)->required();
  run->add_option("--env", env_path)->required();
  run->add_flag("--dump", dump);
  run->add_option("--function", function);

  auto *diff = app.add_subcommand("diff", "Differential verdict");
  diff->add_option("A", file)->required();
  diff->add_option("B", file_b)->required();
  diff->add_option("--env", env_path)->required();
  diff->add_option("--seeds", seeds)->check(CLI::PositiveNumber);
  diff->add_flag("--reassoc", reassoc);
  diff->add_option("--function", function);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*parse) {
      std::cout << mir::print(load(file));
      return kOk;
    }
    if (*dag) {
      mir::Program p = load(file);
      Builder b;
      std::vector<Green> roots;
      for (const mir::Function &f : p.functions)
        roots.push_back(normalize(b, build_dag(b, f)));
      if (json) {
        std::cout << dag_to_json(roots) << "\n";
      } else {
        for (const Green &r : roots)
          std::cout << to_text(r);
      }
      return kOk;
    }
    if (*deps) {
      mir::Program p = load(file);
      const mir::Function &f = pick(p, function);
      Builder b;
      DepGraph g = analyze_deps(normalize(b, build_dag(b, f)));
      std::cout << (json ? g.to_json() + "\n" : g.to_text());
      if (oracle.empty())
        return kOk;
      interp::Env env = interp::env_from_json(read_file(oracle), f);
      auto dyn = interp::dynamic_deps(p, f.name, env);
      DepGraph raw = analyze_deps(build_dag(b, f));
      SoundnessReport r = check_soundness(f, raw, dyn);
      std::cout << (r.sound ? "SOUND" : "UNSOUND") << " (" << r.dynamic_edges
                << " dynamic edges)\n";
      for (const std::string &m : r.missing)
        std::cout << "  missing: " << m << "\n";
      return r.sound ? kOk : kMismatch;
    }
    if (*opt) {
      try {
        mir::parse_directives(directives);
      } catch (const mir::ParseError &e) {
        std::cerr << "--apply:" << e.what() << "\n";
        return kParse;
      }
      mir::Program p = load(file);
      pipeline::OptimizeOptions o;
      o.function = function;
      o.directives = directives;
      o.explore = explore;
      o.strict = strict;
      o.xform.reassoc = reassoc;
      o.search.budget = budget;
      o.search.hints = parse_hints(hints);
      o.search.cost = cost;
      o.lowering.style = style == "flags" ? pipeline::PredicateStyle::Flags
                                          : pipeline::PredicateStyle::Branches;
      o.lowering.rematerialize = rematerialize;
      pipeline::Optimized r = pipeline::optimize(p, o);
      for (const xform::Failure &f : r.failures) {
        std::cerr << "warning: " << mir::to_string(f.directive) << ": "
                  << f.message << "\n";
        for (const DependenceEdge &e : f.edges)
          std::cerr << "  edge " << e.src << " -> " << e.dst << " "
                    << to_string(e.kind) << " " << e.name << "\n";
      }
      for (const std::string &n : r.notes)
        std::cerr << "note: " << n << "\n";
      std::cerr << pipeline::report_text(r.candidates, r.selected);
      std::string src = mir::print(r.program);
      if (out_path.empty())
        std::cout << src;
      else
        write_file(out_path, src);
      if (!report_path.empty())
        write_file(report_path,
                   pipeline::report_json(r.candidates, r.selected) + "\n");
      return kOk;
    }
    if (*run) {
      mir::Program p = load(file);
      const mir::Function &f = pick(p, function);
      interp::Env env = interp::env_from_json(read_file(env_path), f);
      interp::RunResult r = interp::run(p, f.name, env);
      std::cout << "statements: " << r.statements << "\n";
      if (dump)
        std::cout << dump_env(r.env) << "\n";
      return kOk;
    }
    if (*diff) {
      mir::Program a = load(file), b = load(file_b);
      const mir::Function &fa = pick(a, function);
      const mir::Function &fb = pick(b, function.empty() ? "" : function);
      interp::Env env = interp::env_from_json(read_file(env_path), fa);
      interp::DiffOptions o;
      o.seeds = seeds;
      o.reassoc = reassoc;
      interp::DiffVerdict v = interp::diff(a, fa.name, b, fb.name, env, o);
      if (v.equal) {
        std::cout << "EQUAL (" << v.seeds_run << " seeds)\n";
        return kOk;
      }
      std::cout << "MISMATCH: " << v.divergence << "\n";
      return kMismatch;
    }
  } catch (const IoError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const mir::ParseError &e) {
    std::cerr << file << ":" << e.what() << "\n";
    return kParse;
  } catch (const xform::TransformError &e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const DependenceEdge &d : e.edges())
      std::cerr << "  edge " << d.src << " -> " << d.dst << " "
                << to_string(d.kind) << " " << d.name << "\n";
    return kIllegal;
  } catch (const interp::Trap &e) {
    std::cerr << "trap: " << e.what() << "\n";
    return kMismatch;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  }
  return kOk;
}
