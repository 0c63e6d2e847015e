#pragma once

// Command-line front end. `run_command` is callable from tests; the binary
// in tools/ only forwards argv.

#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bounded.hpp"
#include "eager.hpp"
#include "io.hpp"
#include "mutex.hpp"
#include "oracle.hpp"
#include "topology.hpp"

namespace rqcp {

enum ExitCode : int { kHolds = 0, kFails = 1, kInputError = 2, kBudgetExhausted = 3 };

namespace detail {

inline json trace_to_json(const Rqcp& sys, const std::vector<std::pair<int, Action>>& trace) {
  json out = json::array();
  for (const auto& [p, a] : trace) {
    out.push_back({{"process", sys.topology.processes[p]}, {"action", format_action(sys, p, a)}});
  }
  return out;
}

inline json run_to_json(const Rqcp& sys, const Run& run) {
  json out = json::array();
  for (const auto& s : run.steps) {
    out.push_back({{"process", sys.topology.processes[s.process]},
                   {"action", format_action(sys, s.process, s.action)},
                   {"control", format_control(sys, s.config.control)}});
  }
  return out;
}

inline json path_to_json(const TypedTopology& topo, const UndirectedPath& path) {
  json procs = json::array(), chans = json::array();
  for (int p : path.processes) procs.push_back(topo.processes[p]);
  for (int c : path.channels) chans.push_back(topo.channels[c].name);
  return {{"processes", procs}, {"channels", chans}, {"text", format_path(topo, path)}};
}

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  long long ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline json stats(std::size_t states, const Timer& timer, bool truncated) {
  return {{"states_explored", states}, {"time_ms", timer.ms()}, {"truncated", truncated}};
}

inline std::vector<int> resolve_target(const SystemFile& f, const std::string& flag) {
  if (!flag.empty()) return parse_control_vector(f.system, flag);
  if (f.target) return *f.target;
  throw InputError("no target: pass --target or add a \"target\" object to the file");
}

}  // namespace detail

inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Verifier for recursive processes communicating over FIFO channels", "rqcp"};
  app.require_subcommand(1);

  std::string file, target_flag, mode = "explore";
  bool dot = false, weak = false;
  int k = 1;
  std::size_t budget = 100000;
  Bounds bounds;

  auto* topo_cmd = app.add_subcommand("topology", "convergence, polyforest and co-cycle analysis");
  topo_cmd->add_option("file", file, "system description (JSON)")->required();
  topo_cmd->add_flag("--dot", dot, "print the topology in DOT format instead of a report");

  auto* eager_cmd = app.add_subcommand("eager-reach", "eager state reachability");
  eager_cmd->add_option("file", file, "system description (JSON)")->required();
  eager_cmd->add_option("--target", target_flag, "comma-separated control vector");

  auto* mutex_cmd = app.add_subcommand("mutex", "decide the mutex property of a finite system");
  mutex_cmd->add_option("file", file, "system description (JSON)")->required();
  mutex_cmd->add_flag("--weak", weak, "use the weak variant (consecutive cycle channels)");

  auto* bounded_cmd = app.add_subcommand("bounded-reach", "phase-bounded state reachability");
  bounded_cmd->add_option("file", file, "system description (JSON)")->required();
  bounded_cmd->add_option("--target", target_flag, "comma-separated control vector");
  bounded_cmd->add_option("-k", k, "phase bound")->required()->check(CLI::PositiveNumber);
  bounded_cmd->add_option("--budget", budget, "maximum number of reductions");

  auto* oracle_cmd = app.add_subcommand("oracle", "explicit-state enumeration within bounds");
  oracle_cmd->add_option("file", file, "system description (JSON)")->required();
  oracle_cmd->add_option("--mode", mode, "explore, eager or kphase")->check(CLI::IsMember({"explore", "eager", "kphase"}));
  oracle_cmd->add_option("--target", target_flag, "comma-separated control vector");
  oracle_cmd->add_option("-k", k, "phase bound (kphase mode)")->check(CLI::PositiveNumber);
  oracle_cmd->add_option("--max-channel", bounds.channel_len, "channel length bound");
  oracle_cmd->add_option("--max-stack", bounds.stack_depth, "stack depth bound");
  oracle_cmd->add_option("--max-steps", bounds.steps, "run length bound");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kHolds;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  const detail::Timer timer;
  json report;
  int code = kHolds;
  try {
    const SystemFile f = parse_system_file(file);
    const Rqcp& sys = f.system;
    const auto& topo = sys.topology;

    if (*topo_cmd) {
      if (dot) {
        out << topology_dot(topo);
        return is_converging(topo) ? kFails : kHolds;
      }
      const auto w = converging_witness(topo);
      const bool poly = is_polyforest(topo);
      json pairs = json::array();
      for (const auto& [c, d] : co_cycle_relation(topo)) {
        if (c < d) pairs.push_back({topo.channels[c].name, topo.channels[d].name});
      }
      report["verdict"] = w ? "converging" : "non-converging";
      if (w) report["witness"] = detail::path_to_json(topo, *w);
      report["polyforest"] = poly;
      report["co_cycle_pairs"] = pairs;
      report["stats"] = detail::stats(0, timer, false);
      err << "non-converging: " << (w ? "false" : "true") << ", polyforest: " << (poly ? "true" : "false") << "\n";
      if (w) err << "witness path: " << format_path(topo, *w) << "\n";
      code = w ? kFails : kHolds;
    } else if (*eager_cmd) {
      const auto target = detail::resolve_target(f, target_flag);
      EagerReachResult r;
      std::string engine;
      if (sys.is_finite()) {
        r = finite_eager_reach(sys, target);
        engine = "finite";
      } else {
        try {
          r = eager_state_reach(sys, target);
        } catch (const ConvergingTopologyError& e) {
          report["verdict"] = "rejected";
          report["error"] = "converging typed topology";
          report["witness"] = detail::path_to_json(topo, e.witness);
          report["stats"] = detail::stats(0, timer, false);
          out << report.dump(2) << "\n";
          err << "error: " << e.what() << "\n";
          return kInputError;
        }
        engine = "product";
      }
      report["verdict"] = r.reachable ? "reachable" : "unreachable";
      report["engine"] = engine;
      if (r.reachable && engine == "finite") report["witness"] = detail::trace_to_json(sys, r.trace);
      report["stats"] = detail::stats(r.states_explored, timer, false);
      err << "target " << format_control(sys, target) << ": " << (r.reachable ? "reachable" : "unreachable")
          << " (" << engine << " engine, " << r.states_explored << " states)\n";
      code = r.reachable ? kHolds : kFails;
    } else if (*mutex_cmd) {
      const auto r = check_mutex(sys, weak);
      report["verdict"] = r.mutex ? "mutex" : "not-mutex";
      report["polyforest_short_circuit"] = r.short_circuit;
      if (r.witness) {
        const auto& w = *r.witness;
        json ne = json::array();
        for (int c : w.nonempty) ne.push_back(topo.channels[c].name);
        report["witness"] = {{"control", format_control(sys, w.control)},
                             {"nonempty_channels", ne},
                             {"process", topo.processes[w.process]},
                             {"send", format_action(sys, w.process, w.send)},
                             {"trace", detail::trace_to_json(sys, w.trace)}};
        err << "not mutex: from " << format_control(sys, w.control) << ", " << topo.processes[w.process] << " sends "
            << format_action(sys, w.process, w.send) << "\n";
      } else {
        err << (weak ? "weakly mutex" : "mutex") << (r.short_circuit ? " (polyforest)" : "") << "\n";
      }
      report["stats"] = detail::stats(r.states_explored, timer, false);
      code = r.mutex ? kHolds : kFails;
    } else if (*bounded_cmd) {
      const auto target = detail::resolve_target(f, target_flag);
      const auto r = bounded_state_reach(sys, target, k, budget);
      report["verdict"] = to_string(r.outcome);
      if (r.skeleton) {
        json sk = json::array();
        for (const auto& s : *r.skeleton) sk.push_back({{"process", topo.processes[s.process]}, {"kind", format_kind(topo, s.kind)}});
        report["witness"] = {{"phases", sk}};
      }
      report["stats"] = detail::stats(r.reductions + r.skeletons, timer, false);
      report["stats"]["skeletons"] = r.skeletons;
      report["stats"]["reductions"] = r.reductions;
      err << "target " << format_control(sys, target) << " with k=" << k << ": " << to_string(r.outcome) << "\n";
      switch (r.outcome) {
        case BoundedOutcome::Reachable:
          code = kHolds;
          break;
        case BoundedOutcome::Unreachable:
          code = kFails;
          break;
        case BoundedOutcome::BudgetExhausted:
          code = kBudgetExhausted;
          break;
        case BoundedOutcome::Unsupported:
          code = kInputError;
          break;
      }
    } else if (*oracle_cmd) {
      std::optional<std::vector<int>> target;
      if (!target_flag.empty() || f.target) target = detail::resolve_target(f, target_flag);
      if (mode == "kphase") {
        if (!target) throw InputError("kphase mode needs a target");
        const auto r = kphase_reach_bruteforce(sys, *target, k, bounds);
        const auto v = r.verdict();
        report["verdict"] = v ? (*v ? "reachable" : "unreachable") : "inconclusive";
        if (r.witness) report["witness"] = detail::run_to_json(sys, *r.witness);
        report["stats"] = detail::stats(r.states_explored, timer, r.truncated);
        code = v ? (*v ? kHolds : kFails) : kBudgetExhausted;
      } else {
        std::set<std::vector<int>> vectors;
        bool truncated = false;
        std::size_t states = 0;
        std::optional<Run> witness;
        if (mode == "eager") {
          auto r = eager_reach_bruteforce(sys, bounds, target);
          vectors = std::move(r.vectors);
          truncated = r.truncated;
          states = r.states_explored;
          witness = std::move(r.witness);
        } else {
          const auto e = explore_bounded(sys, bounds);
          vectors = e.control_vectors();
          truncated = e.truncated();
          states = e.configs().size();
          if (target) {
            for (std::size_t i = 0; i < e.configs().size(); ++i) {
              if (e.configs()[i].control == *target) {
                witness = e.run_to(i);
                break;
              }
            }
          }
        }
        json vs = json::array();
        for (const auto& v : vectors) vs.push_back(format_control(sys, v));
        report["control_vectors"] = vs;
        if (target) {
          const bool hit = vectors.contains(*target);
          report["verdict"] = hit ? "reachable" : (truncated ? "inconclusive" : "unreachable");
          if (witness) report["witness"] = detail::run_to_json(sys, *witness);
          code = hit ? kHolds : (truncated ? kBudgetExhausted : kFails);
        } else {
          report["verdict"] = truncated ? "truncated" : "complete";
        }
        report["stats"] = detail::stats(states, timer, truncated);
      }
      err << "oracle (" << mode << "): " << report["verdict"].get<std::string>() << "\n";
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  out << report.dump(2) << "\n";
  return code;
}

inline int run_command(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(args, out, err);
}

}  // namespace rqcp
