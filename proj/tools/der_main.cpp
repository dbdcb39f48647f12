// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end for the trust engine: replay ledgers, compute
// rankings, trace experience curves, run scenarios, export plot data.
// Data goes to stdout (or files), diagnostics to stderr.
// Exit codes: 0 success, 1 usage error, 2 data/config error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "der/config.hpp"
#include "der/errors.hpp"
#include "der/format.hpp"
#include "der/graph.hpp"
#include "der/ledger.hpp"
#include "der/reputation.hpp"
#include "der/sim.hpp"
#include "der/trust.hpp"

namespace {

der::EngineConfig load_config_or_default(const std::string& path) {
  if (path.empty()) {
    return der::EngineConfig{};
  }
  return der::load_config(path);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  return out;
}

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
  } else {
    auto out = open_output(path);
    out << content;
  }
}

void print_graph_summary(std::ostream& out, const der::TrustGraph& graph) {
  out << "users: " << graph.user_count() << "\n";
  out << "edges: " << graph.edge_count() << "\n";
  std::vector<std::size_t> histogram(10, 0);
  for (const auto& e : graph.edges_sorted()) {
    auto bin = static_cast<std::size_t>(e.state.current * 10.0);
    if (bin >= histogram.size()) {
      bin = histogram.size() - 1;
    }
    histogram[bin]++;
  }
  out << "exp histogram:\n";
  for (std::size_t i = 0; i < histogram.size(); ++i) {
    out << "  [" << der::format_sig12(0.1 * static_cast<double>(i)) << ","
        << (i + 1 == histogram.size() ? "1.0]" :
            der::format_sig12(0.1 * static_cast<double>(i + 1)) + ")")
        << " " << histogram[i] << "\n";
  }
}

// Ledger records carry a "score" field, graph snapshots carry "exp".
bool looks_like_ledger(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw std::runtime_error("cannot open input file: " + path);
  }
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      return line.find("\"score\"") != std::string::npos;
    }
  }
  return true;  // empty file: treat as empty ledger
}

struct ReplayOptions {
  std::string ledger_path;
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> decay_epoch;
  std::optional<std::uint64_t> final_block;
};

int cmd_replay(const ReplayOptions& opt) {
  const der::EngineConfig cfg = load_config_or_default(opt.config_path);
  const std::uint64_t decay = opt.decay_epoch.value_or(cfg.decay_epoch);
  const der::Ledger ledger = der::load_ledger(opt.ledger_path, decay);
  const der::TrustGraph graph =
      der::replay(ledger, cfg.experience, cfg.theta, opt.final_block);
  const std::string snapshot = der::graph_snapshot_string(graph);
  write_or_print(opt.out_path, snapshot);
  print_graph_summary(opt.out_path.empty() ? std::cerr : std::cout, graph);
  return 0;
}

struct RankOptions {
  std::string input_path;
  std::string config_path;
  std::string kind = "auto";
  std::string trustor;
  std::string out_path;
  std::string telemetry_path;
  std::optional<std::uint64_t> decay_epoch;
  std::optional<std::uint64_t> final_block;
};

int cmd_rank(const RankOptions& opt) {
  const der::EngineConfig cfg = load_config_or_default(opt.config_path);
  const bool is_ledger =
      opt.kind == "ledger" || (opt.kind == "auto" && looks_like_ledger(opt.input_path));

  der::TrustGraph graph(cfg.theta);
  if (is_ledger) {
    const std::uint64_t decay = opt.decay_epoch.value_or(cfg.decay_epoch);
    const der::Ledger ledger = der::load_ledger(opt.input_path, decay);
    graph = der::replay(ledger, cfg.experience, cfg.theta, opt.final_block);
  } else {
    std::ifstream in(opt.input_path);
    if (!in.is_open()) {
      throw std::runtime_error("cannot open input file: " + opt.input_path);
    }
    graph = der::load_graph_snapshot(in, cfg.theta);
  }
  if (graph.user_count() == 0) {
    throw std::runtime_error("input contains no users; nothing to rank");
  }

  const der::SplitMatrices matrices = der::split(graph);
  const der::TransitionMatrices transitions = der::build_transition_matrices(matrices);
  const der::ReputationVector rep =
      der::solve(transitions.a_pos, transitions.a_neg, cfg.reputation);
  if (!rep.converged) {
    std::cerr << "warning: solver hit max_iters with residual "
              << der::format_sig12(rep.final_residual) << "\n";
  }

  if (!opt.telemetry_path.empty()) {
    auto out = open_output(opt.telemetry_path);
    der::write_residual_trace_jsonl(out, rep);
  }

  std::ostringstream csv;
  if (opt.trustor.empty()) {
    der::write_reputation_csv(csv, graph, rep);
  } else {
    const auto trustor = graph.find_user(opt.trustor);
    if (!trustor.has_value()) {
      throw std::runtime_error("unknown trustor id: " + opt.trustor);
    }
    const der::TrustEngine engine(graph, rep);
    std::vector<der::UserId> candidates;
    for (std::uint32_t i = 0; i < graph.user_count(); ++i) {
      if (i != trustor->index) {
        candidates.push_back(der::UserId{i});
      }
    }
    const auto ranking = engine.rank_counterparts(
        *trustor, candidates, der::TrustWeights{cfg.reputation.w1, cfg.reputation.w2});
    der::write_trust_csv(csv, graph, *trustor, ranking);
  }
  write_or_print(opt.out_path, csv.str());
  std::cerr << "solver: " << rep.iterations << " iterations, residual "
            << der::format_sig12(rep.final_residual) << "\n";
  return 0;
}

struct TraceOptions {
  std::string config_path;
  std::string schedule_path;
  std::string out_path;
  std::optional<double> constant;
  std::uint64_t steps = 0;
};

int cmd_trace_exp(const TraceOptions& opt) {
  const der::EngineConfig cfg = load_config_or_default(opt.config_path);
  std::vector<double> schedule;
  if (!opt.schedule_path.empty()) {
    std::ifstream in(opt.schedule_path);
    if (!in.is_open()) {
      throw std::runtime_error("cannot open schedule file: " + opt.schedule_path);
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line[0] == '#') {
        continue;
      }
      try {
        std::size_t consumed = 0;
        const double value = std::stod(line, &consumed);
        while (consumed < line.size() && std::isspace(static_cast<unsigned char>(line[consumed]))) {
          ++consumed;
        }
        if (consumed != line.size()) {
          throw std::invalid_argument("trailing characters");
        }
        schedule.push_back(value);
      } catch (const std::exception&) {
        throw der::ParseError(line_no, "expected one feedback score per line");
      }
    }
  } else if (opt.constant.has_value()) {
    if (opt.steps == 0) {
      throw std::runtime_error("--constant requires --steps >= 1");
    }
    schedule.assign(opt.steps, *opt.constant);
  } else {
    throw std::runtime_error("either --schedule or --constant/--steps is required");
  }

  const std::vector<double> trace = der::exp_curve(cfg.experience, schedule);
  std::ostringstream csv;
  der::write_exp_trace_csv(csv, trace);
  write_or_print(opt.out_path, csv.str());
  return 0;
}

struct SimulateOptions {
  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateOptions& opt) {
  der::Scenario scenario = der::load_scenario(opt.scenario_path);
  if (opt.seed.has_value()) {
    scenario.seed = *opt.seed;
  }
  const der::SimulationResult result = der::run(scenario);

  namespace fs = std::filesystem;
  fs::create_directories(opt.out_dir);
  {
    auto out = open_output((fs::path(opt.out_dir) / "ledger.jsonl").string());
    der::save_ledger(result.ledger, out);
  }
  {
    auto out = open_output((fs::path(opt.out_dir) / "metrics.csv").string());
    der::write_metrics_csv(out, result.metrics);
  }
  if (!result.metrics.tracked_edges.empty()) {
    auto out = open_output((fs::path(opt.out_dir) / "tracked_exp.csv").string());
    der::write_tracked_exp_csv(out, result.metrics);
  }
  if (result.metrics.attack.has_value()) {
    auto out = open_output((fs::path(opt.out_dir) / "attack.json").string());
    der::write_attack_json(out, *result.metrics.attack);
  }
  std::cerr << "scenario: " << result.ledger.events().size() << " events, "
            << result.metrics.epochs.size() << " epochs, "
            << result.metrics.users.size() << " users -> " << opt.out_dir << "\n";
  return 0;
}

struct BenchOptions {
  std::vector<std::uint32_t> sizes;
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 1;
  double degree = 10.0;
};

int cmd_bench(const BenchOptions& opt) {
  const der::EngineConfig cfg = load_config_or_default(opt.config_path);
  der::BenchSpec spec;
  spec.seed = opt.seed;
  spec.expected_out_degree = opt.degree;
  spec.theta = cfg.theta;
  const auto rows = der::convergence_bench(opt.sizes, spec, cfg.reputation);
  std::ostringstream csv;
  der::write_convergence_csv(csv, rows);
  write_or_print(opt.out_path, csv.str());
  for (const auto& row : rows) {
    std::cerr << "N=" << row.n << " iterations=" << row.iterations
              << (row.converged ? "" : " (not converged)") << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralised experience/reputation trust engine"};
  app.require_subcommand(1);

  auto* init = app.add_subcommand("init", "write a config file with the built-in presets");
  std::string init_out;
  init->add_option("-o,--out", init_out, "output path (default: stdout)");

  ReplayOptions replay_opt;
  auto* replay = app.add_subcommand("replay", "replay a feedback ledger into a graph snapshot");
  replay->add_option("ledger", replay_opt.ledger_path, "ledger JSONL file")->required();
  replay->add_option("-c,--config", replay_opt.config_path, "engine config file");
  replay->add_option("-o,--out", replay_opt.out_path, "snapshot output path (default: stdout)");
  replay->add_option("--decay-epoch", replay_opt.decay_epoch, "blocks per decay step");
  replay->add_option("--final-block", replay_opt.final_block,
                     "extend idle decay up to this block");

  RankOptions rank_opt;
  auto* rank_cmd = app.add_subcommand("rank", "compute the reputation or trust ranking");
  rank_cmd->add_option("input", rank_opt.input_path, "ledger or graph snapshot file")->required();
  rank_cmd->add_option("-c,--config", rank_opt.config_path, "engine config file");
  rank_cmd->add_option("--input-kind", rank_opt.kind, "auto|ledger|graph")
      ->check(CLI::IsMember({"auto", "ledger", "graph"}));
  rank_cmd->add_option("--trustor", rank_opt.trustor,
                       "rank counterparts from this user's perspective");
  rank_cmd->add_option("-o,--out", rank_opt.out_path, "CSV output path (default: stdout)");
  rank_cmd->add_option("--telemetry", rank_opt.telemetry_path,
                       "write solver residual trace JSONL here");
  rank_cmd->add_option("--decay-epoch", rank_opt.decay_epoch, "blocks per decay step");
  rank_cmd->add_option("--final-block", rank_opt.final_block,
                       "extend idle decay up to this block");

  TraceOptions trace_opt;
  auto* trace = app.add_subcommand("trace-exp", "trace an experience curve over a schedule");
  trace->add_option("-c,--config", trace_opt.config_path, "engine config file");
  trace->add_option("--schedule", trace_opt.schedule_path,
                    "file with one feedback score per line (0 = no transaction)");
  trace->add_option("--constant", trace_opt.constant, "constant feedback score");
  trace->add_option("--steps", trace_opt.steps, "number of steps for --constant");
  trace->add_option("-o,--out", trace_opt.out_path, "CSV output path (default: stdout)");

  SimulateOptions sim_opt;
  auto* simulate = app.add_subcommand("simulate", "run a seeded ecosystem scenario");
  simulate->add_option("scenario", sim_opt.scenario_path, "scenario JSON file")->required();
  simulate->add_option("-o,--out-dir", sim_opt.out_dir, "output directory")->required();
  simulate->add_option("--seed", sim_opt.seed, "override the scenario seed");

  BenchOptions bench_opt;
  auto* bench = app.add_subcommand("bench", "solver convergence benchmark on random graphs");
  bench->add_option("--sizes", bench_opt.sizes, "population sizes")
      ->required()
      ->delimiter(',');
  bench->add_option("-c,--config", bench_opt.config_path, "engine config file");
  bench->add_option("-o,--out", bench_opt.out_path, "CSV output path (default: stdout)");
  bench->add_option("--seed", bench_opt.seed, "generator seed");
  bench->add_option("--degree", bench_opt.degree, "expected out-degree");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(init)) {
      write_or_print(init_out, der::config_to_json(der::EngineConfig{}));
      return 0;
    }
    if (app.got_subcommand(replay)) {
      return cmd_replay(replay_opt);
    }
    if (app.got_subcommand(rank_cmd)) {
      return cmd_rank(rank_opt);
    }
    if (app.got_subcommand(trace)) {
      return cmd_trace_exp(trace_opt);
    }
    if (app.got_subcommand(simulate)) {
      return cmd_simulate(sim_opt);
    }
    if (app.got_subcommand(bench)) {
      return cmd_bench(bench_opt);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
