// crnid: reaction network identification from rate-coefficient estimates.
//
//   crnid simulate --config CFG [--out data.csv]
//   crnid geometry --config CFG [--out report.json]
//   crnid infer    --config CFG [--data data.csv] [--out report.json]
//   crnid report   REPORT.json [--out DIR]
//
// Exit codes: 0 success, 1 usage or I/O, 2 config error, 3 data error, 4 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "crn/errors.hpp"
#include "crn/pipeline.hpp"

namespace {

struct Options {
  std::string config;
  std::string data;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::uint64_t> n_samples;
  std::optional<int> restarts;
};

crn::PipelineConfig load(const Options& o) {
  crn::PipelineConfig cfg = crn::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.n_samples) {
    if (*o.n_samples == 0) throw crn::ConfigError("--n-samples must be positive");
    cfg.n_samples = *o.n_samples;
  }
  if (o.restarts) {
    cfg.optimizer.restarts = *o.restarts;
    cfg.optimizer.validate();
  }
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << text;
}

std::string pick(const std::string& flag, const std::string& configured) {
  return flag.empty() ? configured : flag;
}

int cmd_simulate(const Options& o) {
  const auto cfg = load(o);
  const auto rows = crn::run_simulate(cfg);
  std::ostringstream os;
  crn::write_dataset_csv(os, cfg.network.species, rows);
  const std::string path = pick(o.out, cfg.output_dataset);
  write_text(path, os.str());
  if (!path.empty() && path != "-")
    std::cerr << "wrote " << rows.size() << " data points to " << path << "\n";
  return 0;
}

int cmd_geometry(const Options& o) {
  const auto cfg = load(o);
  const auto g = crn::run_geometry(cfg);
  const auto rep = crn::geometry_report(cfg, g);
  const std::string path = pick(o.out, cfg.output_report);
  if (!path.empty() && path != "-") write_text(path, rep.dump(2) + "\n");
  std::cout << crn::format_summary(crn::summarize_report(rep));
  return 0;
}

int cmd_infer(const Options& o) {
  const auto cfg = load(o);
  std::optional<std::vector<crn::DataRow>> rows;
  if (!o.data.empty()) {
    std::ifstream in(o.data);
    if (!in) throw crn::DataError("cannot open dataset '" + o.data + "'");
    rows = crn::read_dataset_csv(in, cfg.network.species);
  } else if (!cfg.synthesis_mode()) {
    throw crn::ConfigError("infer needs --data or a config with true_reactions");
  }
  const auto result = crn::run_infer(cfg, rows ? &*rows : nullptr);
  const auto rep = crn::infer_report(cfg, result);
  const std::string path = pick(o.out, cfg.output_report);
  if (!path.empty() && path != "-") write_text(path, rep.dump(2) + "\n");
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << crn::console_block(result.fit);
  return 0;
}

int cmd_report(const std::string& report_path, const std::string& out_dir) {
  std::ifstream in(report_path);
  if (!in) {
    std::cerr << "error: cannot open report '" << report_path << "'\n";
    return 1;
  }
  nlohmann::json rep;
  try {
    in >> rep;
  } catch (const nlohmann::json::parse_error& e) {
    throw crn::DataError(std::string("report is not valid JSON: ") + e.what());
  }
  std::cout << crn::format_summary(crn::summarize_report(rep));
  if (rep.contains("console")) std::cout << "\n" << rep["console"].get<std::string>();
  const auto tables = crn::plot_tables(rep);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    for (const auto& [name, csv] : tables)
      write_text((std::filesystem::path(out_dir) / (name + ".csv")).string(), csv);
    std::cerr << "wrote " << tables.size() << " tables to " << out_dir << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identify a conic reaction network from noisy rate-coefficient estimates"};
  app.set_version_flag("--version", crn::kVersion);
  app.require_subcommand(1);
  Options o;

  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output path");
    sub->add_option("--seed", o.seed, "master seed (overrides the config)");
    sub->add_option("--threads", o.threads, "worker threads (default: all cores)");
    sub->add_option("--n-samples", o.n_samples, "Monte Carlo samples per cone (overrides N)");
    sub->add_option("--restarts", o.restarts, "optimizer restarts (0 = 2^(m-1))");
  };

  auto* sim = app.add_subcommand("simulate", "simulate trajectories and write the estimated dataset (CSV)");
  add_common(sim);
  auto* geo = app.add_subcommand("geometry", "enumerate cones, discover blocks and estimate volumes");
  add_common(geo);
  auto* inf = app.add_subcommand("infer", "fit reaction probabilities to a dataset");
  add_common(inf);
  inf->add_option("--data", o.data, "dataset CSV (synthesized from the config when omitted)");
  auto* rep = app.add_subcommand("report", "summarize a JSON report and emit plot-ready CSV tables");
  std::string report_path, report_out;
  rep->add_option("report", report_path, "report JSON")->required();
  rep->add_option("--out", report_out, "directory for the CSV tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(o);
    if (geo->parsed()) return cmd_geometry(o);
    if (inf->parsed()) return cmd_infer(o);
    if (rep->parsed()) return cmd_report(report_path, report_out);
  } catch (const crn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const crn::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const crn::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
