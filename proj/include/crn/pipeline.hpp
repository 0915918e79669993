#pragma once

// Config-driven pipeline: simulate -> estimate -> geometry -> volumes ->
// counts -> infer -> report. Used by the crnid CLI and the acceptance suite.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "crn/datagen.hpp"
#include "crn/geometry.hpp"
#include "crn/likelihood.hpp"
#include "crn/model.hpp"
#include "crn/optimizer.hpp"
#include "crn/volume.hpp"

namespace crn {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kVersion = "crnid 1.0.0";

struct PipelineConfig {
  std::string name;
  ReactionNetwork network;           // candidate reactions
  std::vector<int> true_reactions;   // 0-based; empty outside synthesis mode
  MeasureSpec measure;
  std::uint64_t n_samples = 2000;    // N, per cone, for the coefficients
  std::uint64_t n_discovery = 20000; // per cone, for block discovery
  std::uint64_t min_block_hits = kMinBlockHits;
  DataGenConfig data;                // data.seed is overwritten by the stage seed
  OptimizerConfig optimizer;         // optimizer.seed likewise
  std::uint64_t seed = 2011;         // master seed
  int threads = 0;
  std::string output_dataset;  // optional default paths for the CLI
  std::string output_report;

  bool synthesis_mode() const { return !true_reactions.empty(); }
  ReactionNetwork true_network() const;
};

struct StageSeeds {
  std::uint64_t datagen, discovery, volume, optimizer;
};

/// Seeds keyed by stage name: rng::derive_seed(master, "<stage>").
StageSeeds stage_seeds(std::uint64_t master);

/// Throws ConfigError with a field-specific message.
PipelineConfig parse_config(const nlohmann::json& j);
PipelineConfig load_config(const std::string& path);
nlohmann::json config_to_json(const PipelineConfig& cfg);

// Dataset CSV: id, K_<species>..., SE_<species>..., converged, residual_norm.
struct DataRow {
  int id = 0;
  RateVector k;
  Eigen::VectorXd standard_errors;
  bool converged = true;
  double residual_norm = 0.0;
};

void write_dataset_csv(std::ostream& os, const SpeciesSet& species,
                       const std::vector<DataRow>& rows);
/// Throws DataError on malformed input or species mismatch.
std::vector<DataRow> read_dataset_csv(std::istream& is, const SpeciesSet& species);

/// Synthesis stage. Throws ConfigError outside synthesis mode.
std::vector<DataRow> run_simulate(const PipelineConfig& cfg);

struct GeometryStage {
  ConeCatalog catalog;
  BlockDiscovery discovery;
  BlockTable table;
  std::map<std::string, double> timing;
};

GeometryStage run_geometry(const PipelineConfig& cfg);

struct InferResult {
  GeometryStage geometry;
  std::vector<DataRow> data;
  std::vector<int> data_ids;       // rows that entered the assignment (converged)
  std::vector<RateVector> points;  // their K, parallel to data_ids
  Assignment assignment;
  LikelihoodModel model;
  FitResult fit;
  std::size_t dropped_unsupported = 0;
  std::vector<std::string> warnings;
  std::map<std::string, double> timing;
};

/// With `data` null the dataset is synthesized first (same seeds as
/// run_simulate). Throws DataError when no point is usable.
InferResult run_infer(const PipelineConfig& cfg, const std::vector<DataRow>* data = nullptr);

/// Structured reports. Everything except the "timing" object is a pure
/// function of the config.
nlohmann::json geometry_report(const PipelineConfig& cfg, const GeometryStage& g);
nlohmann::json infer_report(const PipelineConfig& cfg, const InferResult& r);

/// Fixed-width block mirroring the classic optimizer printout.
std::string console_block(const FitResult& fit);

/// "1234"-style label (1-based) for a cone; uses commas when m > 9.
std::string cone_label(const ConeIndex& reactions, int reaction_count);

struct ReportSummary {
  std::string kind;  // "geometry" or "infer"
  int reactions = 0;
  int d_eff = 0;
  std::uint64_t cones = 0;
  std::uint64_t nondegenerate = 0;
  std::uint64_t blocks = 0;
  double running_time = 0.0;
  bool has_fit = false;
  double success_rate = 0.0;
  double neg_ll = 0.0;
  std::vector<int> support;  // 1-based
};

/// Throws DataError when required fields are missing.
ReportSummary summarize_report(const nlohmann::json& report);
/// Human-readable summary with a one-row table of counts and timings.
std::string format_summary(const ReportSummary& s);
/// Plot-ready CSV tables: "volumes", "theta", "points", "minima" (when present).
std::map<std::string, std::string> plot_tables(const nlohmann::json& report);

}  // namespace crn
