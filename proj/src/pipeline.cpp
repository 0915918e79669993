#include "crn/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "crn/errors.hpp"
#include "crn/parallel.hpp"
#include "crn/random.hpp"

namespace crn {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016" PRIx64, v);
  return buf;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("unknown field '" + it.key() + "' in " + where);
  }
}

template <class T>
T get_or(const json& j, const char* key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

std::uint64_t get_count(const json& j, const char* key, const std::string& where,
                        std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw ConfigError("field '" + std::string(key) + "' in " + where +
                      " must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

json theta_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

std::vector<int> one_based(const std::vector<int>& v) {
  std::vector<int> out(v);
  for (int& x : out) ++x;
  return out;
}

json signature_json(const Signature& sig, const ConeCatalog& catalog) {
  json a = json::array();
  for (int c : sig) a.push_back(cone_label(catalog.cones()[static_cast<std::size_t>(c)].reactions,
                                           catalog.reaction_count()));
  return a;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line) + ": not a number: '" + s + "'");
  }
}

}  // namespace

ReactionNetwork PipelineConfig::true_network() const {
  if (!synthesis_mode()) throw ConfigError("no true subnetwork configured (synthesis mode needs true_reactions)");
  return network.subnetwork(true_reactions);
}

StageSeeds stage_seeds(std::uint64_t master) {
  return {rng::derive_seed(master, "datagen"), rng::derive_seed(master, "discovery"),
          rng::derive_seed(master, "volume"), rng::derive_seed(master, "optimizer")};
}

PipelineConfig parse_config(const json& j) {
  check_keys(j, "config", {"schema_version", "name", "species", "source", "reactions",
                           "true_reactions", "measure", "volume", "data", "optimizer", "seed",
                           "threads", "output"});
  const int version = get_or<int>(j, "schema_version", "config", kConfigSchemaVersion);
  if (version != kConfigSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(version));

  PipelineConfig cfg;
  if (!j.contains("species") || !j.contains("source") || !j.contains("reactions"))
    throw ConfigError("config needs species, source and reactions");
  const auto names = get_or<std::vector<std::string>>(j, "species", "config", {});
  const SpeciesSet species(names);
  const Complex source = parse_complex(get_or<std::string>(j, "source", "config", ""));

  const json& rj = j.at("reactions");
  if (!rj.is_array() || rj.empty()) throw ConfigError("reactions must be a nonempty array");
  std::vector<Complex> targets;
  for (const json& r : rj) {
    if (r.is_string()) {
      targets.push_back(parse_complex(r.get<std::string>()));
    } else if (r.is_object()) {
      check_keys(r, "reaction", {"target"});
      targets.push_back(parse_complex(get_or<std::string>(r, "target", "reaction", "")));
    } else {
      throw ConfigError("each reaction must be a target string or an object with 'target'");
    }
  }
  cfg.network = make_conic_network(species, source, targets);
  const int m = static_cast<int>(cfg.network.reaction_count());

  if (j.contains("true_reactions")) {
    const auto tr = get_or<std::vector<int>>(j, "true_reactions", "config", {});
    std::set<int> seen;
    for (int r : tr) {
      if (r < 1 || r > m) throw ConfigError("true_reactions entry out of range: " + std::to_string(r));
      if (!seen.insert(r).second) throw ConfigError("duplicate true_reactions entry");
      cfg.true_reactions.push_back(r - 1);
    }
  }

  if (j.contains("measure")) {
    const json& mj = j.at("measure");
    check_keys(mj, "measure", {"kind", "alpha", "lambda"});
    const auto kind = get_or<std::string>(mj, "kind", "measure", "gamma");
    if (kind != "gamma") throw ConfigError("unsupported measure kind '" + kind + "'");
    cfg.measure.alpha = get_or<double>(mj, "alpha", "measure", cfg.measure.alpha);
    cfg.measure.lambda = get_or<double>(mj, "lambda", "measure", cfg.measure.lambda);
  }
  cfg.measure.validate();

  if (j.contains("volume")) {
    const json& vj = j.at("volume");
    check_keys(vj, "volume", {"n_samples", "n_discovery", "min_block_hits"});
    cfg.n_samples = get_count(vj, "n_samples", "volume", cfg.n_samples);
    cfg.n_discovery = get_count(vj, "n_discovery", "volume", cfg.n_discovery);
    cfg.min_block_hits = get_count(vj, "min_block_hits", "volume", cfg.min_block_hits);
  }
  if (cfg.n_samples == 0 || cfg.n_discovery == 0)
    throw ConfigError("n_samples and n_discovery must be positive");

  cfg.data.alpha = cfg.measure.alpha;
  cfg.data.lambda = cfg.measure.lambda;
  int grid_count = 20;
  double t_end = 1.0;
  std::vector<std::int64_t> x0;
  if (j.contains("data")) {
    const json& dj = j.at("data");
    check_keys(dj, "data", {"points", "rate_alpha", "rate_lambda", "x0", "grid"});
    cfg.data.points = static_cast<int>(get_count(dj, "points", "data", 50));
    cfg.data.alpha = get_or<double>(dj, "rate_alpha", "data", cfg.data.alpha);
    cfg.data.lambda = get_or<double>(dj, "rate_lambda", "data", cfg.data.lambda);
    if (dj.contains("x0")) {
      const json& xj = dj.at("x0");
      if (xj.is_object()) {
        x0.assign(species.size(), 0);
        for (auto it = xj.begin(); it != xj.end(); ++it) {
          const auto idx = species.index_of(it.key());
          if (!idx) throw ConfigError("unknown species '" + it.key() + "' in data.x0");
          if (!it->is_number_integer() || it->get<std::int64_t>() < 0)
            throw ConfigError("data.x0 entries must be nonnegative integers");
          x0[*idx] = it->get<std::int64_t>();
        }
      } else {
        x0 = get_or<std::vector<std::int64_t>>(dj, "x0", "data", {});
      }
    }
    if (dj.contains("grid")) {
      const json& gj = dj.at("grid");
      check_keys(gj, "data.grid", {"count", "t_end"});
      grid_count = static_cast<int>(get_count(gj, "count", "data.grid", 20));
      t_end = get_or<double>(gj, "t_end", "data.grid", 1.0);
    }
  }
  if (!(cfg.data.alpha > 0) || !(cfg.data.lambda > 0))
    throw ConfigError("data.rate_alpha and data.rate_lambda must be positive");
  if (grid_count < 1 || !(t_end > 0)) throw ConfigError("data.grid needs count >= 1 and t_end > 0");
  cfg.data.ssa.t_grid = uniform_grid(grid_count, t_end);
  if (x0.empty()) {
    x0.assign(species.size(), 0);
    if (cfg.network.source_complex.size() == 1 && cfg.network.source_complex.begin()->second == 1)
      x0[*species.index_of(cfg.network.source_complex.begin()->first)] = 1000;
  }
  cfg.data.ssa.x0 = x0;
  cfg.data.ssa.validate(species.size());

  if (j.contains("optimizer")) {
    const json& oj = j.at("optimizer");
    check_keys(oj, "optimizer", {"restarts", "method", "sweep_tolerance", "max_sweeps",
                                 "merge_tol", "support_tol"});
    OptimizerConfig& o = cfg.optimizer;
    o.restarts = static_cast<int>(get_count(oj, "restarts", "optimizer", 0));
    if (oj.contains("method"))
      o.method = parse_local_search(get_or<std::string>(oj, "method", "optimizer", ""));
    o.sweep_tolerance = get_or<double>(oj, "sweep_tolerance", "optimizer", o.sweep_tolerance);
    o.max_sweeps = get_or<int>(oj, "max_sweeps", "optimizer", o.max_sweeps);
    o.merge_tol = get_or<double>(oj, "merge_tol", "optimizer", o.merge_tol);
    o.support_tol = get_or<double>(oj, "support_tol", "optimizer", o.support_tol);
  }
  cfg.optimizer.validate();

  cfg.seed = get_count(j, "seed", "config", cfg.seed);
  cfg.threads = get_or<int>(j, "threads", "config", 0);
  if (j.contains("output")) {
    check_keys(j.at("output"), "output", {"dataset", "report"});
    cfg.output_dataset = get_or<std::string>(j.at("output"), "dataset", "output", "");
    cfg.output_report = get_or<std::string>(j.at("output"), "report", "output", "");
  }
  if (j.contains("name")) cfg.name = get_or<std::string>(j, "name", "config", "");
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

json config_to_json(const PipelineConfig& cfg) {
  const ReactionNetwork& net = cfg.network;
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  if (!cfg.name.empty()) j["name"] = cfg.name;
  j["species"] = net.species.names();
  j["source"] = format_complex(net.source_complex);
  json reactions = json::array();
  for (const Reaction& r : net.reactions) reactions.push_back(format_complex(r.target));
  j["reactions"] = reactions;
  if (cfg.synthesis_mode()) j["true_reactions"] = one_based(cfg.true_reactions);
  j["measure"] = {{"kind", "gamma"}, {"alpha", cfg.measure.alpha}, {"lambda", cfg.measure.lambda}};
  j["volume"] = {{"n_samples", cfg.n_samples},
                 {"n_discovery", cfg.n_discovery},
                 {"min_block_hits", cfg.min_block_hits}};
  const auto& grid = cfg.data.ssa.t_grid;
  j["data"] = {{"points", cfg.data.points},
               {"rate_alpha", cfg.data.alpha},
               {"rate_lambda", cfg.data.lambda},
               {"x0", cfg.data.ssa.x0},
               {"grid", {{"count", grid.size()}, {"t_end", grid.empty() ? 0.0 : grid.back()}}}};
  const OptimizerConfig& o = cfg.optimizer;
  j["optimizer"] = {{"restarts", o.restarts},
                    {"method", to_string(o.method)},
                    {"sweep_tolerance", o.sweep_tolerance},
                    {"max_sweeps", o.max_sweeps},
                    {"merge_tol", o.merge_tol},
                    {"support_tol", o.support_tol}};
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  return j;
}

void write_dataset_csv(std::ostream& os, const SpeciesSet& species,
                       const std::vector<DataRow>& rows) {
  os << "id";
  for (const auto& s : species.names()) os << ",K_" << s;
  for (const auto& s : species.names()) os << ",SE_" << s;
  os << ",converged,residual_norm\n";
  const auto d = static_cast<Eigen::Index>(species.size());
  for (const DataRow& r : rows) {
    os << r.id;
    for (Eigen::Index i = 0; i < d; ++i) os << ',' << fmt17(r.k(i));
    for (Eigen::Index i = 0; i < d; ++i)
      os << ',' << fmt17(r.standard_errors.size() == d ? r.standard_errors(i) : 0.0);
    os << ',' << (r.converged ? 1 : 0) << ',' << fmt17(r.residual_norm) << '\n';
  }
}

std::vector<DataRow> read_dataset_csv(std::istream& is, const SpeciesSet& species) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("dataset is empty");
  const auto header = split_csv_line(line);
  const std::size_t d = species.size();
  std::vector<std::string> expect{"id"};
  for (const auto& s : species.names()) expect.push_back("K_" + s);
  std::vector<std::size_t> col_k(d), col_se(d, SIZE_MAX);
  std::size_t col_id = SIZE_MAX, col_conv = SIZE_MAX, col_res = SIZE_MAX;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h == "id") col_id = c;
    else if (h == "converged") col_conv = c;
    else if (h == "residual_norm") col_res = c;
  }
  for (std::size_t s = 0; s < d; ++s) {
    const auto k = std::find(header.begin(), header.end(), "K_" + species[s]);
    if (k == header.end()) throw DataError("dataset has no column K_" + species[s]);
    col_k[s] = static_cast<std::size_t>(k - header.begin());
    const auto se = std::find(header.begin(), header.end(), "SE_" + species[s]);
    if (se != header.end()) col_se[s] = static_cast<std::size_t>(se - header.begin());
  }
  for (const auto& h : header)
    if (h.rfind("K_", 0) == 0 && !species.index_of(h.substr(2)))
      throw DataError("dataset column " + h + " names an unknown species");

  std::vector<DataRow> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()));
    DataRow r;
    r.id = col_id == SIZE_MAX ? static_cast<int>(rows.size()) + 1
                              : static_cast<int>(parse_double(cells[col_id], line_no));
    r.k.resize(static_cast<Eigen::Index>(d));
    r.standard_errors = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    for (std::size_t s = 0; s < d; ++s) {
      r.k(static_cast<Eigen::Index>(s)) = parse_double(cells[col_k[s]], line_no);
      if (!std::isfinite(r.k(static_cast<Eigen::Index>(s))))
        throw DataError("line " + std::to_string(line_no) + ": non-finite coefficient");
      if (col_se[s] != SIZE_MAX)
        r.standard_errors(static_cast<Eigen::Index>(s)) = parse_double(cells[col_se[s]], line_no);
    }
    if (col_conv != SIZE_MAX) r.converged = parse_double(cells[col_conv], line_no) != 0.0;
    if (col_res != SIZE_MAX) r.residual_norm = parse_double(cells[col_res], line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<DataRow> run_simulate(const PipelineConfig& cfg) {
  par::set_threads(cfg.threads);
  DataGenConfig dg = cfg.data;
  dg.seed = stage_seeds(cfg.seed).datagen;
  const auto points = generate_dataset(cfg.true_network(), dg);
  std::vector<DataRow> rows;
  rows.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    DataRow r;
    r.id = static_cast<int>(i) + 1;
    r.k = points[i].estimate.k;
    r.standard_errors = points[i].estimate.standard_errors;
    r.converged = points[i].estimate.converged;
    r.residual_norm = points[i].estimate.residual_norm;
    rows.push_back(std::move(r));
  }
  return rows;
}

GeometryStage run_geometry(const PipelineConfig& cfg) {
  par::set_threads(cfg.threads);
  const StageSeeds seeds = stage_seeds(cfg.seed);
  GeometryStage g;
  auto t0 = Clock::now();
  g.catalog = ConeCatalog(cfg.network, effective_dimension(cfg.network));
  g.timing["catalog"] = seconds_since(t0);
  t0 = Clock::now();
  g.discovery = discover_blocks(g.catalog, cfg.measure, cfg.n_discovery, seeds.discovery,
                                cfg.min_block_hits);
  g.timing["discovery"] = seconds_since(t0);
  t0 = Clock::now();
  g.table = estimate_volumes(g.catalog, cfg.measure, cfg.n_samples, seeds.volume,
                             &g.discovery.blocks);
  g.timing["volumes"] = seconds_since(t0);
  return g;
}

InferResult run_infer(const PipelineConfig& cfg, const std::vector<DataRow>* data) {
  const auto start = Clock::now();
  InferResult r;
  if (data) {
    r.data = *data;
  } else {
    const auto t0 = Clock::now();
    r.data = run_simulate(cfg);
    r.timing["simulate"] = seconds_since(t0);
  }
  r.geometry = run_geometry(cfg);
  for (const auto& [k, v] : r.geometry.timing) r.timing[k] = v;

  auto t0 = Clock::now();
  const auto d = static_cast<Eigen::Index>(cfg.network.species_count());
  std::vector<RateVector>& points = r.points;
  for (const DataRow& row : r.data) {
    if (row.k.size() != d) throw DataError("data point " + std::to_string(row.id) + " has the wrong dimension");
    if (!row.converged) continue;
    points.push_back(row.k);
    r.data_ids.push_back(row.id);
  }
  if (points.size() < r.data.size())
    r.warnings.push_back(std::to_string(r.data.size() - points.size()) +
                         " data point(s) dropped: estimate did not converge");
  r.assignment = assign_counts(points, r.geometry.table, r.geometry.catalog);
  r.model = build_model(r.geometry.table, r.geometry.catalog);
  r.dropped_unsupported = drop_unsupported(r.assignment, r.model);
  r.timing["counts"] = seconds_since(t0);

  std::size_t nearest = 0, excluded = 0;
  for (const auto& p : r.assignment.points) {
    if (p.status == PointStatus::nearest) ++nearest;
    if (p.block < 0) ++excluded;
  }
  if (nearest > 0)
    r.warnings.push_back(std::to_string(nearest) +
                         " data point(s) had an undiscovered signature and went to the nearest block");
  if (excluded > 0)
    r.warnings.push_back(std::to_string(excluded) + " data point(s) excluded from the counts");
  if (!r.geometry.discovery.quarantined.empty())
    r.warnings.push_back(std::to_string(r.geometry.discovery.quarantined.size()) +
                         " rare signature(s) quarantined during block discovery");
  if (r.assignment.usable() == 0) throw DataError("no usable data points");

  t0 = Clock::now();
  OptimizerConfig oc = cfg.optimizer;
  oc.seed = stage_seeds(cfg.seed).optimizer;
  r.fit = multistart(r.model, r.assignment.counts, oc);
  r.timing["optimizer"] = seconds_since(t0);
  for (const auto& diag : r.fit.diagnostics) r.warnings.push_back(diag);
  r.timing["total"] = seconds_since(start);
  return r;
}

std::string cone_label(const ConeIndex& reactions, int reaction_count) {
  std::string out;
  for (std::size_t i = 0; i < reactions.size(); ++i) {
    if (reaction_count > 9 && i > 0) out += ',';
    out += std::to_string(reactions[i] + 1);
  }
  return out;
}

json geometry_report(const PipelineConfig& cfg, const GeometryStage& g) {
  const ConeCatalog& cat = g.catalog;
  const int m = cat.reaction_count();
  const StageSeeds seeds = stage_seeds(cfg.seed);
  json rep;
  rep["version"] = kVersion;
  rep["kind"] = "geometry";
  rep["config"] = config_to_json(cfg);
  rep["seeds"] = {{"master", cfg.seed},
                  {"datagen", seeds.datagen},
                  {"discovery", seeds.discovery},
                  {"volume", seeds.volume},
                  {"optimizer", seeds.optimizer}};

  json cones = json::array(), degenerate = json::array();
  for (const Cone& c : cat.cones()) {
    const auto label = cone_label(c.reactions, m);
    cones.push_back({{"label", label},
                     {"reactions", one_based(c.reactions)},
                     {"degenerate", c.degenerate},
                     {"singular_ratio", c.singular_ratio}});
    if (c.degenerate) degenerate.push_back(label);
  }
  rep["catalog"] = {{"reactions", m},
                    {"species", cat.species_count()},
                    {"d_eff", cat.dimension()},
                    {"cones", cat.cones().size()},
                    {"nondegenerate", cat.nondegenerate().size()},
                    {"degenerate", degenerate},
                    {"cone_list", cones},
                    {"fingerprint", hex64(cat.fingerprint())}};

  const BlockDiscovery& disc = g.discovery;
  json blocks = json::array(), quarantined = json::array();
  for (std::size_t b = 0; b < disc.blocks.size(); ++b)
    blocks.push_back({{"id", "S" + std::to_string(b + 1)},
                      {"signature", signature_json(disc.blocks[b], cat)},
                      {"hits", disc.hits[b]}});
  for (std::size_t q = 0; q < disc.quarantined.size(); ++q)
    quarantined.push_back({{"signature", signature_json(disc.quarantined[q], cat)},
                           {"hits", disc.quarantined_hits[q]}});
  rep["discovery"] = {{"samples_per_cone", disc.samples_per_cone},
                      {"seed", disc.seed},
                      {"min_block_hits", cfg.min_block_hits},
                      {"blocks", blocks},
                      {"quarantined", quarantined}};

  const BlockTable& t = g.table;
  json entries = json::array();
  for (int c : cat.nondegenerate())
    for (int b = 0; b < static_cast<int>(t.block_count()); ++b) {
      const auto tally = t.tallies[static_cast<std::size_t>(c)][static_cast<std::size_t>(b)];
      if (tally == 0) continue;
      entries.push_back({{"cone", cone_label(cat.cones()[static_cast<std::size_t>(c)].reactions, m)},
                         {"block", "S" + std::to_string(b + 1)},
                         {"tally", tally},
                         {"volume", t.volume(c, b)},
                         {"se", t.standard_error(c, b)}});
    }
  rep["volumes"] = {{"samples_per_cone", t.samples_per_cone},
                    {"seed", t.seed},
                    {"measure", {{"kind", "gamma"}, {"alpha", t.measure.alpha}, {"lambda", t.measure.lambda}}},
                    {"blocks", t.block_count()},
                    {"reassigned", t.reassigned},
                    {"entries", entries},
                    {"fingerprint", hex64(t.fingerprint())}};

  rep["summary"] = {{"reactions", m},
                    {"d_eff", cat.dimension()},
                    {"cones", cat.cones().size()},
                    {"nondegenerate", cat.nondegenerate().size()},
                    {"blocks", t.block_count()}};
  json timing;
  double total = 0.0;
  for (const auto& [k, v] : g.timing) {
    timing[k] = v;
    total += v;
  }
  timing["total"] = total;
  rep["timing"] = timing;
  return rep;
}

json infer_report(const PipelineConfig& cfg, const InferResult& r) {
  json rep = geometry_report(cfg, r.geometry);
  rep["kind"] = "infer";

  json pts = json::array();
  for (const PointAssignment& p : r.assignment.points) {
    json e = {{"id", r.data_ids[p.index]},
              {"status", to_string(p.status)},
              {"k", theta_json(r.points[p.index])},
              {"residual", p.residual},
              {"signature", signature_json(p.signature, r.geometry.catalog)}};
    e["block"] = p.block >= 0 ? json("S" + std::to_string(p.block + 1)) : json(nullptr);
    pts.push_back(e);
  }
  std::size_t converged = r.data_ids.size();
  rep["data"] = {{"points", r.data.size()},
                 {"converged", converged},
                 {"usable", r.assignment.usable()},
                 {"flagged", r.assignment.flagged()},
                 {"dropped_unsupported", r.dropped_unsupported},
                 {"counts", r.assignment.counts.u},
                 {"assignment", pts}};

  const FitResult& f = r.fit;
  json minima = json::array();
  for (const Minimum& mn : f.minima)
    minima.push_back({{"neg_log_likelihood", mn.neg_ll}, {"theta", theta_json(mn.theta)}, {"hits", mn.hits}});
  rep["fit"] = {{"method", to_string(cfg.optimizer.method)},
                {"neg_log_likelihood", f.best_neg_ll},
                {"theta", theta_json(f.best_theta)},
                {"theta_simplex", theta_json(f.best_theta_simplex)},
                {"support", one_based(f.support)},
                {"hits", f.best_hits},
                {"restarts", f.restarts},
                {"rejected", f.rejected},
                {"success_rate", f.success_rate},
                {"minima", minima},
                {"monotonicity_violations", f.monotonicity_violations},
                {"updates", f.total_updates}};
  rep["summary"]["success_rate"] = f.success_rate;
  rep["summary"]["restarts"] = f.restarts;
  rep["summary"]["neg_log_likelihood"] = f.best_neg_ll;
  rep["summary"]["support"] = one_based(f.support);
  rep["console"] = console_block(f);
  rep["warnings"] = r.warnings;

  json timing;
  for (const auto& [k, v] : r.timing) timing[k] = v;
  rep["timing"] = timing;
  return rep;
}

std::string console_block(const FitResult& fit) {
  std::ostringstream os;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", fit.best_neg_ll);
  os << "Minimum of negative log-likelihood: " << buf << "\n";
  os << "Theta:\n";
  for (Eigen::Index i = 0; i < fit.best_theta.size(); ++i) {
    double v = fit.best_theta(i);
    if (std::abs(v) < 5e-5) v = 0.0;
    std::snprintf(buf, sizeof buf, "%-12.4g", v);
    os << buf;
  }
  os << "\n";
  std::snprintf(buf, sizeof buf, "%.0f", 100.0 * fit.success_rate);
  os << "Hits: " << fit.best_hits << " out of " << fit.restarts << ", " << buf << "%.\n";
  return os.str();
}

ReportSummary summarize_report(const json& report) {
  ReportSummary s;
  try {
    s.kind = report.at("kind").get<std::string>();
    const json& sum = report.at("summary");
    s.reactions = sum.at("reactions").get<int>();
    s.d_eff = sum.at("d_eff").get<int>();
    s.cones = sum.at("cones").get<std::uint64_t>();
    s.nondegenerate = sum.at("nondegenerate").get<std::uint64_t>();
    s.blocks = sum.at("blocks").get<std::uint64_t>();
    if (report.contains("timing") && report.at("timing").contains("total"))
      s.running_time = report.at("timing").at("total").get<double>();
    if (sum.contains("success_rate")) {
      s.has_fit = true;
      s.success_rate = sum.at("success_rate").get<double>();
      s.neg_ll = sum.at("neg_log_likelihood").get<double>();
      s.support = sum.at("support").get<std::vector<int>>();
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("report is missing required fields: ") + e.what());
  }
  return s;
}

std::string format_summary(const ReportSummary& s) {
  std::ostringstream os;
  char buf[256];
  os << "# reactions | # cones | # non-degenerate cones | # building blocks | running time | success rate\n";
  std::string rate = "-";
  if (s.has_fit) {
    std::snprintf(buf, sizeof buf, "%.0f%%", 100.0 * s.success_rate);
    rate = buf;
  }
  std::snprintf(buf, sizeof buf, "m=%-9d | %-7" PRIu64 " | %-22" PRIu64 " | %-17" PRIu64 " | %9.2f s  | %s\n",
                s.reactions, s.cones, s.nondegenerate, s.blocks, s.running_time, rate.c_str());
  os << buf;
  if (s.has_fit) {
    std::snprintf(buf, sizeof buf, "%.6f", s.neg_ll);
    os << "negative log-likelihood: " << buf << "\nsupport:";
    for (int r : s.support) os << ' ' << r;
    os << '\n';
  }
  return os.str();
}

std::map<std::string, std::string> plot_tables(const json& report) {
  std::map<std::string, std::string> out;
  try {
    std::ostringstream vol;
    vol << "cone,block,tally,volume,se\n";
    for (const json& e : report.at("volumes").at("entries"))
      vol << e.at("cone").get<std::string>() << ',' << e.at("block").get<std::string>() << ','
          << e.at("tally").get<std::uint64_t>() << ',' << fmt17(e.at("volume").get<double>()) << ','
          << fmt17(e.at("se").get<double>()) << '\n';
    out["volumes"] = vol.str();

    if (report.contains("fit")) {
      const json& f = report.at("fit");
      std::ostringstream th;
      th << "reaction,theta,theta_simplex\n";
      const auto t = f.at("theta").get<std::vector<double>>();
      const auto ts = f.at("theta_simplex").get<std::vector<double>>();
      for (std::size_t i = 0; i < t.size(); ++i)
        th << i + 1 << ',' << fmt17(t[i]) << ',' << fmt17(ts[i]) << '\n';
      out["theta"] = th.str();

      std::ostringstream mn;
      mn << "rank,neg_log_likelihood,hits\n";
      int rank = 1;
      for (const json& e : f.at("minima"))
        mn << rank++ << ',' << fmt17(e.at("neg_log_likelihood").get<double>()) << ','
           << e.at("hits").get<int>() << '\n';
      out["minima"] = mn.str();
    }
    if (report.contains("data")) {
      std::ostringstream pt;
      pt << "id,status,block";
      const auto species = report.at("config").at("species").get<std::vector<std::string>>();
      for (const auto& sp : species) pt << ",K_" << sp;
      pt << '\n';
      for (const json& e : report.at("data").at("assignment")) {
        pt << e.at("id").get<int>() << ',' << e.at("status").get<std::string>() << ','
           << (e.at("block").is_null() ? std::string() : e.at("block").get<std::string>());
        for (double v : e.at("k").get<std::vector<double>>()) pt << ',' << fmt17(v);
        pt << '\n';
      }
      out["points"] = pt.str();
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("report is malformed: ") + e.what());
  }
  return out;
}

}  // namespace crn
