#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "bayestomo/bayes_engine.hpp"
#include "bayestomo/beta_bernoulli.hpp"
#include "bayestomo/errors.hpp"
#include "bayestomo/io.hpp"
#include "bayestomo/priors.hpp"
#include "bayestomo/prob_axioms.hpp"
#include "bayestomo/simulation.hpp"

namespace bayestomo::cli {

namespace fs = std::filesystem;
using io::Json;

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Effective configuration: the --config document overlaid with flags.
class Config {
 public:
  explicit Config(Json j) : j_(std::move(j)) {}

  bool has(const std::string& key) const { return j_.contains(key) && !j_[key].is_null(); }

  std::string str(const std::string& key, std::optional<std::string> fallback = {}) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ConfigError("missing required option '" + key + "'");
    }
    const Json& v = j_.at(key);
    return v.is_string() ? v.get<std::string>() : v.dump();
  }

  double num(const std::string& key, std::optional<double> fallback = {}) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      throw ConfigError("missing required option '" + key + "'");
    }
    const Json& v = j_.at(key);
    if (v.is_number()) return v.get<double>();
    try {
      std::size_t used = 0;
      const std::string s = v.get<std::string>();
      const double d = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("option '" + key + "' must be a number");
    }
  }

  std::uint64_t count(const std::string& key, std::optional<std::uint64_t> fallback = {}) const {
    if (!has(key) && fallback) return *fallback;
    const double d = num(key);
    if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19) {
      throw ConfigError("option '" + key + "' must be a nonnegative integer");
    }
    if (j_.at(key).is_number_unsigned()) return j_.at(key).get<std::uint64_t>();
    if (j_.at(key).is_string()) return std::stoull(j_.at(key).get<std::string>());
    return static_cast<std::uint64_t>(d);
  }

  std::uint64_t seed() const {
    if (!has("seed")) throw ConfigError("this command is stochastic and needs --seed");
    return count("seed");
  }

  const Json& json() const { return j_; }

 private:
  Json j_;
};

/// Collects output files for the manifest.
class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir_.string() + "'");
  }

  std::ofstream open(const std::string& name) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw ConfigError("output directory is not writable: " + (dir_ / name).string());
    files_.push_back(name);
    return f;
  }

  void write_json(const std::string& name, const Json& j) { open(name) << j.dump(2) << '\n'; }

  void write_manifest(const std::string& command, const Config& cfg,
                      std::optional<std::uint64_t> seed) {
    Json m;
    m["tool"] = "bayestomo";
    m["version"] = BAYESTOMO_VERSION;
    m["command"] = command;
    m["config"] = cfg.json();
    m["seed"] = seed ? Json(*seed) : Json(nullptr);
    m["outputs"] = files_;
    std::ofstream f(dir_ / "manifest.json", std::ios::binary);
    if (!f) throw ConfigError("output directory is not writable");
    f << m.dump(2) << '\n';
  }

  const fs::path& path() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

PriorSpec parse_prior(const Config& cfg, const std::string& key, const std::string& fallback) {
  const std::string text = cfg.str(key, fallback);
  if (text == "bloch-uniform") return PriorSpec::bloch_uniform();
  if (text == "feynman") return PriorSpec::feynman();
  if (text == "technician") return technician_prior();
  if (text == "purity-biased") {
    const std::string family = cfg.str("bias", "constant");
    if (family == "constant") return PriorSpec::purity_biased(BiasFunction::constant());
    if (family == "linear") return PriorSpec::purity_biased(BiasFunction::linear());
    if (family == "power") {
      return PriorSpec::purity_biased(BiasFunction::power(cfg.num("kappa", 1.0)));
    }
    throw ConfigError("unknown bias family '" + family + "'");
  }
  const fs::path path(text);
  std::ifstream in(path);
  if (!in) throw ConfigError("unknown prior '" + text + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("prior file is not valid JSON: " + std::string(e.what()));
  }
  return io::prior_spec_from_json(j, path.parent_path());
}

Json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void cmd_classical(const Config& cfg, OutputDir& out) {
  const BinaryCounts counts = BinaryCounts::parse(cfg.str("counts"));
  const MixingDensity prior = io::parse_mixing_density(cfg.str("prior", "uniform"));
  const auto grid = cfg.count("grid", kDefaultPosteriorGrid);
  const MixingDensity post = posterior_density(counts, prior, grid);
  const PeakWidth pw = peak_width(post);
  const double le = log_evidence(counts, prior);

  Json j;
  j["counts"] = {counts.n_a, counts.n_b};
  j["prior"] = prior.describe();
  j["h_exp"] = counts.total() > 0
                   ? Json(static_cast<double>(counts.n_a) / static_cast<double>(counts.total()))
                   : Json(nullptr);
  j["mode"] = pw.mode;
  j["width"] = pw.width;
  j["log_evidence"] = le;
  j["evidence"] = std::exp(le);
  j["log_evidence_quadrature"] = log_evidence_quadrature(counts, prior);
  j["grid_points"] = grid;
  j["richardson_error"] = richardson_error(post);
  out.write_json("classical.json", j);
  auto csv = out.open("posterior.csv");
  io::write_density_csv(csv, post);
}

void cmd_scenario(const Config& cfg, OutputDir& out) {
  ScenarioOptions opts;
  opts.grid_resolution = static_cast<int>(cfg.count("grid_resolution", BlochGrid::kDefaultResolution));
  const auto n = cfg.count("n", 1000);
  if (n < 1) throw ConfigError("--n must be >= 1");
  const ScenarioReport rep = scenario_suite(cfg.str("name"), n, cfg.seed(), opts);
  out.write_json("scenario.json", io::to_json(rep));
  auto rec = out.open("record.csv");
  io::write_record_csv(rec, rep.record);
  if (!rep.trajectory.empty()) {
    auto traj = out.open("trajectory.csv");
    traj << "trial";
    for (std::size_t h = 0; h < rep.hypotheses.size(); ++h) traj << ",p" << h;
    traj << '\n';
    for (std::size_t t = 0; t < rep.trajectory.size(); ++t) {
      traj << t + 1;
      for (double p : rep.trajectory[t]) traj << ',' << io::format_double(p);
      traj << '\n';
    }
  }
}

std::optional<std::uint64_t> cmd_posterior(const Config& cfg, OutputDir& out) {
  std::ifstream in(cfg.str("record"));
  if (!in) throw ConfigError("cannot read record '" + cfg.str("record") + "'");
  const MeasurementRecord record = io::read_record_csv(in);
  const PriorSpec prior = parse_prior(cfg, "prior", "bloch-uniform");
  const bool discrete = std::holds_alternative<PriorSpec::Discrete>(prior.kind);
  const std::string method = cfg.str("method", discrete ? "discrete" : "grid");

  Json j;
  j["prior"] = prior.name();
  j["method"] = method;
  j["n_measurements"] = record.size();
  std::optional<std::uint64_t> seed;
  PosteriorSummary summary;
  if (method == "grid") {
    const int res = static_cast<int>(cfg.count("grid_resolution", BlochGrid::kDefaultResolution));
    const BlochGrid post = update_grid(make_prior_grid(prior, res), record);
    summary = summarize(post);
    auto csv = out.open("grid.csv");
    io::write_grid_csv(csv, post);
  } else if (method == "ensemble") {
    seed = cfg.seed();
    const auto particles = cfg.count("particles", 10000);
    const PosteriorEnsemble post = update(prior, record, particles, *seed);
    summary = summarize(post);
  } else if (method == "discrete") {
    summary = summarize(update_discrete(discrete_prior(prior), record));
  } else {
    throw ConfigError("unknown method '" + method + "' (grid, ensemble, discrete)");
  }
  j["summary"] = io::to_json(summary);
  if (!discrete && summary.map_bloch) {
    const double b = bias_report(prior, *summary.map_bloch);
    j["bias_report"] = std::isfinite(b) ? Json(b) : Json("-inf");
  }
  try {
    j["empirical"] = io::to_json(empirical_bloch(record));
  } catch (const DomainError&) {
    j["empirical"] = nullptr;
  }
  out.write_json("posterior.json", j);
  return seed;
}

std::uint64_t cmd_sample_prior(const Config& cfg, OutputDir& out, std::ostream& err) {
  const PriorSpec prior = parse_prior(cfg, "kind", "bloch-uniform");
  const int dim = static_cast<int>(cfg.count("dim", 2));
  const auto n = cfg.count("n", 10000);
  const std::uint64_t seed = cfg.seed();
  const auto samples = sample_prior(prior, dim, n, seed);
  auto csv = out.open("samples.csv");
  if (dim == 2) {
    io::write_samples_csv(csv, samples);
  } else {
    csv << "purity,weight";
    for (int i = 0; i < dim; ++i) csv << ",p" << i + 1;
    csv << '\n';
    for (const auto& s : samples) {
      csv << io::format_double(purity(s.state)) << ',' << io::format_double(s.weight);
      const Eigen::VectorXd ev = s.state.eigenvalues().reverse();
      for (Eigen::Index i = 0; i < ev.size(); ++i) csv << ',' << io::format_double(ev[i]);
      csv << '\n';
    }
  }
  err << "wrote " << samples.size() << " samples to " << (out.path() / "samples.csv").string()
      << '\n';
  return seed;
}

void cmd_check_exchangeable(const Config& cfg, OutputDir& out) {
  const double tol = cfg.num("tol", kExchangeabilityTol);
  Json j;
  j["tol"] = tol;
  if (cfg.has("input")) {
    const Json doc = parse_json_file(cfg.str("input"));
    j["source"] = cfg.str("input");
    if (doc.contains("outcomes")) {
      const FiniteModel model = io::finite_model_from_json(doc);
      j["lemmas"] = io::to_json(check_lemmas(model));
      j["valid"] = model.is_valid();
    } else {
      j["exchangeability"] = io::to_json(check_exchangeable(io::string_assignment_from_json(doc), tol));
    }
  } else {
    const MixingDensity mixing = io::parse_mixing_density(cfg.str("mixing", "uniform"));
    const int max_len = static_cast<int>(cfg.count("max_len", 10));
    const StringAssignment assign = de_finetti_assignment(mixing, max_len);
    j["source"] = "de Finetti mixture " + mixing.describe();
    j["max_len"] = max_len;
    j["exchangeability"] = io::to_json(check_exchangeable(assign, tol));
    out.write_json("assignment.json", io::to_json(assign));
  }
  out.write_json("exchangeability.json", j);
}

std::string option_key(const std::string& flag) {
  std::string k = flag;
  while (!k.empty() && k.front() == '-') k.erase(k.begin());
  for (char& c : k) {
    if (c == '-') c = '_';
  }
  return k;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian inference over density matrices"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::map<CLI::Option*, std::string> flags;
  std::map<std::string, std::string> values;
  auto add = [&](CLI::App* sub, const std::string& flag, const std::string& help) {
    const std::string key = option_key(flag);
    flags[sub->add_option(flag, values[key], help)] = key;
  };

  add(&app, "--config", "JSON config file; flags override its values");
  add(&app, "--seed", "RNG seed (required by stochastic commands)");
  add(&app, "--out", "output directory");

  auto* classical = app.add_subcommand("classical", "Beta-Bernoulli posterior for binary counts");
  add(classical, "--counts", "N_A,N_B");
  add(classical, "--prior", "uniform | beta:A,B | tabulated .json/.csv");
  add(classical, "--grid", "posterior grid points");

  auto* scenario = app.add_subcommand("scenario", "simulate a preparation scenario");
  add(scenario, "--name", "mixed-air | coin-flip-technician | fixed-technician");
  add(scenario, "--n", "number of trials");
  add(scenario, "--grid-resolution", "Bloch grid points per axis");

  auto* posterior = app.add_subcommand("posterior", "posterior from a measurement record CSV");
  add(posterior, "--record", "CSV of ax,ay,az,outcome");
  add(posterior, "--prior", "bloch-uniform | feynman | purity-biased | technician | prior .json");
  add(posterior, "--bias", "constant | linear | power (purity-biased)");
  add(posterior, "--kappa", "power-bias exponent");
  add(posterior, "--method", "grid | ensemble | discrete");
  add(posterior, "--particles", "ensemble size");
  add(posterior, "--grid-resolution", "Bloch grid points per axis");

  auto* sample = app.add_subcommand("sample-prior", "draw density matrices from a prior");
  add(sample, "--kind", "bloch-uniform | feynman | purity-biased | technician | prior .json");
  add(sample, "--bias", "constant | linear | power (purity-biased)");
  add(sample, "--kappa", "power-bias exponent");
  add(sample, "--dim", "Hilbert-space dimension");
  add(sample, "--n", "number of samples");

  auto* exch = app.add_subcommand("check-exchangeable",
                                  "check an assignment or finite model, or a de Finetti mixture");
  add(exch, "--input", "assignment or finite-model JSON");
  add(exch, "--mixing", "uniform | beta:A,B | tabulated .json/.csv");
  add(exch, "--max-len", "longest string");
  add(exch, "--tol", "violation tolerance");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  if (!argv.empty()) argv.pop_back();  // program name
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    Json cfg_json = Json::object();
    if (!values["config"].empty()) cfg_json = parse_json_file(values["config"]);
    if (!cfg_json.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [opt, key] : flags) {
      if (opt->count() > 0 && key != "config") cfg_json[key] = values[key];
    }
    std::string command;
    if (const auto subs = app.get_subcommands(); !subs.empty()) {
      command = subs.front()->get_name();
    } else if (cfg_json.contains("command")) {
      command = cfg_json.at("command").get<std::string>();
    } else {
      throw ConfigError("no command given");
    }
    cfg_json["command"] = command;
    const Config cfg(cfg_json);
    OutputDir dir(cfg.str("out", "bayestomo-out"));

    std::optional<std::uint64_t> seed;
    if (command == "classical") {
      cmd_classical(cfg, dir);
    } else if (command == "scenario") {
      seed = cfg.seed();
      cmd_scenario(cfg, dir);
    } else if (command == "posterior") {
      seed = cmd_posterior(cfg, dir);
    } else if (command == "sample-prior") {
      seed = cmd_sample_prior(cfg, dir, err);
    } else if (command == "check-exchangeable") {
      cmd_check_exchangeable(cfg, dir);
    } else {
      throw ConfigError("unknown command '" + command + "'");
    }
    dir.write_manifest(command, cfg, seed);
    out << (dir.path() / "manifest.json").string() << '\n';
    return kExitOk;
  } catch (const ImpossibleData& e) {
    err << "impossible data: " << e.what() << '\n';
    return kExitImpossibleData;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const MalformedInput& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NotApplicable& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace bayestomo::cli
