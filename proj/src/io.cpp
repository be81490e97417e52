#include "bayestomo/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "bayestomo/errors.hpp"

namespace bayestomo::io {

namespace {

template <typename F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw MalformedInput(std::string("invalid ") + what + ": " + e.what());
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

// Numeric rows of a CSV stream; a leading non-numeric row is a header.
std::vector<std::vector<double>> read_numeric_csv(std::istream& is, std::size_t columns,
                                                  const char* what) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != columns) {
      throw MalformedInput(std::string("malformed ") + what + " line: '" + line + "'");
    }
    std::vector<double> row(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; numeric && i < cells.size(); ++i) {
      numeric = parse_double(cells[i], row[i]);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw MalformedInput(std::string("malformed ") + what + " line: '" + line + "'");
    }
    first = false;
    rows.push_back(std::move(row));
  }
  return rows;
}

Json matrix_part(const ComplexMatrix<double>& m, bool imag) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(imag ? m(i, j).imag() : m(i, j).real());
    }
    rows.push_back(row);
  }
  return rows;
}

Json interval(const CredibleInterval& c) { return Json::array({c.lo, c.hi}); }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

FiniteModel finite_model_from_json(const Json& j) {
  return guarded("finite model", [&] {
    FiniteModel m;
    m.outcomes = j.at("outcomes").get<std::vector<std::string>>();
    m.prob = j.at("prob").get<std::map<std::string, double>>();
    for (const auto& atom : m.outcomes) {
      if (!m.prob.contains(atom)) {
        throw MalformedInput("no probability given for atom '" + atom + "'");
      }
    }
    return m;
  });
}

Json to_json(const FiniteModel& model) {
  return {{"outcomes", model.outcomes}, {"prob", model.prob}};
}

StringAssignment string_assignment_from_json(const Json& j) {
  return guarded("string assignment", [&] {
    StringAssignment a;
    a.max_len = j.at("max_len").get<int>();
    a.prob = j.at("prob").get<std::map<std::string, double>>();
    for (const auto& [s, p] : a.prob) {
      BinaryCounts::from_string(s);
      if (s.empty() || static_cast<int>(s.size()) > a.max_len) {
        throw MalformedInput("string '" + s + "' has invalid length");
      }
    }
    return a;
  });
}

Json to_json(const StringAssignment& assign) {
  return {{"max_len", assign.max_len}, {"prob", assign.prob}};
}

DensityMatrix density_matrix_from_json(const Json& j) {
  return guarded("density matrix", [&] {
    if (j.contains("bloch")) {
      const auto v = j.at("bloch").get<std::vector<double>>();
      if (v.size() != 3) throw MalformedInput("bloch needs three components");
      return bloch_to_density(BlochVector(v[0], v[1], v[2]));
    }
    const int dim = j.at("dim").get<int>();
    const auto re = j.at("re").get<std::vector<std::vector<double>>>();
    std::vector<std::vector<double>> im;
    if (j.contains("im")) im = j.at("im").get<std::vector<std::vector<double>>>();
    if (dim < 2 || re.size() != static_cast<std::size_t>(dim) ||
        (!im.empty() && im.size() != static_cast<std::size_t>(dim))) {
      throw MalformedInput("density matrix rows do not match dim");
    }
    ComplexMatrix<double> m(dim, dim);
    for (int r = 0; r < dim; ++r) {
      if (re[r].size() != static_cast<std::size_t>(dim) ||
          (!im.empty() && im[r].size() != static_cast<std::size_t>(dim))) {
        throw MalformedInput("density matrix columns do not match dim");
      }
      for (int c = 0; c < dim; ++c) m(r, c) = {re[r][c], im.empty() ? 0.0 : im[r][c]};
    }
    return DensityMatrix(m);
  });
}

Json to_json(const DensityMatrix& rho) {
  return {{"dim", rho.dim()},
          {"re", matrix_part(rho.matrix(), false)},
          {"im", matrix_part(rho.matrix(), true)}};
}

Json to_json(const BlochVector& v) { return Json::array({v.x(), v.y(), v.z()}); }

MixingDensity mixing_density_from_json(const Json& j) {
  return guarded("mixing density", [&] {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "uniform") return MixingDensity::uniform();
    if (kind == "beta") return MixingDensity::beta(j.at("a").get<double>(), j.at("b").get<double>());
    if (kind == "tabulated") {
      const auto h = j.at("h").get<std::vector<double>>();
      const auto d = j.at("density").get<std::vector<double>>();
      return MixingDensity::tabulated(
          Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size())),
          Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size())));
    }
    throw MalformedInput("unknown mixing density kind '" + kind + "'");
  });
}

Json to_json(const MixingDensity& d) {
  switch (d.kind()) {
    case MixingDensity::Kind::uniform:
      return {{"kind", "uniform"}};
    case MixingDensity::Kind::beta:
      return {{"kind", "beta"}, {"a", d.a()}, {"b", d.b()}};
    case MixingDensity::Kind::tabulated:
      return {{"kind", "tabulated"},
              {"h", std::vector<double>(d.grid().begin(), d.grid().end())},
              {"density", std::vector<double>(d.values().begin(), d.values().end())}};
  }
  return {};
}

MixingDensity parse_mixing_density(std::string_view text) {
  if (text == "uniform") return MixingDensity::uniform();
  if (text.starts_with("beta:")) {
    const auto cells = split_csv(std::string(text.substr(5)));
    double a = 0.0, b = 0.0;
    if (cells.size() != 2 || !parse_double(cells[0], a) || !parse_double(cells[1], b)) {
      throw MalformedInput("beta prior must be written beta:A,B");
    }
    return MixingDensity::beta(a, b);
  }
  const std::filesystem::path path{std::string(text)};
  std::ifstream in(path);
  if (!in) throw MalformedInput("cannot read mixing density '" + std::string(text) + "'");
  if (path.extension() == ".json") {
    return guarded("mixing density", [&] { return mixing_density_from_json(Json::parse(in)); });
  }
  return read_density_csv(in);
}

void write_density_csv(std::ostream& os, const MixingDensity& d) {
  os << "h,density\n";
  for (Eigen::Index i = 0; i < d.grid().size(); ++i) {
    os << format_double(d.grid()[i]) << ',' << format_double(d.values()[i]) << '\n';
  }
}

MixingDensity read_density_csv(std::istream& is) {
  const auto rows = read_numeric_csv(is, 2, "density CSV");
  Eigen::VectorXd h(static_cast<Eigen::Index>(rows.size()));
  Eigen::VectorXd d(h.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    h[static_cast<Eigen::Index>(i)] = rows[i][0];
    d[static_cast<Eigen::Index>(i)] = rows[i][1];
  }
  return MixingDensity::tabulated(std::move(h), std::move(d));
}

BiasFunction bias_from_json(const Json& j) {
  return guarded("bias function", [&] {
    const auto family = j.at("family").get<std::string>();
    if (family == "constant") return BiasFunction::constant();
    if (family == "linear") return BiasFunction::linear();
    if (family == "power") return BiasFunction::power(j.at("kappa").get<double>());
    throw MalformedInput("unknown bias family '" + family + "'");
  });
}

Json to_json(const BiasFunction& bias) {
  switch (bias.family()) {
    case BiasFunction::Family::constant:
      return {{"family", "constant"}};
    case BiasFunction::Family::linear:
      return {{"family", "linear"}};
    case BiasFunction::Family::power:
      return {{"family", "power"}, {"kappa", bias.kappa()}};
  }
  return {};
}

PriorSpec prior_spec_from_json(const Json& j, const std::filesystem::path& base_dir) {
  return guarded("prior spec", [&] {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "bloch-uniform") return PriorSpec::bloch_uniform();
    if (kind == "feynman") return PriorSpec::feynman();
    if (kind == "technician") return technician_prior();
    if (kind == "purity-biased") {
      return PriorSpec::purity_biased(
          j.contains("bias") ? bias_from_json(j.at("bias")) : BiasFunction::constant());
    }
    if (kind == "discrete") {
      std::vector<std::pair<DensityMatrix, double>> hyp;
      for (const auto& h : j.at("hypotheses")) {
        hyp.emplace_back(density_matrix_from_json(h.at("state")), h.at("weight").get<double>());
      }
      return PriorSpec::discrete(std::move(hyp));
    }
    if (kind == "tabulated") {
      std::filesystem::path p = j.at("grid_csv").get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      std::ifstream in(p);
      if (!in) throw MalformedInput("cannot read grid CSV '" + p.string() + "'");
      const int res = j.value("resolution", BlochGrid::kDefaultResolution);
      return PriorSpec::tabulated(read_grid_csv(in, res));
    }
    throw MalformedInput("unknown prior kind '" + kind + "'");
  });
}

void write_grid_csv(std::ostream& os, const BlochGrid& grid) {
  os << "x,y,z,density\n";
  for (Eigen::Index c = 0; c < grid.size(); ++c) {
    const auto p = grid.centers().col(c);
    os << format_double(p.x()) << ',' << format_double(p.y()) << ',' << format_double(p.z())
       << ',' << format_double(grid.density_dv(c)) << '\n';
  }
}

BlochGrid read_grid_csv(std::istream& is, int resolution) {
  const BlochGrid layout = BlochGrid::uniform(resolution);
  std::vector<double> table(static_cast<std::size_t>(layout.size()), 0.0);
  for (const auto& row : read_numeric_csv(is, 4, "grid CSV")) {
    const Eigen::Index cell = layout.locate(Eigen::Vector3d(row[0], row[1], row[2]));
    if (cell < 0) throw MalformedInput("grid CSV point outside the Bloch ball");
    table[static_cast<std::size_t>(cell)] = row[3];
  }
  return BlochGrid::from_density(resolution, [&](const Eigen::Vector3d& p) {
    const Eigen::Index cell = layout.locate(p);
    return cell < 0 ? 0.0 : table[static_cast<std::size_t>(cell)];
  });
}

MeasurementRecord read_record_csv(std::istream& is) {
  MeasurementRecord rec;
  for (const auto& row : read_numeric_csv(is, 4, "record CSV")) {
    const Eigen::Vector3d a(row[0], row[1], row[2]);
    if (std::abs(a.norm() - 1.0) > 1e-6) {
      throw MalformedInput("record axis is not a unit vector");
    }
    if (row[3] != 1.0 && row[3] != -1.0) throw MalformedInput("record outcome must be +1 or -1");
    rec.push(std::abs(a.norm() - 1.0) <= MeasurementAxis::kUnitTol
                 ? MeasurementAxis(a)
                 : MeasurementAxis::normalized(a),
             static_cast<int>(row[3]));
  }
  return rec;
}

void write_record_csv(std::ostream& os, const MeasurementRecord& record) {
  os << "ax,ay,az,outcome\n";
  for (const auto& m : record) {
    const auto& a = m.axis.vector();
    os << format_double(a.x()) << ',' << format_double(a.y()) << ',' << format_double(a.z())
       << ',' << m.outcome << '\n';
  }
}

ExperimentPlan experiment_plan_from_json(const Json& j) {
  return guarded("experiment plan", [&] {
    const Json& p = j.at("preparation");
    const auto kind = p.at("kind").get<std::string>();
    Preparation prep = Preparation::fixed(DensityMatrix::maximally_mixed(2));
    if (kind == "fixed") {
      prep = Preparation::fixed(density_matrix_from_json(p.at("state")));
    } else if (kind == "mixture") {
      std::vector<std::pair<DensityMatrix, double>> comps;
      for (const auto& c : p.at("components")) {
        comps.emplace_back(density_matrix_from_json(c.at("state")), c.at("prob").get<double>());
      }
      prep = Preparation::mixture(std::move(comps));
    } else if (kind == "fixed-but-unknown") {
      std::vector<DensityMatrix> cands;
      for (const auto& c : p.at("candidates")) cands.push_back(density_matrix_from_json(c));
      prep = Preparation::fixed_but_unknown(std::move(cands));
    } else {
      throw MalformedInput("unknown preparation kind '" + kind + "'");
    }
    AxisSchedule schedule;
    if (j.contains("axis_schedule")) {
      const Json& s = j.at("axis_schedule");
      if (s.is_string() && s.get<std::string>() == "round-robin") {
        schedule.kind = AxisSchedule::RoundRobin{};
      } else if (s.is_string() && s.get<std::string>() == "random") {
        schedule.kind = AxisSchedule::Random{};
      } else if (s.is_object() && s.contains("fixed")) {
        const auto a = s.at("fixed").get<std::vector<double>>();
        if (a.size() != 3) throw MalformedInput("fixed axis needs three components");
        schedule.kind = AxisSchedule::Fixed{MeasurementAxis(a[0], a[1], a[2])};
      } else {
        throw MalformedInput("unknown axis schedule");
      }
    }
    const auto n = j.at("n_trials").get<std::int64_t>();
    if (n < 1) throw MalformedInput("n_trials must be >= 1");
    return ExperimentPlan{std::move(prep), schedule, static_cast<std::size_t>(n),
                          j.at("seed").get<std::uint64_t>()};
  });
}

Json to_json(const PosteriorSummary& s) {
  Json j;
  j["mean_state"] = to_json(s.mean_state);
  j["map_state"] = to_json(s.map_state);
  j["mean_bloch"] = s.mean_bloch ? to_json(*s.mean_bloch) : Json(nullptr);
  j["map_bloch"] = s.map_bloch ? to_json(*s.map_bloch) : Json(nullptr);
  if (s.credible) {
    static constexpr const char* kNames[] = {"x", "y", "z"};
    Json cred;
    for (int a = 0; a < 3; ++a) {
      const auto& c = (*s.credible)[static_cast<std::size_t>(a)];
      cred[kNames[a]] = {{"mean", c.mean},
                         {"68.3", interval(c.one_sigma)},
                         {"95.4", interval(c.two_sigma)}};
    }
    j["credible"] = cred;
  } else {
    j["credible"] = nullptr;
  }
  j["log_evidence"] = s.log_evidence;
  j["ess"] = s.ess;
  j["low_ess_warning"] = s.low_ess_warning;
  return j;
}

Json to_json(const ExchangeabilityReport& r) {
  return {{"symmetry_violation", r.symmetry_violation},
          {"consistency_violation", r.consistency_violation},
          {"normalization_violation", r.normalization_violation},
          {"exchangeable", r.exchangeable}};
}

Json to_json(const LemmaReport& r) {
  return {{"axiom1", r.axiom1}, {"axiom2", r.axiom2}, {"axiom3", r.axiom3},
          {"lemma1", r.lemma1}, {"lemma2", r.lemma2}, {"lemma3", r.lemma3},
          {"lemma4", r.lemma4}, {"pairs_checked", r.pairs_checked}};
}

Json to_json(const EmpiricalBloch& e) {
  static constexpr const char* kNames[] = {"x", "y", "z"};
  Json j;
  for (int a = 0; a < 3; ++a) {
    const auto& ax = e.axes[static_cast<std::size_t>(a)];
    j[kNames[a]] = {{"n_plus", ax.n_plus},
                    {"n_minus", ax.n_minus},
                    {"value", ax.value ? Json(*ax.value) : Json(nullptr)}};
  }
  return j;
}

Json to_json(const ScenarioReport& r) {
  Json j;
  j["scenario"] = to_string(r.scenario);
  j["n_trials"] = r.n_trials;
  j["seed"] = r.seed;
  j["prior"] = r.prior;
  j["expected_state"] = to_json(r.expected_state);
  j["empirical"] = to_json(r.empirical);
  j["posterior"] = to_json(r.summary);
  if (r.scenario == Scenario::fixed_technician) {
    j["true_hypothesis"] = r.true_hypothesis ? Json(*r.true_hypothesis) : Json(nullptr);
    Json hyps = Json::array();
    for (std::size_t h = 0; h < r.hypotheses.size(); ++h) {
      Json traj = Json::array();
      for (std::size_t t = 0; t < r.trajectory.size(); ++t) {
        traj.push_back(Json::array({t + 1, r.trajectory[t][h]}));
      }
      hyps.push_back({{"state", to_json(r.hypotheses[h])}, {"trajectory", traj}});
    }
    j["hypotheses"] = hyps;
  }
  return j;
}

void write_samples_csv(std::ostream& os, const std::vector<WeightedState>& samples) {
  os << "x,y,z,weight\n";
  for (const auto& s : samples) {
    const BlochVector b = density_to_bloch(s.state);
    os << format_double(b.x()) << ',' << format_double(b.y()) << ',' << format_double(b.z())
       << ',' << format_double(s.weight) << '\n';
  }
}

}  // namespace bayestomo::io
