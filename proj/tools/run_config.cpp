#include "run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hcf/error.hpp"

namespace hcf::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads one JSON object, remembering which keys were used so leftovers can be rejected.
class Section {
 public:
  Section(const json& doc, std::string path) : path_(std::move(path)) {
    if (!doc.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    doc_ = &doc;
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    used_.insert(key);
    return doc_->contains(key) && !doc_->at(key).is_null();
  }

  std::optional<double> number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const json& v = doc_->at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(field(key), "not finite");
    return x;
  }

  double number(const std::string& key, double fallback) { return number(key).value_or(fallback); }

  double positive(const std::string& key, double fallback) {
    const double x = number(key, fallback);
    if (!(x > 0.0)) throw ConfigError(field(key), "must be > 0");
    return x;
  }

  std::optional<double> positive(const std::string& key) {
    auto x = number(key);
    if (x && !(*x > 0.0)) throw ConfigError(field(key), "must be > 0");
    return x;
  }

  std::optional<std::int64_t> integer(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const json& v = doc_->at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::optional<std::string> string(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const json& v = doc_->at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::optional<Section> child(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return Section(doc_->at(key), field(key));
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : doc_->items()) out.push_back(key);
    return out;
  }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return doc_->at(key);
  }

  void finish() const {
    for (const auto& [key, value] : doc_->items())
      if (!used_.count(key)) throw ConfigError(field(key), "unknown field");
  }

 private:
  const json* doc_ = nullptr;
  std::string path_;
  std::set<std::string> used_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::optional<fs::path> path_field(Section& s, const std::string& key, const fs::path& base) {
  auto v = s.string(key);
  if (!v) return std::nullopt;
  if (v->empty()) throw ConfigError(s.field(key), "empty path");
  return resolve(base, *v);
}

int int_field(Section& s, const std::string& key, int fallback, int min) {
  const auto v = s.integer(key);
  if (!v) return fallback;
  if (*v < min) throw ConfigError(s.field(key), "must be >= " + std::to_string(min));
  return static_cast<int>(*v);
}

void read_geometry(Section s, FibreGeometry& g) {
  g.core_diameter = s.positive("core_diameter_m", g.core_diameter);
  g.mode_width = s.positive("mode_width_m", g.mode_width);
  g.length = s.positive("length_m", g.length);
  g.loss_db_per_m = s.number("loss_db_per_m", g.loss_db_per_m);
  g.interaction_radius_factor = s.positive("interaction_radius_factor", g.interaction_radius_factor);
  s.finish();
  try {
    validate(g);
  } catch (const InvariantError& e) {
    throw ConfigError(s.field(e.field()), e.what());
  }
}

void read_thermal(Section s, RunConfig& c) {
  c.temperature = s.positive("temperature_k", c.temperature);
  if (auto m = s.string("population_model")) {
    if (*m == "degeneracy_weighted") c.population_model = PopulationModel::degeneracy_weighted;
    else if (*m == "equal") c.population_model = PopulationModel::equal;
    else throw ConfigError(s.field("population_model"), "expected 'degeneracy_weighted' or 'equal'");
  }
  s.finish();
}

void read_fit(Section s, RunConfig& c) {
  c.fit.solver.max_iterations = int_field(s, "max_iterations", c.fit.solver.max_iterations, 1);
  c.fit.saturation_mask = s.number("saturation_mask", c.fit.saturation_mask);
  if (!(c.fit.saturation_mask >= 0.0 && c.fit.saturation_mask < 1.0))
    throw ConfigError(s.field("saturation_mask"), "must lie in [0, 1)");
  if (s.has("fixed")) {
    const json& f = s.raw("fixed");
    if (!f.is_array()) throw ConfigError(s.field("fixed"), "expected an array of parameter names");
    for (const auto& name : f) {
      if (!name.is_string()) throw ConfigError(s.field("fixed"), "expected parameter names");
      c.fit.fixed.push_back(name.get<std::string>());
    }
  }
  if (auto form = s.string("liad_form")) {
    if (*form == "rise_decay_product") c.liad_form = LiadModelForm::rise_decay_product;
    else if (*form == "double_exponential") c.liad_form = LiadModelForm::double_exponential;
    else throw ConfigError(s.field("liad_form"), "expected 'rise_decay_product' or 'double_exponential'");
  }
  if (auto init = s.child("initial")) {
    TransmissionModelParams p;
    p.effective_od = init->number("effective_od", 1.0);
    p.doppler_sigma = init->positive("doppler_sigma_hz", 177e6);
    p.global_offset = init->number("global_offset_hz", 0.0);
    p.baseline = init->number("baseline", 1.0);
    init->finish();
    c.fit_initial = p;
  }
  s.finish();
}

void read_monte_carlo(Section s, MonteCarloSettings& m) {
  if (auto n = s.integer("n_samples")) {
    if (*n < 1000) throw ConfigError(s.field("n_samples"), "must be >= 1000");
    m.n_samples = static_cast<std::uint64_t>(*n);
  }
  if (auto seed = s.integer("seed")) {
    if (*seed < 0) throw ConfigError(s.field("seed"), "must be >= 0");
    m.seed = static_cast<std::uint64_t>(*seed);
  }
  m.workers = static_cast<unsigned>(int_field(s, "workers", static_cast<int>(m.workers), 0));
  if (auto w = s.string("weighting")) {
    if (*w == "flux") m.weighting = SpeedWeighting::flux;
    else if (*w == "density") m.weighting = SpeedWeighting::density;
    else throw ConfigError(s.field("weighting"), "expected 'flux' or 'density'");
  }
  s.finish();
}

void read_spectrum(Section s, SpectrumSettings& sp) {
  if (auto m = s.string("model")) {
    if (*m != "transmission" && *m != "satspec") throw ConfigError(s.field("model"), "expected 'transmission' or 'satspec'");
    sp.model = *m;
  }
  sp.effective_od = s.number("effective_od", sp.effective_od);
  if (sp.effective_od < 0.0) throw ConfigError(s.field("effective_od"), "must be >= 0");
  sp.doppler_sigma = s.positive("doppler_sigma_hz");
  sp.global_offset = s.number("global_offset_hz", sp.global_offset);
  sp.baseline = s.number("baseline", sp.baseline);
  if (!(sp.baseline > 0.0 && sp.baseline <= 1.2)) throw ConfigError(s.field("baseline"), "must lie in (0, 1.2]");
  sp.f_min = s.number("f_min_hz", sp.f_min);
  sp.f_max = s.number("f_max_hz", sp.f_max);
  if (!(sp.f_max > sp.f_min)) throw ConfigError(s.field("f_max_hz"), "must exceed f_min_hz");
  sp.points = int_field(s, "points", sp.points, 2);
  sp.noise = s.number("noise", sp.noise);
  if (sp.noise < 0.0) throw ConfigError(s.field("noise"), "must be >= 0");
  sp.pump_saturation = s.number("pump_saturation", sp.pump_saturation);
  if (sp.pump_saturation < 0.0) throw ConfigError(s.field("pump_saturation"), "must be >= 0");
  sp.homogeneous_width = s.number("homogeneous_width_hz", sp.homogeneous_width);
  if (sp.homogeneous_width < 0.0) throw ConfigError(s.field("homogeneous_width_hz"), "must be >= 0");
  if (auto c = s.child("dip_contrasts")) {
    for (const auto& id : c->keys()) {
      const double x = *c->number(id);
      if (!(x >= 0.0 && x <= 1.0)) throw ConfigError(c->field(id), "must lie in [0, 1]");
      sp.dip_contrasts[id] = x;
    }
    c->finish();
  }
  s.finish();
}

void read_pump(Section s, PumpSettings& p, const fs::path& base) {
  p.rabi = s.number("rabi_hz", p.rabi);
  if (p.rabi < 0.0) throw ConfigError(s.field("rabi_hz"), "must be >= 0");
  p.detuning = s.number("detuning_hz", p.detuning);
  p.branching_to_dark = s.number("branching_to_dark", p.branching_to_dark);
  if (!(p.branching_to_dark > 0.0 && p.branching_to_dark <= 1.0))
    throw ConfigError(s.field("branching_to_dark"), "must lie in (0, 1]");
  p.pumped_from_F = int_field(s, "pumped_from_F", p.pumped_from_F, 0);
  p.sweep_max = s.positive("sweep_max_hz", p.sweep_max);
  p.sweep_points = int_field(s, "sweep_points", p.sweep_points, 2);
  p.velocity_classes = int_field(s, "velocity_classes", p.velocity_classes, 1);
  p.velocity_span_sigmas = s.positive("velocity_span_sigmas", p.velocity_span_sigmas);
  p.transit_report = path_field(s, "transit_report", base);
  s.finish();
}

void read_memory(Section s, MemorySettings& m, const fs::path& base) {
  m.od = s.number("od");
  m.effective_od = s.number("effective_od");
  if (m.od && *m.od < 0.0) throw ConfigError(s.field("od"), "must be >= 0");
  if (m.effective_od && *m.effective_od < 0.0) throw ConfigError(s.field("effective_od"), "must be >= 0");
  m.homogeneous_gamma = s.positive("homogeneous_gamma_hz");
  m.inhomogeneous_gamma = s.positive("inhomogeneous_gamma_hz");
  m.temperature = s.positive("temperature_k");
  m.bandwidth = s.positive("bandwidth_hz");
  m.rabi = s.number("rabi_hz");
  if (m.rabi && *m.rabi < 0.0) throw ConfigError(s.field("rabi_hz"), "must be >= 0");
  m.detuning = s.positive("detuning_hz");
  m.storage_time = s.positive("storage_time_s");
  m.pulse_duration = s.positive("pulse_duration_s");
  m.margin = s.number("margin", m.margin);
  if (!(m.margin >= 1.0)) throw ConfigError(s.field("margin"), "must be >= 1");
  m.coupling_efficiency = s.number("coupling_efficiency");
  if (m.coupling_efficiency && !(*m.coupling_efficiency > 0.0 && *m.coupling_efficiency <= 1.0))
    throw ConfigError(s.field("coupling_efficiency"), "must lie in (0, 1]");
  m.transit_report = path_field(s, "transit_report", base);
  m.pump_report = path_field(s, "pump_report", base);
  m.fit_report = path_field(s, "fit_report", base);
  s.finish();
}

}  // namespace

fs::path bundled_atomic_data() { return fs::path(HCF_DATA_DIR) / "cesium_d2.dat"; }

RunConfig parse_run_config(const json& doc, const fs::path& base) {
  RunConfig c;
  c.source = doc;
  Section root(doc, "");
  if (auto v = root.integer("schema_version"); v && *v != 1)
    throw ConfigError("schema_version", "unsupported version " + std::to_string(*v));
  c.atomic_data_path = path_field(root, "atomic_data_path", base).value_or(bundled_atomic_data());
  c.output_directory = path_field(root, "output_directory", base);
  c.ground_F = int_field(root, "ground_F", c.ground_F, 0);
  if (auto s = root.child("geometry")) read_geometry(*s, c.geometry);
  if (auto s = root.child("thermal")) read_thermal(*s, c);
  if (auto s = root.child("fit")) read_fit(*s, c);
  if (auto s = root.child("monte_carlo")) read_monte_carlo(*s, c.monte_carlo);
  if (auto s = root.child("spectrum")) read_spectrum(*s, c.spectrum);
  if (auto s = root.child("pump")) read_pump(*s, c.pump, base);
  if (auto s = root.child("memory")) read_memory(*s, c.memory, base);
  root.finish();
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot open '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("not valid JSON: ") + e.what());
  }
  return parse_run_config(doc, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

void check_paths(const RunConfig& c) {
  if (!fs::exists(c.atomic_data_path))
    throw ConfigError("atomic_data_path", "no such file '" + c.atomic_data_path.string() + "'");
  if (c.pump.transit_report && !fs::exists(*c.pump.transit_report))
    throw ConfigError("pump.transit_report", "no such file '" + c.pump.transit_report->string() + "'");
}

}  // namespace hcf::cli
