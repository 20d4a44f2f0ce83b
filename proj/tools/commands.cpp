#include "commands.hpp"

#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "hcf/error.hpp"
#include "hcf/fitting.hpp"
#include "hcf/memory_metrics.hpp"
#include "hcf/pump_transit.hpp"
#include "hcf/report.hpp"
#include "hcf/spectral_model.hpp"
#include "hcf/spectrum.hpp"
#include "run_config.hpp"

namespace hcf::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Flag values shared by the subcommands. Options that were not given keep count() == 0.
struct Flags {
  std::string config;
  std::string output_dir;
  std::string atomic_data;
  std::string input;
  double temperature = 0.0;
  int ground_F = 0;
  std::uint64_t seed = 0;
  std::uint64_t n_samples = 0;
  unsigned workers = 0;
  double effective_od = 0.0;
  double noise = 0.0;
  double rabi = 0.0;
  std::string transit_report;
  std::string pump_report;
  std::string fit_report;
  bool allow_unconverged = false;

  std::map<std::string, CLI::Option*> options;

  bool given(const std::string& name) const {
    auto it = options.find(name);
    return it != options.end() && it->second->count() > 0;
  }
};

/// Collected outputs, written to temporaries and renamed into place only once all are ready.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }

  std::vector<fs::path> commit() {
    fs::create_directories(dir_);
    std::vector<fs::path> temps;
    const std::string suffix = ".tmp." + std::to_string(::getpid());
    try {
      for (const auto& [name, content] : files_) {
        temps.push_back(dir_ / ("." + name + suffix));
        std::ofstream out(temps.back(), std::ios::binary | std::ios::trunc);
        out << content;
        out.close();
        if (!out) throw std::runtime_error("cannot write " + temps.back().string());
      }
    } catch (...) {
      for (const auto& t : temps) fs::remove(t);
      throw;
    }
    std::vector<fs::path> written;
    for (std::size_t i = 0; i < files_.size(); ++i) {
      written.push_back(dir_ / files_[i].first);
      fs::rename(temps[i], written.back());
    }
    return written;
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

/// Input digest over the command, the resolved configuration and every input file read.
class Digest {
 public:
  explicit Digest(const std::string& command) { state_ = fnv1a64(command, state_); }
  void text(const std::string& s) {
    state_ = fnv1a64(std::to_string(s.size()) + ":", state_);
    state_ = fnv1a64(s, state_);
  }
  std::string hex() const { return digest_hex(state_); }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

struct Context {
  RunConfig config;
  json overrides = json::object();
  fs::path output_dir;
  Digest digest;
  AtomicSystem system;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

Context prepare(const std::string& command, const Flags& f) {
  Context ctx{f.config.empty() ? parse_run_config(json::object(), fs::current_path()) : load_run_config(f.config),
              json::object(), fs::path("."), Digest(command), AtomicSystem{}};
  RunConfig& c = ctx.config;
  if (f.given("--atomic-data")) {
    c.atomic_data_path = f.atomic_data;
    ctx.overrides["atomic_data_path"] = f.atomic_data;
  }
  if (f.given("--temperature")) {
    if (!(f.temperature > 0.0)) throw ConfigError("--temperature", "must be > 0");
    c.temperature = f.temperature;
    ctx.overrides["temperature_k"] = f.temperature;
  }
  if (f.given("--ground-F")) {
    c.ground_F = f.ground_F;
    ctx.overrides["ground_F"] = f.ground_F;
  }
  if (f.given("--seed")) {
    c.monte_carlo.seed = f.seed;
    ctx.overrides["seed"] = f.seed;
  }
  if (f.given("--n-samples")) {
    if (f.n_samples < 1000) throw ConfigError("--n-samples", "must be >= 1000");
    c.monte_carlo.n_samples = f.n_samples;
    ctx.overrides["n_samples"] = f.n_samples;
  }
  if (f.given("--workers")) c.monte_carlo.workers = f.workers;  // does not change results
  if (f.given("--effective-od")) {
    if (f.effective_od < 0.0) throw ConfigError("--effective-od", "must be >= 0");
    c.spectrum.effective_od = f.effective_od;
    ctx.overrides["effective_od"] = f.effective_od;
  }
  if (f.given("--noise")) {
    if (f.noise < 0.0) throw ConfigError("--noise", "must be >= 0");
    c.spectrum.noise = f.noise;
    ctx.overrides["noise"] = f.noise;
  }
  if (f.given("--rabi")) {
    if (f.rabi < 0.0) throw ConfigError("--rabi", "must be >= 0");
    c.pump.rabi = f.rabi;
    ctx.overrides["rabi_hz"] = f.rabi;
  }
  if (f.given("--transit-report")) {
    if (command == "pump-efficiency") c.pump.transit_report = f.transit_report;
    else c.memory.transit_report = f.transit_report;
    ctx.overrides["transit_report"] = f.transit_report;
  }
  if (f.given("--pump-report")) {
    c.memory.pump_report = f.pump_report;
    ctx.overrides["pump_report"] = f.pump_report;
  }
  if (f.given("--fit-report")) {
    c.memory.fit_report = f.fit_report;
    ctx.overrides["fit_report"] = f.fit_report;
  }
  if (f.given("--output-dir")) ctx.output_dir = f.output_dir;
  else if (c.output_directory) ctx.output_dir = *c.output_directory;

  check_paths(c);
  const std::string atomic_text = read_text_file(c.atomic_data_path);
  ctx.system = parse_atomic_data(atomic_text);
  ctx.digest.text(c.source.dump());
  ctx.digest.text(ctx.overrides.dump());
  ctx.digest.text(atomic_text);
  return ctx;
}

std::uint64_t require_seed(const RunConfig& c) {
  if (!c.monte_carlo.seed) throw ConfigError("monte_carlo.seed", "randomized commands need an explicit seed (--seed)");
  return *c.monte_carlo.seed;
}

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

json model_params_json(const TransmissionModelParams& p) {
  return {{"effective_od", p.effective_od},
          {"doppler_sigma_hz", p.doppler_sigma},
          {"global_offset_hz", p.global_offset},
          {"baseline", p.baseline}};
}

void print_written(std::ostream& out, const std::vector<fs::path>& files) {
  for (const auto& f : files) out << "wrote " << f.string() << "\n";
}

int finish_fit(const std::string& kind, const std::string& file, Context& ctx, const FitResult& fit,
               const std::string& input, const Flags& f, std::ostream& out, std::ostream& err) {
  json result = to_json(fit);
  result["input"] = input;
  Outputs outputs(ctx.output_dir);
  outputs.add(file, dump(report_envelope(kind, result, ctx.digest.hex())));
  print_written(out, outputs.commit());
  for (const auto& p : fit.parameters) out << p.name << " = " << p.value << " +/- " << p.uncertainty << "\n";
  for (const auto& w : fit.warnings) err << "warning: " << w << "\n";
  if (!fit.converged) {
    err << "fit did not converge (" << fit.solver_status << ")\n";
    if (!f.allow_unconverged) return kExitUnconverged;
  }
  return kExitOk;
}

std::string read_input(const Flags& f, Context& ctx) {
  if (f.input.empty()) throw ConfigError("--input", "an input CSV is required");
  if (!fs::exists(f.input)) throw ConfigError("--input", "no such file '" + f.input + "'");
  std::string text = read_text_file(f.input);
  ctx.digest.text(text);
  return text;
}

// --------------------------------------------------------------------------

int simulate_spectrum(const Flags& f, std::ostream& out, std::ostream&) {
  Context ctx = prepare("simulate-spectrum", f);
  const RunConfig& c = ctx.config;
  const SpectrumSettings& s = c.spectrum;

  TransmissionModelParams params;
  params.effective_od = s.effective_od;
  params.doppler_sigma = s.doppler_sigma.value_or(doppler_sigma(ctx.system, c.temperature));
  params.global_offset = s.global_offset;
  params.baseline = s.baseline;
  const std::vector<double> freqs = grid(s.f_min, s.f_max, s.points);

  Spectrum spectrum;
  json settings = {{"model", s.model}, {"ground_F", c.ground_F}, {"temperature_k", c.temperature},
                   {"parameters", model_params_json(params)}};
  if (s.model == "satspec") {
    SatSpecModelParams sat;
    sat.background = params;
    sat.pump_saturation = s.pump_saturation;
    sat.homogeneous_width = s.homogeneous_width;
    sat.dip_contrasts = s.dip_contrasts;
    spectrum = satspec_spectrum(ctx.system, c.ground_F, sat, freqs);
    settings["pump_saturation"] = sat.pump_saturation;
    settings["dip_fwhm_hz"] = dip_fwhm(ctx.system, sat);
    settings["dip_contrasts"] = sat.dip_contrasts;
  } else {
    spectrum = transmission_spectrum(ctx.system, c.ground_F, params, freqs);
  }

  settings["noise"] = s.noise;
  settings["seed"] = nullptr;
  if (s.noise > 0.0) {
    const std::uint64_t seed = require_seed(c);
    settings["seed"] = seed;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, s.noise);
    Eigen::VectorXd t = spectrum.transmission();
    for (auto& v : t) v = std::max(0.0, v + noise(rng));
    spectrum = Spectrum(spectrum.frequency(), t, Eigen::VectorXd::Constant(t.size(), s.noise));
  }

  Eigen::Index argmin = 0;
  spectrum.transmission().minCoeff(&argmin);
  settings["points"] = spectrum.size();
  settings["f_min_hz"] = s.f_min;
  settings["f_max_hz"] = s.f_max;
  settings["min_transmission"] = {{"frequency_hz", spectrum.frequency()[argmin]},
                                  {"transmission", spectrum.transmission()[argmin]}};
  settings["spectrum_csv"] = "spectrum.csv";

  Outputs outputs(ctx.output_dir);
  outputs.add("spectrum.csv", write_spectrum_csv(spectrum));
  outputs.add("spectrum.json", dump(report_envelope("simulate-spectrum", settings, ctx.digest.hex())));
  print_written(out, outputs.commit());
  return kExitOk;
}

int fit_spectrum(const Flags& f, std::ostream& out, std::ostream& err) {
  Context ctx = prepare("fit-spectrum", f);
  const Spectrum spectrum = parse_spectrum_csv(read_input(f, ctx));
  const RunConfig& c = ctx.config;
  const TransmissionModelParams init =
      c.fit_initial.value_or(default_transmission_guess(ctx.system, c.ground_F, spectrum));
  const FitResult fit = fit_transmission(ctx.system, c.ground_F, spectrum, init, c.fit);
  return finish_fit("fit-spectrum", "fit_spectrum.json", ctx, fit, f.input, f, out, err);
}

int fit_satspec_cmd(const Flags& f, std::ostream& out, std::ostream& err) {
  Context ctx = prepare("fit-satspec", f);
  const Spectrum spectrum = parse_spectrum_csv(read_input(f, ctx));
  const RunConfig& c = ctx.config;
  SatSpecModelParams init;
  init.background = c.fit_initial.value_or(default_transmission_guess(ctx.system, c.ground_F, spectrum));
  init.pump_saturation = c.spectrum.pump_saturation;
  init.homogeneous_width = c.spectrum.homogeneous_width;
  init.dip_contrasts = c.spectrum.dip_contrasts;
  const FitResult fit = fit_satspec(ctx.system, c.ground_F, spectrum, init, c.fit);
  return finish_fit("fit-satspec", "fit_satspec.json", ctx, fit, f.input, f, out, err);
}

int fit_power(const Flags& f, std::ostream& out, std::ostream& err) {
  Context ctx = prepare("fit-power", f);
  const NumericTable table = parse_numeric_csv(read_input(f, ctx), {"power", "width_hz", "width_sigma_hz"});
  std::vector<PowerPoint> points;
  for (const auto& row : table.rows) points.push_back({row[0], row[1], row[2]});
  const FitResult fit = fit_power_broadening(points, ctx.config.fit);
  return finish_fit("fit-power", "fit_power.json", ctx, fit, f.input, f, out, err);
}

int fit_liad(const Flags& f, std::ostream& out, std::ostream& err) {
  Context ctx = prepare("fit-liad", f);
  const NumericTable table = parse_numeric_csv(read_input(f, ctx), {"time_s", "effective_od"}, {"sigma"});
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  TimeSeries series;
  series.time.resize(n);
  series.effective_od.resize(n);
  const bool weighted = table.columns.size() == 3;
  if (weighted) series.sigma = Eigen::VectorXd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    series.time[i] = row[0];
    series.effective_od[i] = row[1];
    if (weighted) (*series.sigma)[i] = row[2];
  }
  const FitResult fit = fit_liad_transient(series, ctx.config.liad_form, ctx.config.fit);
  return finish_fit("fit-liad", "fit_liad.json", ctx, fit, f.input, f, out, err);
}

int transit_mc(const Flags& f, std::ostream& out, std::ostream&) {
  Context ctx = prepare("transit-mc", f);
  const RunConfig& c = ctx.config;
  const std::uint64_t seed = require_seed(c);
  TransitOptions options;
  options.workers = c.monte_carlo.workers;
  options.weighting = c.monte_carlo.weighting;
  const TransitStats stats =
      transit_time_mc(c.geometry, ctx.system, c.temperature, c.monte_carlo.n_samples, seed, options);
  json result = to_json(stats);
  result["temperature_k"] = c.temperature;
  result["geometry"] = {{"core_diameter_m", c.geometry.core_diameter},
                        {"mode_width_m", c.geometry.mode_width},
                        {"interaction_radius_m", c.geometry.interaction_radius()}};
  Outputs outputs(ctx.output_dir);
  outputs.add("transit.json", dump(report_envelope("transit-mc", result, ctx.digest.hex())));
  print_written(out, outputs.commit());
  out << "mean transit " << stats.mean * 1e9 << " ns (standard error " << stats.standard_error * 1e9 << " ns)\n";
  return kExitOk;
}

json read_report(const fs::path& path, const std::string& kind, Context& ctx) {
  const std::string text = read_text_file(path);
  ctx.digest.text(text);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": not valid JSON");
  }
  return report_result(doc, kind);
}

TransitDistribution transit_from_report(const json& r, const fs::path& path) {
  TransitStats stats;
  try {
    stats.distribution_quantiles = r.at("distribution_quantiles_s").get<std::vector<double>>();
    stats.mean = r.at("mean_s").get<double>();
  } catch (const json::exception&) {
    throw ParseError(path.string() + ": transit report lacks distribution_quantiles_s");
  }
  if (stats.distribution_quantiles.empty()) throw ParseError(path.string() + ": empty transit distribution");
  return transit_distribution(stats);
}

int pump_efficiency(const Flags& f, std::ostream& out, std::ostream&) {
  Context ctx = prepare("pump-efficiency", f);
  const RunConfig& c = ctx.config;
  const PumpSettings& p = c.pump;

  TransitDistribution transit;
  std::string transit_source = "analytic";
  if (p.transit_report) {
    transit = transit_from_report(read_report(*p.transit_report, "transit-mc", ctx), *p.transit_report);
    transit_source = p.transit_report->filename().string();
  } else {
    transit = analytic_transit_distribution(c.geometry, ctx.system, c.temperature, c.monte_carlo.weighting);
  }

  PumpConfig config;
  config.rabi_frequency = p.rabi;
  config.detuning = p.detuning;
  config.branching_to_dark = p.branching_to_dark;
  config.temperature = c.temperature;
  config.pumped_from_F = p.pumped_from_F;
  config.velocity_classes = p.velocity_classes;
  config.velocity_span_sigmas = p.velocity_span_sigmas;

  const double sigma = doppler_sigma(ctx.system, c.temperature);
  const ThermalState initial = thermal_ground_populations(ctx.system, c.temperature, c.population_model);
  const double eta = pumping_efficiency(ctx.system, config, transit, sigma, initial);
  const std::vector<double> rabi = grid(0.0, p.sweep_max, p.sweep_points);
  const auto sweep = pumping_efficiency_sweep(ctx.system, config, transit, sigma, initial, rabi);

  NumericTable table;
  table.columns = {"rabi_hz", "efficiency"};
  for (const auto& pt : sweep) table.rows.push_back({pt.rabi_frequency, pt.efficiency});

  json result = {{"rabi_hz", p.rabi},
                 {"efficiency", json_number(eta)},
                 {"branching_to_dark", p.branching_to_dark},
                 {"detuning_hz", p.detuning},
                 {"pumped_from_F", p.pumped_from_F},
                 {"temperature_k", c.temperature},
                 {"transit_source", transit_source},
                 {"sweep", to_json(sweep)},
                 {"sweep_csv", "pump_efficiency.csv"}};
  Outputs outputs(ctx.output_dir);
  outputs.add("pump_efficiency.csv", write_numeric_csv(table));
  outputs.add("pump_efficiency.json", dump(report_envelope("pump-efficiency", result, ctx.digest.hex())));
  print_written(out, outputs.commit());
  out << "efficiency at " << p.rabi * 1e-6 << " MHz: " << eta << "\n";
  return kExitOk;
}

int memory_report(const Flags& f, std::ostream& out, std::ostream& err) {
  Context ctx = prepare("memory-report", f);
  const RunConfig& c = ctx.config;
  const MemorySettings& m = c.memory;

  std::vector<std::string> missing;
  const std::pair<const char*, const std::optional<fs::path>*> upstream[] = {
      {"memory.transit_report", &m.transit_report},
      {"memory.pump_report", &m.pump_report},
      {"memory.fit_report", &m.fit_report}};
  for (const auto& [name, path] : upstream)
    if (*path && !fs::exists(**path)) missing.push_back(std::string(name) + " (" + (*path)->string() + ")");
  if (!missing.empty()) {
    std::string msg = "missing upstream report files:";
    for (const auto& s : missing) msg += " " + s + ";";
    msg.pop_back();
    throw DataError(msg);
  }

  FeasibilityInputs in;
  in.geometry = c.geometry;
  in.coupling_efficiency = m.coupling_efficiency;
  in.margin = m.margin;
  in.excited_lifetime = ctx.system.excited_lifetime;

  MemoryBudget b;
  b.od = m.od;
  b.effective_od = m.effective_od;
  if (m.fit_report) {
    const json r = read_report(*m.fit_report, "fit-spectrum", ctx);
    bool found = false;
    for (const auto& p : r.value("parameters", json::array()))
      if (p.value("name", "") == "effective_od" && p["value"].is_number()) {
        b.effective_od = p["value"].get<double>();
        found = true;
      }
    if (!found) throw ParseError(m.fit_report->string() + ": no effective_od parameter");
    b.od.reset();
    in.effective_od_source = "fit-spectrum:" + m.fit_report->filename().string();
  }
  b.homogeneous_gamma = m.homogeneous_gamma.value_or(ctx.system.natural_linewidth_gamma0);
  b.inhomogeneous_gamma =
      m.inhomogeneous_gamma.value_or(doppler_fwhm(ctx.system, m.temperature.value_or(c.temperature)));
  b.bandwidth_delta = m.bandwidth.value_or(0.0);
  b.rabi_omega = m.rabi.value_or(0.0);
  b.detuning_Delta = m.detuning.value_or(0.0);
  b.pulse_duration = m.pulse_duration.value_or(0.0);
  b.storage_time = m.storage_time.value_or(0.0);

  if (m.transit_report) {
    const json r = read_report(*m.transit_report, "transit-mc", ctx);
    if (!r.contains("mean_s") || !r["mean_s"].is_number()) throw ParseError(m.transit_report->string() + ": no mean_s");
    in.transit_mean = r["mean_s"].get<double>();
    in.transit_source = "transit-mc:" + m.transit_report->filename().string();
    if (!m.storage_time) b.storage_time = *in.transit_mean;
  }
  if (m.pump_report) {
    const json r = read_report(*m.pump_report, "pump-efficiency", ctx);
    if (!r.contains("efficiency") || !r["efficiency"].is_number())
      throw ParseError(m.pump_report->string() + ": no efficiency");
    in.pump_efficiency = r["efficiency"].get<double>();
    in.pump_source = "pump-efficiency:" + m.pump_report->filename().string();
  }
  in.budget = b;

  const FeasibilityReport report = feasibility_report(in);
  Outputs outputs(ctx.output_dir);
  outputs.add("memory_report.json", dump(report_envelope("memory-report", to_json(report), ctx.digest.hex())));
  outputs.add("memory_report.txt", report.to_text());
  print_written(out, outputs.commit());
  out << (report.feasible ? "feasible" : "infeasible") << "\n";
  for (const auto& w : report.warnings) err << "warning: " << w << "\n";
  return kExitOk;
}

// --------------------------------------------------------------------------

void add_common(CLI::App* cmd, Flags& f) {
  f.options["--config"] = cmd->add_option("-c,--config", f.config, "JSON run configuration");
  f.options["--output-dir"] = cmd->add_option("-o,--output-dir", f.output_dir, "Directory for outputs");
  f.options["--atomic-data"] = cmd->add_option("--atomic-data", f.atomic_data, "Atomic data file");
  f.options["--temperature"] = cmd->add_option("--temperature", f.temperature, "Vapour temperature (K)");
  f.options["--ground-F"] = cmd->add_option("--ground-F", f.ground_F, "Probed ground manifold");
}

void add_fit(CLI::App* cmd, Flags& f) {
  add_common(cmd, f);
  f.options["--input"] = cmd->add_option("-i,--input", f.input, "Input CSV")->required();
  cmd->add_flag("--allow-unconverged", f.allow_unconverged, "Exit 0 even if the fit did not converge");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hollow-core fibre cesium spectroscopy and Raman memory toolkit", "hcf"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  // one Flags per subcommand so option pointers stay distinct
  std::map<std::string, Flags> flags;
  std::map<std::string, std::function<int(const Flags&, std::ostream&, std::ostream&)>> handlers;
  auto sub = [&](const std::string& name, const std::string& help, auto handler) {
    handlers[name] = handler;
    return std::make_pair(app.add_subcommand(name, help), &flags[name]);
  };

  {
    auto [cmd, f] = sub("simulate-spectrum", "Write a model transmission spectrum CSV", simulate_spectrum);
    add_common(cmd, *f);
    f->options["--seed"] = cmd->add_option("--seed", f->seed, "RNG seed for noise");
    f->options["--effective-od"] = cmd->add_option("--effective-od", f->effective_od, "Effective optical depth d*");
    f->options["--noise"] = cmd->add_option("--noise", f->noise, "Additive transmission noise (sd)");
  }
  {
    auto [cmd, f] = sub("fit-spectrum", "Fit d*, Doppler width, offset and baseline", fit_spectrum);
    add_fit(cmd, *f);
  }
  {
    auto [cmd, f] = sub("fit-satspec", "Fit a saturated-absorption spectrum", fit_satspec_cmd);
    add_fit(cmd, *f);
  }
  {
    auto [cmd, f] = sub("fit-power", "Fit the power-broadening law", fit_power);
    add_fit(cmd, *f);
  }
  {
    auto [cmd, f] = sub("fit-liad", "Fit a LIAD optical-depth transient", fit_liad);
    add_fit(cmd, *f);
  }
  {
    auto [cmd, f] = sub("transit-mc", "Monte Carlo transit times through the mode", transit_mc);
    add_common(cmd, *f);
    f->options["--seed"] = cmd->add_option("--seed", f->seed, "RNG seed");
    f->options["--n-samples"] = cmd->add_option("-n,--n-samples", f->n_samples, "Number of samples");
    f->options["--workers"] = cmd->add_option("--workers", f->workers, "Worker threads (0 = all cores)");
  }
  {
    auto [cmd, f] = sub("pump-efficiency", "Optical pumping efficiency and Rabi sweep", pump_efficiency);
    add_common(cmd, *f);
    f->options["--rabi"] = cmd->add_option("--rabi", f->rabi, "Pump Rabi frequency (Hz)");
    f->options["--transit-report"] =
        cmd->add_option("--transit-report", f->transit_report, "transit-mc report to average over");
  }
  {
    auto [cmd, f] = sub("memory-report", "Raman memory feasibility report", memory_report);
    add_common(cmd, *f);
    f->options["--transit-report"] = cmd->add_option("--transit-report", f->transit_report, "transit-mc report");
    f->options["--pump-report"] = cmd->add_option("--pump-report", f->pump_report, "pump-efficiency report");
    f->options["--fit-report"] = cmd->add_option("--fit-report", f->fit_report, "fit-spectrum report");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return handlers.at(name)(flags.at(name), out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InvariantError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DomainError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const SingularFitError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace hcf::cli
