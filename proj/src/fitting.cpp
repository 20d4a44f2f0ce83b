#include "hcf/fitting.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "hcf/constants.hpp"
#include "hcf/error.hpp"

namespace hcf {

namespace {

void apply_fixed(std::vector<ParamSpec>& specs, const std::vector<std::string>& fixed) {
  for (const auto& name : fixed) {
    auto it = std::find_if(specs.begin(), specs.end(), [&](const ParamSpec& s) { return s.name == name; });
    if (it == specs.end()) throw InvariantError("fixed", "unknown parameter '" + name + "'");
    it->fixed = true;
  }
}

void check_transmission_init(const TransmissionModelParams& init) {
  if (!(init.effective_od >= 0.0 && init.effective_od <= 1e4))
    throw InvariantError("effective_od", "initial value outside [0, 1e4]");
  if (!(init.doppler_sigma >= 1e6 && init.doppler_sigma <= 1e10))
    throw InvariantError("doppler_sigma", "initial value outside [1 MHz, 10 GHz]");
  if (!(init.baseline > 0.0 && init.baseline <= 1.2)) throw InvariantError("baseline", "initial value outside (0, 1.2]");
  if (!std::isfinite(init.global_offset)) throw InvariantError("global_offset", "initial value not finite");
}

// log-scaled parameters cannot start at exactly zero
constexpr double kSmallestStartingOd = 1e-3;

}  // namespace

// ---------------------------------------------------------------------------
// TransmissionModel
// ---------------------------------------------------------------------------

TransmissionModel::TransmissionModel(LineSet lines, Eigen::ArrayXd freqs)
    : lines_(std::move(lines)), freqs_(std::move(freqs)) {}

std::vector<std::string> TransmissionModel::parameter_names() {
  return {"effective_od", "doppler_sigma_hz", "global_offset_hz", "baseline"};
}

Eigen::VectorXd TransmissionModel::pack(const TransmissionModelParams& q) {
  Eigen::VectorXd p(4);
  p << q.effective_od, q.doppler_sigma, q.global_offset, q.baseline;
  return p;
}

TransmissionModelParams TransmissionModel::unpack(const Eigen::VectorXd& p) {
  return {p[0], p[1], p[2], p[3]};
}

void TransmissionModel::evaluate(const Eigen::VectorXd& p, Eigen::VectorXd& out) const {
  out = doppler_transmission(freqs_, lines_, p[0], p[1], p[2], p[3]).matrix();
}

void TransmissionModel::jacobian(const Eigen::VectorXd& p, Eigen::MatrixXd& out) const {
  const double od = p[0], sigma = p[1], offset = p[2], baseline = p[3];
  Eigen::ArrayXd profile = Eigen::ArrayXd::Zero(freqs_.size());
  Eigen::ArrayXd d_sigma = profile, d_offset = profile;
  for (Eigen::Index k = 0; k < lines_.offsets.size(); ++k) {
    const Eigen::ArrayXd x = freqs_ - lines_.offsets[k] - offset;
    const Eigen::ArrayXd g = lines_.strengths[k] * (-0.5 * (x / sigma).square()).exp();
    profile += g;
    d_sigma += g * x.square() / (sigma * sigma * sigma);
    d_offset += g * x / (sigma * sigma);
  }
  const Eigen::ArrayXd t = baseline * (-od * profile).exp();
  out.resize(freqs_.size(), 4);
  out.col(0) = (-t * profile).matrix();
  out.col(1) = (-t * od * d_sigma).matrix();
  out.col(2) = (-t * od * d_offset).matrix();
  out.col(3) = (t / baseline).matrix();
}

// ---------------------------------------------------------------------------
// SatSpecModel
// ---------------------------------------------------------------------------

SatSpecModel::SatSpecModel(LineSet lines, std::vector<Resonance> resonances, Eigen::ArrayXd freqs)
    : lines_(std::move(lines)), resonances_(std::move(resonances)), freqs_(std::move(freqs)) {
  centers_.resize(static_cast<Eigen::Index>(resonances_.size()));
  for (std::size_t k = 0; k < resonances_.size(); ++k) centers_[static_cast<Eigen::Index>(k)] = resonances_[k].frequency;
}

std::vector<std::string> SatSpecModel::parameter_names() const {
  std::vector<std::string> names = {"effective_od", "doppler_sigma_hz", "global_offset_hz", "baseline", "dip_fwhm_hz"};
  for (const auto& r : resonances_) names.push_back("contrast_" + r.id);
  return names;
}

void SatSpecModel::evaluate(const Eigen::VectorXd& p, Eigen::VectorXd& out) const {
  const Eigen::ArrayXd contrasts = p.tail(centers_.size()).array();
  const Eigen::ArrayXd absorption = p[0] * doppler_profile(freqs_, lines_, p[2], p[1]) *
                                    hole_factor(freqs_, centers_, contrasts, p[2], p[4]);
  out = (p[3] * (-absorption).exp()).matrix();
}

void SatSpecModel::jacobian(const Eigen::VectorXd& p, Eigen::MatrixXd& out) const {
  const double od = p[0], sigma = p[1], offset = p[2], baseline = p[3], width = p[4];
  const Eigen::Index n = freqs_.size();
  const Eigen::Index nres = centers_.size();

  Eigen::ArrayXd profile = Eigen::ArrayXd::Zero(n), dp_sigma = profile, dp_offset = profile;
  for (Eigen::Index k = 0; k < lines_.offsets.size(); ++k) {
    const Eigen::ArrayXd x = freqs_ - lines_.offsets[k] - offset;
    const Eigen::ArrayXd g = lines_.strengths[k] * (-0.5 * (x / sigma).square()).exp();
    profile += g;
    dp_sigma += g * x.square() / (sigma * sigma * sigma);
    dp_offset += g * x / (sigma * sigma);
  }

  Eigen::ArrayXd hole = Eigen::ArrayXd::Ones(n), dh_offset = Eigen::ArrayXd::Zero(n), dh_width = dh_offset;
  Eigen::MatrixXd dh_contrast(n, nres);
  for (Eigen::Index k = 0; k < nres; ++k) {
    const double c = p[5 + k];
    const Eigen::ArrayXd x = freqs_ - centers_[k] - offset;
    const Eigen::ArrayXd u = 2.0 * x / width;
    const Eigen::ArrayXd l = 1.0 / (1.0 + u.square());
    const Eigen::ArrayXd l2 = l.square();
    hole -= c * l;
    // dL/dx = -2u L^2 (2/width); dx/doffset = -1
    dh_offset -= c * (2.0 * u * l2 * (2.0 / width));
    // dL/dwidth = 2u^2 L^2 / width
    dh_width -= c * (2.0 * u.square() * l2 / width);
    dh_contrast.col(k) = (-l).matrix();
  }
  const Eigen::Array<bool, Eigen::Dynamic, 1> open = hole > 0.0;
  const Eigen::ArrayXd h = open.select(hole, 0.0);
  const Eigen::ArrayXd mask = open.cast<double>();

  const Eigen::ArrayXd t = baseline * (-od * profile * h).exp();
  out.resize(n, 5 + nres);
  out.col(0) = (-t * profile * h).matrix();
  out.col(1) = (-t * od * dp_sigma * h).matrix();
  out.col(2) = (-t * od * (dp_offset * h + profile * dh_offset * mask)).matrix();
  out.col(3) = (t / baseline).matrix();
  out.col(4) = (-t * od * profile * dh_width * mask).matrix();
  for (Eigen::Index k = 0; k < nres; ++k)
    out.col(5 + k) = (-t * od * profile * dh_contrast.col(k).array() * mask).matrix();
}

// ---------------------------------------------------------------------------
// PowerBroadeningModel
// ---------------------------------------------------------------------------

void PowerBroadeningModel::evaluate(const Eigen::VectorXd& p, Eigen::VectorXd& out) const {
  out = (p[0] * (1.0 + powers_ / p[1]).sqrt()).matrix();
}

void PowerBroadeningModel::jacobian(const Eigen::VectorXd& p, Eigen::MatrixXd& out) const {
  const Eigen::ArrayXd root = (1.0 + powers_ / p[1]).sqrt();
  out.resize(powers_.size(), 2);
  out.col(0) = root.matrix();
  out.col(1) = (-p[0] * powers_ / (2.0 * root * p[1] * p[1])).matrix();
}

// ---------------------------------------------------------------------------
// LiadModel
// ---------------------------------------------------------------------------

void validate(const LiadTransientParams& p) {
  if (!(p.rise_tau > 0.0)) throw InvariantError("rise_tau", "must be > 0");
  if (!(p.decay_tau > p.rise_tau)) throw InvariantError("decay_tau", "must exceed rise_tau");
  if (!(p.amplitude >= 0.0)) throw InvariantError("amplitude", "must be >= 0");
  if (!std::isfinite(p.baseline_od) || !std::isfinite(p.onset_time))
    throw InvariantError("baseline_od", "baseline and onset must be finite");
}

std::vector<std::string> LiadModel::parameter_names() {
  return {"baseline_od", "amplitude", "rise_tau_s", "decay_tau_s", "onset_time_s"};
}

Eigen::VectorXd LiadModel::pack(const LiadTransientParams& q) {
  Eigen::VectorXd p(5);
  p << q.baseline_od, q.amplitude, q.rise_tau, q.decay_tau, q.onset_time;
  return p;
}

namespace {

struct LiadShape {
  double value;
  double d_rise;
  double d_decay;
  double d_x;  // derivative with respect to the elapsed time x
};

LiadShape liad_shape(LiadModelForm form, double x, double rise, double decay) {
  if (x <= 0.0) return {0.0, 0.0, 0.0, 0.0};
  const double er = std::exp(-x / rise);
  const double ed = std::exp(-x / decay);
  if (form == LiadModelForm::rise_decay_product) {
    return {(1.0 - er) * ed, -er * (x / (rise * rise)) * ed, (1.0 - er) * ed * (x / (decay * decay)),
            (er / rise) * ed - (1.0 - er) * ed / decay};
  }
  return {ed - er, -er * (x / (rise * rise)), ed * (x / (decay * decay)), -ed / decay + er / rise};
}

}  // namespace

void LiadModel::evaluate(const Eigen::VectorXd& p, Eigen::VectorXd& out) const {
  out.resize(times_.size());
  for (Eigen::Index i = 0; i < times_.size(); ++i)
    out[i] = p[0] + p[1] * liad_shape(form_, times_[i] - p[4], p[2], p[3]).value;
}

void LiadModel::jacobian(const Eigen::VectorXd& p, Eigen::MatrixXd& out) const {
  out.resize(times_.size(), 5);
  for (Eigen::Index i = 0; i < times_.size(); ++i) {
    const LiadShape s = liad_shape(form_, times_[i] - p[4], p[2], p[3]);
    out(i, 0) = 1.0;
    out(i, 1) = s.value;
    out(i, 2) = p[1] * s.d_rise;
    out(i, 3) = p[1] * s.d_decay;
    out(i, 4) = -p[1] * s.d_x;
  }
}

double liad_model_value(const LiadTransientParams& q, LiadModelForm form, double time) {
  return q.baseline_od + q.amplitude * liad_shape(form, time - q.onset_time, q.rise_tau, q.decay_tau).value;
}

LiadPeak liad_peak(const LiadTransientParams& q, LiadModelForm form) {
  validate(q);
  const double r = q.rise_tau, d = q.decay_tau;
  const double x = form == LiadModelForm::rise_decay_product ? r * std::log1p(d / r)
                                                             : std::log(d / r) * r * d / (d - r);
  return {q.onset_time + x, liad_model_value(q, form, q.onset_time + x)};
}

// ---------------------------------------------------------------------------
// Transmission fit
// ---------------------------------------------------------------------------

TransmissionModelParams default_transmission_guess(const AtomicSystem& system, int ground_F, const Spectrum& spectrum) {
  const LineSet lines = line_set(system, ground_F);
  if (spectrum.size() < 3) throw DataError("spectrum too short for an initial guess");
  const Eigen::ArrayXd f = spectrum.frequency().array();
  const Eigen::ArrayXd t = spectrum.transmission().array();

  std::vector<double> sorted(t.data(), t.data() + t.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const std::size_t top = std::max<std::size_t>(3, sorted.size() / 20);
  double baseline = std::accumulate(sorted.begin(), sorted.begin() + static_cast<long>(top), 0.0) / static_cast<double>(top);
  baseline = std::clamp(baseline, 1e-3, 1.2);

  const Eigen::ArrayXd absorbance = -(t / baseline).max(1e-3).min(1.0).log();
  const double weight = absorbance.sum();
  const double span = f[f.size() - 1] - f[0];

  const double s_total = lines.strengths.sum();
  const double s_center = (lines.strengths * lines.offsets).sum() / s_total;
  const double s_var = (lines.strengths * (lines.offsets - s_center).square()).sum() / s_total;

  TransmissionModelParams guess;
  guess.baseline = baseline;
  if (!(weight > 0.0)) {
    guess.doppler_sigma = std::clamp(span / 4.0, 1e6, 1e10);
    guess.global_offset = 0.0;
    guess.effective_od = kSmallestStartingOd;
    return guess;
  }
  const double center = (absorbance * f).sum() / weight;
  const double var = (absorbance * (f - center).square()).sum() / weight;
  guess.global_offset = center - s_center;
  guess.doppler_sigma = std::clamp(std::sqrt(std::max(var - s_var, (span / 50.0) * (span / 50.0))), 1e6, 1e10);
  const double peak_profile =
      doppler_profile(f, lines, guess.global_offset, guess.doppler_sigma).maxCoeff();
  guess.effective_od = std::clamp(absorbance.maxCoeff() / std::max(peak_profile, 1e-12), kSmallestStartingOd, 1e4);
  return guess;
}

FitResult fit_transmission(const AtomicSystem& system, int ground_F, const Spectrum& spectrum,
                           const TransmissionModelParams& init, const FitOptions& options) {
  check_transmission_init(init);
  const LineSet lines = line_set(system, ground_F);
  if (spectrum.size() < 10) throw DataError("fit_transmission: need at least 10 points");
  const double span = spectrum.frequency()[spectrum.size() - 1] - spectrum.frequency()[0];
  if (span < init.doppler_sigma) throw DataError("fit_transmission: sweep spans less than one Doppler width");

  // A mask drawn from the noisy data keeps points whose noise happened to be
  // positive; after a first pass the mask is redrawn from the fitted curve.
  auto fit_subset = [&](const std::vector<Eigen::Index>& keep, const TransmissionModelParams& start) {
    if (keep.size() < 10) throw DataError("fit_transmission: fewer than 10 points above the saturation mask");
    const auto n = static_cast<Eigen::Index>(keep.size());
    Eigen::ArrayXd f(n);
    Eigen::VectorXd y(n);
    std::optional<Eigen::VectorXd> sigma;
    if (spectrum.sigma()) sigma = Eigen::VectorXd(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto k = keep[static_cast<std::size_t>(i)];
      f[i] = spectrum.frequency()[k];
      y[i] = spectrum.transmission()[k];
      if (sigma) (*sigma)[i] = (*spectrum.sigma())[k];
    }
    std::vector<ParamSpec> specs = {
        {"effective_od", ParamScale::log},
        {"doppler_sigma_hz", ParamScale::log},
        {"global_offset_hz", ParamScale::linear, start.doppler_sigma},
        {"baseline", ParamScale::linear, 0.01},
    };
    apply_fixed(specs, options.fixed);
    const TransmissionModel model(lines, f);
    return fit_model("transmission", model, std::move(specs), TransmissionModel::pack(start), y, sigma,
                     options.solver);
  };

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < spectrum.size(); ++i)
    if (spectrum.transmission()[i] > options.saturation_mask * init.baseline) keep.push_back(i);

  TransmissionModelParams start = init;
  start.effective_od = std::max(start.effective_od, kSmallestStartingOd);
  FitResult result = fit_subset(keep, start);

  const TransmissionModel full(lines, spectrum.frequency().array());
  for (int pass = 0; pass < 3; ++pass) {
    const Eigen::VectorXd p = Eigen::Vector4d(result.value("effective_od"), result.value("doppler_sigma_hz"),
                                              result.value("global_offset_hz"), result.value("baseline"));
    Eigen::VectorXd curve;
    full.evaluate(p, curve);
    std::vector<Eigen::Index> next;
    for (Eigen::Index i = 0; i < spectrum.size(); ++i)
      if (curve[i] > options.saturation_mask * p[3]) next.push_back(i);
    if (next == keep) break;
    keep = std::move(next);
    if (keep.size() < 10) break;
    start = TransmissionModel::unpack(p);
    start.effective_od = std::max(start.effective_od, kSmallestStartingOd);
    result = fit_subset(keep, start);
  }
  const auto masked = spectrum.size() - static_cast<Eigen::Index>(keep.size());

  result.derived.emplace_back("masked_points", static_cast<double>(masked));
  result.derived.emplace_back("doppler_fwhm_hz", constants::gaussian_fwhm_per_sigma * result.value("doppler_sigma_hz"));
  if (masked > 0)
    result.warnings.push_back(std::to_string(masked) +
                              " saturated points excluded; optical depth is extrapolated from the line wings");
  return result;
}

// ---------------------------------------------------------------------------
// Saturated absorption fit
// ---------------------------------------------------------------------------

FitResult fit_satspec(const AtomicSystem& system, int ground_F, const Spectrum& spectrum,
                      const SatSpecModelParams& init, const FitOptions& options) {
  check_transmission_init(init.background);
  validate(init);
  if (spectrum.size() < 10) throw DataError("fit_satspec: need at least 10 points");
  const auto resonances = satspec_resonances(system, ground_F);
  for (const auto& [id, c] : init.dip_contrasts) {
    if (std::none_of(resonances.begin(), resonances.end(), [&](const Resonance& r) { return r.id == id; }))
      throw InvariantError("dip_contrasts", "unknown resonance id '" + id + "'");
  }

  const auto nres = static_cast<Eigen::Index>(resonances.size());
  Eigen::VectorXd start(5 + nres);
  start.head(4) = TransmissionModel::pack(init.background);
  start[0] = std::max(start[0], kSmallestStartingOd);
  start[4] = dip_fwhm(system, init);
  std::vector<ParamSpec> specs = {
      {"effective_od", ParamScale::log},
      {"doppler_sigma_hz", ParamScale::log},
      {"global_offset_hz", ParamScale::linear, start[4]},
      {"baseline", ParamScale::linear, 0.01},
      {"dip_fwhm_hz", ParamScale::log},
  };
  for (Eigen::Index k = 0; k < nres; ++k) {
    const auto& id = resonances[static_cast<std::size_t>(k)].id;
    auto it = init.dip_contrasts.find(id);
    start[5 + k] = it == init.dip_contrasts.end() ? 0.1 : it->second;
    specs.push_back({"contrast_" + id, ParamScale::linear, 0.05});
  }
  apply_fixed(specs, options.fixed);

  const SatSpecModel model(line_set(system, ground_F), resonances, spectrum.frequency().array());
  FitResult result = fit_model("satspec", model, std::move(specs), start, spectrum.transmission(), spectrum.sigma(),
                               options.solver);
  const double root = std::sqrt(1.0 + init.pump_saturation);
  result.derived.emplace_back("pump_saturation", init.pump_saturation);
  result.derived.emplace_back("gamma0_hz", result.value("dip_fwhm_hz") / root);
  result.derived.emplace_back("gamma0_hz_uncertainty", result.uncertainty("dip_fwhm_hz") / root);
  return result;
}

// ---------------------------------------------------------------------------
// Power broadening fit
// ---------------------------------------------------------------------------

FitResult fit_power_broadening(std::span<const PowerPoint> points, const FitOptions& options) {
  if (points.size() < 3) throw DataError("fit_power_broadening: need at least 3 points");
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::ArrayXd power(n);
  Eigen::VectorXd width(n), sigma(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pt = points[static_cast<std::size_t>(i)];
    if (!(pt.power >= 0.0) || !std::isfinite(pt.power)) throw InvariantError("power", "must be finite and >= 0");
    if (!(pt.width > 0.0)) throw InvariantError("width", "must be > 0");
    if (!(pt.width_sigma > 0.0)) throw InvariantError("width_sigma", "must be > 0");
    power[i] = pt.power;
    width[i] = pt.width;
    sigma[i] = pt.width_sigma;
  }

  // Gamma^2 = gamma0^2 + (gamma0^2 / i_sat) P is linear in P; its regression seeds the fit.
  const Eigen::ArrayXd g2 = width.array().square();
  const double pm = power.mean(), gm = g2.mean();
  const double var = (power - pm).square().sum();
  double gamma0 = width.minCoeff();
  double i_sat = power.maxCoeff() > 0.0 ? 0.5 * (power.maxCoeff() + power.minCoeff()) : 1.0;
  if (var > 0.0) {
    const double slope = ((power - pm) * (g2 - gm)).sum() / var;
    const double intercept = gm - slope * pm;
    if (intercept > 0.0 && slope > 0.0) {
      gamma0 = std::sqrt(intercept);
      i_sat = intercept / slope;
    }
  }
  if (!(i_sat > 0.0)) i_sat = 1.0;

  std::vector<ParamSpec> specs = {{"gamma0_hz", ParamScale::log}, {"i_sat", ParamScale::log}};
  apply_fixed(specs, options.fixed);
  Eigen::VectorXd start(2);
  start << gamma0, i_sat;
  return fit_model("power_broadening", PowerBroadeningModel(power), std::move(specs), start, width, sigma,
                   options.solver);
}

// ---------------------------------------------------------------------------
// LIAD transient fit
// ---------------------------------------------------------------------------

LiadTransientParams default_liad_guess(const TimeSeries& s) {
  const Eigen::VectorXd& t = s.time;
  const Eigen::VectorXd& y = s.effective_od;
  const Eigen::Index n = t.size();
  Eigen::Index peak = 0;
  y.maxCoeff(&peak);

  LiadTransientParams g;
  const Eigen::Index head = std::max<Eigen::Index>(1, std::min<Eigen::Index>(peak, n / 10));
  g.baseline_od = y.head(head).mean();
  g.amplitude = std::max(y[peak] - g.baseline_od, 0.0);

  // onset: last sample before the peak still within 10% of the rise above baseline
  Eigen::Index onset = 0;
  for (Eigen::Index i = 0; i < peak; ++i)
    if (y[i] - g.baseline_od < 0.1 * g.amplitude) onset = i;
  g.onset_time = t[onset];

  const double span = t[n - 1] - t[0];
  const double rise_time = std::max(t[peak] - g.onset_time, 1e-6 * span);
  g.rise_tau = rise_time / 3.0;

  // decay: first time after the peak where the excess drops below 1/e of its maximum
  double decay_time = t[n - 1] - t[peak];
  for (Eigen::Index i = peak; i < n; ++i)
    if (y[i] - g.baseline_od < g.amplitude / std::exp(1.0)) {
      decay_time = t[i] - t[peak];
      break;
    }
  g.decay_tau = std::max(decay_time, 10.0 * g.rise_tau);
  return g;
}

FitResult fit_liad_transient(const TimeSeries& s, LiadModelForm form, const FitOptions& options) {
  const Eigen::Index n = s.time.size();
  if (n < 8) throw DataError("fit_liad_transient: series too short (need at least 8 points)");
  if (s.effective_od.size() != n || (s.sigma && s.sigma->size() != n))
    throw DataError("fit_liad_transient: column lengths differ");
  for (Eigen::Index i = 1; i < n; ++i)
    if (!(s.time[i] > s.time[i - 1])) throw DataError("fit_liad_transient: times are not strictly increasing");

  const Eigen::VectorXd diff = s.effective_od.tail(n - 1) - s.effective_od.head(n - 1);
  const bool flat = diff.cwiseAbs().maxCoeff() == 0.0;
  if (!flat && ((diff.array() >= 0.0).all() || (diff.array() <= 0.0).all()))
    throw DataError("fit_liad_transient: series is monotone, no transient peak to fit");

  Eigen::Index peak = 0;
  s.effective_od.maxCoeff(&peak);
  if (!flat && (peak == 0 || peak == n - 1))
    throw DataError("fit_liad_transient: series must span both the rise and the decay of the transient");

  LiadTransientParams guess = default_liad_guess(s);
  std::vector<ParamSpec> specs = {
      {"baseline_od", ParamScale::linear, std::max(std::abs(guess.baseline_od), 1e-3)},
      {"amplitude", ParamScale::linear, std::max(guess.amplitude, 1e-3)},
      {"rise_tau_s", ParamScale::log},
      {"decay_tau_s", ParamScale::log},
      {"onset_time_s", ParamScale::linear, guess.rise_tau},
  };
  const double span = s.time[n - 1] - s.time[0];
  if (flat || guess.amplitude == 0.0) {
    // without a transient the timescales are unidentifiable; fit the level only
    guess.amplitude = 0.0;
    guess.rise_tau = span / 100.0;
    guess.decay_tau = span / 10.0;
    guess.onset_time = s.time[0];
    specs[2].fixed = specs[3].fixed = specs[4].fixed = true;
  }
  apply_fixed(specs, options.fixed);

  FitResult result = fit_model(form == LiadModelForm::rise_decay_product ? "liad_rise_decay_product"
                                                                          : "liad_double_exponential",
                               LiadModel(s.time.array(), form), std::move(specs), LiadModel::pack(guess),
                               s.effective_od, s.sigma, options.solver);

  LiadTransientParams fitted{result.value("baseline_od"), result.value("amplitude"), result.value("rise_tau_s"),
                             result.value("decay_tau_s"), result.value("onset_time_s")};
  if (fitted.amplitude > 0.0 && fitted.decay_tau > fitted.rise_tau) {
    const LiadPeak pk = liad_peak(fitted, form);
    result.derived.emplace_back("peak_od", pk.effective_od);
    result.derived.emplace_back("peak_time_s", pk.time);
  } else {
    result.derived.emplace_back("peak_od", fitted.baseline_od + std::max(fitted.amplitude, 0.0));
    if (fitted.amplitude > 0.0) result.warnings.push_back("fitted decay_tau does not exceed rise_tau");
  }
  if (flat || guess.amplitude == 0.0) result.warnings.push_back("no transient detected; timescales held fixed");
  return result;
}

// ---------------------------------------------------------------------------
// Calibration and pumping efficiency
// ---------------------------------------------------------------------------

CalibrationMap calibrate_frequency_axis(std::span<const double> raw, std::span<const double> reference) {
  if (raw.size() != reference.size()) throw DataError("calibrate_frequency_axis: feature lists differ in length");
  if (raw.size() < 2) throw DataError("calibrate_frequency_axis: need at least 2 matched features");
  for (std::size_t i = 0; i < raw.size(); ++i)
    for (std::size_t j = i + 1; j < raw.size(); ++j)
      if (raw[i] == raw[j]) throw DataError("calibrate_frequency_axis: duplicate raw position");

  const auto n = static_cast<Eigen::Index>(raw.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = raw[static_cast<std::size_t>(i)];
    design(i, 1) = 1.0;
    target[i] = reference[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(target);
  CalibrationMap map;
  map.scale = coef[0];
  map.offset = coef[1];
  if (!(map.scale != 0.0) || !std::isfinite(map.scale)) throw DataError("calibrate_frequency_axis: degenerate scale");
  const Eigen::VectorXd residual = target - design * coef;
  map.residuals.assign(residual.data(), residual.data() + n);
  map.rms_residual = std::sqrt(residual.squaredNorm() / static_cast<double>(n));
  return map;
}

PumpingExtraction extract_pumping_efficiency(double od_unpumped, double od_pumped, const ThermalState& initial,
                                             int pumped_from_F) {
  constexpr double tolerance = 0.01;
  if (!(od_unpumped > 0.0)) throw DomainError("extract_pumping_efficiency: unpumped optical depth must be > 0");
  if (!(od_pumped >= 0.0)) throw DomainError("extract_pumping_efficiency: pumped optical depth must be >= 0");
  if (od_pumped > od_unpumped * (1.0 + tolerance))
    throw DataError("extract_pumping_efficiency: pumped optical depth exceeds the unpumped value by more than 1%");

  PumpingExtraction out;
  out.remaining_fraction = od_pumped / od_unpumped;
  if (out.remaining_fraction > 1.0) {
    // within measurement tolerance of no pumping at all
    out.remaining_fraction = 1.0;
    out.clamped = true;
    out.warnings.push_back("pumped optical depth above unpumped by less than 1%; treated as no pumping");
  }
  out.efficiency = std::clamp(1.0 - initial.population(pumped_from_F) * out.remaining_fraction, 0.0, 1.0);
  return out;
}

}  // namespace hcf
