#include "hcf/spectral_model.hpp"

#include <cmath>

#include "hcf/error.hpp"

namespace hcf {

namespace {

Eigen::ArrayXd to_array(std::span<const double> freqs) {
  if (freqs.empty()) throw InvariantError("freqs", "empty frequency list");
  Eigen::ArrayXd f = Eigen::Map<const Eigen::ArrayXd>(freqs.data(), static_cast<Eigen::Index>(freqs.size()));
  for (Eigen::Index i = 1; i < f.size(); ++i)
    if (!(f[i] > f[i - 1])) throw InvariantError("freqs", "not strictly increasing");
  return f;
}

std::string excited_pair_id(const char* prefix, int a, int b) {
  return prefix + std::to_string(a) + std::to_string(b);
}

}  // namespace

void validate(const TransmissionModelParams& p) {
  if (!(p.effective_od >= 0.0) || !std::isfinite(p.effective_od))
    throw InvariantError("effective_od", "must be finite and >= 0");
  if (!(p.doppler_sigma > 0.0) || !std::isfinite(p.doppler_sigma))
    throw InvariantError("doppler_sigma", "must be finite and > 0");
  if (!std::isfinite(p.global_offset)) throw InvariantError("global_offset", "not finite");
  if (!(p.baseline > 0.0 && p.baseline <= 1.2)) throw InvariantError("baseline", "must lie in (0, 1.2]");
}

void validate(const SatSpecModelParams& p) {
  validate(p.background);
  if (!(p.pump_saturation >= 0.0) || !std::isfinite(p.pump_saturation))
    throw InvariantError("pump_saturation", "must be finite and >= 0");
  if (!(p.homogeneous_width >= 0.0) || !std::isfinite(p.homogeneous_width))
    throw InvariantError("homogeneous_width", "must be finite and >= 0");
  for (const auto& [id, c] : p.dip_contrasts)
    if (!(c >= 0.0 && c <= 1.0)) throw InvariantError("dip_contrasts[" + id + "]", "must lie in [0, 1]");
}

LineSet line_set(const AtomicSystem& system, int ground_F) {
  const auto lines = system.lines_from(ground_F);
  LineSet set;
  set.offsets.resize(static_cast<Eigen::Index>(lines.size()));
  set.strengths.resize(static_cast<Eigen::Index>(lines.size()));
  for (std::size_t k = 0; k < lines.size(); ++k) {
    set.offsets[static_cast<Eigen::Index>(k)] = lines[k].offset;
    set.strengths[static_cast<Eigen::Index>(k)] = lines[k].strength;
  }
  return set;
}

Spectrum transmission_spectrum(const AtomicSystem& system, int ground_F, const TransmissionModelParams& params,
                               std::span<const double> freqs) {
  validate(params);
  const LineSet lines = line_set(system, ground_F);
  const Eigen::ArrayXd f = to_array(freqs);
  Eigen::ArrayXd t = doppler_transmission(f, lines, params.effective_od, params.doppler_sigma,
                                          params.global_offset, params.baseline);
  return Spectrum(f.matrix(), t.matrix());
}

std::vector<Resonance> crossover_frequencies(const AtomicSystem& system, int ground_F) {
  const auto lines = system.lines_from(ground_F);
  std::vector<Resonance> out;
  for (std::size_t i = 0; i < lines.size(); ++i)
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const int a = std::min(lines[i].excited_F, lines[j].excited_F);
      const int b = std::max(lines[i].excited_F, lines[j].excited_F);
      out.push_back({excited_pair_id("CO_", a, b), 0.5 * (lines[i].offset + lines[j].offset), true});
    }
  return out;
}

std::vector<Resonance> satspec_resonances(const AtomicSystem& system, int ground_F) {
  std::vector<Resonance> out;
  for (const auto& l : system.lines_from(ground_F))
    out.push_back({excited_pair_id("L_", l.ground_F, l.excited_F), l.offset, false});
  for (auto& co : crossover_frequencies(system, ground_F)) out.push_back(std::move(co));
  return out;
}

double dip_fwhm(const AtomicSystem& system, const SatSpecModelParams& params) {
  const double gamma0 =
      params.homogeneous_width > 0.0 ? params.homogeneous_width : system.natural_linewidth_gamma0;
  return gamma0 * std::sqrt(1.0 + params.pump_saturation);
}

Spectrum satspec_spectrum(const AtomicSystem& system, int ground_F, const SatSpecModelParams& params,
                          std::span<const double> freqs) {
  validate(params);
  const LineSet lines = line_set(system, ground_F);
  const auto resonances = satspec_resonances(system, ground_F);
  const Eigen::ArrayXd f = to_array(freqs);

  Eigen::ArrayXd centers(static_cast<Eigen::Index>(resonances.size()));
  Eigen::ArrayXd contrasts = Eigen::ArrayXd::Zero(centers.size());
  for (std::size_t k = 0; k < resonances.size(); ++k) centers[static_cast<Eigen::Index>(k)] = resonances[k].frequency;
  for (const auto& [id, c] : params.dip_contrasts) {
    std::size_t k = 0;
    while (k < resonances.size() && resonances[k].id != id) ++k;
    if (k == resonances.size()) throw InvariantError("dip_contrasts", "unknown resonance id '" + id + "'");
    contrasts[static_cast<Eigen::Index>(k)] = c;
  }

  const auto& bg = params.background;
  const Eigen::ArrayXd absorption = bg.effective_od * doppler_profile(f, lines, bg.global_offset, bg.doppler_sigma) *
                                    hole_factor(f, centers, contrasts, bg.global_offset, dip_fwhm(system, params));
  Eigen::ArrayXd t = bg.baseline * (-absorption).exp();
  return Spectrum(f.matrix(), t.matrix());
}

double effective_to_optical_depth(double effective_od, double homogeneous_fwhm, double inhomogeneous_fwhm) {
  if (!(homogeneous_fwhm > 0.0) || !(inhomogeneous_fwhm > 0.0))
    throw DomainError("convert_od: linewidths must be positive");
  return effective_od * inhomogeneous_fwhm / homogeneous_fwhm;
}

double optical_to_effective_depth(double optical_depth, double homogeneous_fwhm, double inhomogeneous_fwhm) {
  if (!(homogeneous_fwhm > 0.0) || !(inhomogeneous_fwhm > 0.0))
    throw DomainError("convert_od: linewidths must be positive");
  return optical_depth * homogeneous_fwhm / inhomogeneous_fwhm;
}

}  // namespace hcf
