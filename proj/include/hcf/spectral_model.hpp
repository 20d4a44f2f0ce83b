#ifndef HCF_SPECTRAL_MODEL_HPP
#define HCF_SPECTRAL_MODEL_HPP

#include <Eigen/Core>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hcf/atomic_data.hpp"
#include "hcf/spectrum.hpp"

namespace hcf {

struct TransmissionModelParams {
  double effective_od = 0.0;   // d*
  double doppler_sigma = 0.0;  // Hz
  double global_offset = 0.0;  // Hz, shift of the whole line set
  double baseline = 1.0;       // off-resonance transmission
};

void validate(const TransmissionModelParams& params);

/// A sub-Doppler resonance of a saturated-absorption spectrum: a line (`L_34`) or a crossover (`CO_34`).
struct Resonance {
  std::string id;
  double frequency = 0.0;  // Hz, sweep frame
  bool crossover = false;
};

struct SatSpecModelParams {
  TransmissionModelParams background;
  double pump_saturation = 0.0;  // s = I / I_sat
  /// Unsaturated homogeneous width Gamma_0 (Hz FWHM); 0 selects the natural linewidth.
  double homogeneous_width = 0.0;
  std::map<std::string, double> dip_contrasts;  // resonance id -> c_k in [0, 1]
};

void validate(const SatSpecModelParams& params);

/// Fixed line positions and strengths of one ground manifold.
struct LineSet {
  Eigen::ArrayXd offsets;
  Eigen::ArrayXd strengths;
};

LineSet line_set(const AtomicSystem& system, int ground_F);

/// Sum_k S_k exp(-(f - f_k - offset)^2 / (2 sigma^2)).
template <typename Scalar>
Eigen::ArrayX<Scalar> doppler_profile(const Eigen::ArrayX<Scalar>& freqs, const LineSet& lines, Scalar offset,
                                      Scalar sigma) {
  Eigen::ArrayX<Scalar> sum = Eigen::ArrayX<Scalar>::Zero(freqs.size());
  for (Eigen::Index k = 0; k < lines.offsets.size(); ++k) {
    const Eigen::ArrayX<Scalar> x = (freqs - Scalar(lines.offsets[k]) - offset) / sigma;
    sum += Scalar(lines.strengths[k]) * (Scalar(-0.5) * x.square()).exp();
  }
  return sum;
}

/// Unit-peak Lorentzian of full width `fwhm` centred at `center`.
template <typename Scalar>
Eigen::ArrayX<Scalar> unit_lorentzian(const Eigen::ArrayX<Scalar>& freqs, Scalar center, Scalar fwhm) {
  const Eigen::ArrayX<Scalar> u = Scalar(2) * (freqs - center) / fwhm;
  return Scalar(1) / (Scalar(1) + u.square());
}

/// T(f) = baseline * exp(-d* * doppler_profile(f)).
template <typename Scalar>
Eigen::ArrayX<Scalar> doppler_transmission(const Eigen::ArrayX<Scalar>& freqs, const LineSet& lines,
                                           Scalar effective_od, Scalar sigma, Scalar offset, Scalar baseline) {
  return baseline * (-effective_od * doppler_profile(freqs, lines, offset, sigma)).exp();
}

/// Hole-burning factor max(0, 1 - sum_k c_k L_k(f)) applied to the Doppler absorption coefficient.
template <typename Scalar>
Eigen::ArrayX<Scalar> hole_factor(const Eigen::ArrayX<Scalar>& freqs, const Eigen::ArrayXd& centers,
                                  const Eigen::ArrayX<Scalar>& contrasts, Scalar offset, Scalar dip_fwhm) {
  Eigen::ArrayX<Scalar> h = Eigen::ArrayX<Scalar>::Ones(freqs.size());
  for (Eigen::Index k = 0; k < centers.size(); ++k)
    h -= contrasts[k] * unit_lorentzian(freqs, Scalar(centers[k]) + offset, dip_fwhm);
  // overlapping dips could otherwise turn absorption into gain
  return h.max(Scalar(0));
}

/// Doppler-broadened transmission of ground manifold F; throws InvariantError for an unknown F.
Spectrum transmission_spectrum(const AtomicSystem& system, int ground_F, const TransmissionModelParams& params,
                               std::span<const double> freqs);

/// One crossover per unordered pair of lines from `ground_F`, at the midpoint of the pair.
std::vector<Resonance> crossover_frequencies(const AtomicSystem& system, int ground_F);

/// Lines from `ground_F` followed by their crossovers.
std::vector<Resonance> satspec_resonances(const AtomicSystem& system, int ground_F);

/// Lamb-dip FWHM, Gamma_0 sqrt(1 + s).
double dip_fwhm(const AtomicSystem& system, const SatSpecModelParams& params);

/// Saturated-absorption transmission: Lorentzian holes of FWHM dip_fwhm burned into the Doppler
/// absorption at every line and crossover. Contrasts missing from the map are zero; unknown ids throw.
Spectrum satspec_spectrum(const AtomicSystem& system, int ground_F, const SatSpecModelParams& params,
                          std::span<const double> freqs);

/// d = d* gamma_i / gamma.
double effective_to_optical_depth(double effective_od, double homogeneous_fwhm, double inhomogeneous_fwhm);
/// d* = d gamma / gamma_i.
double optical_to_effective_depth(double optical_depth, double homogeneous_fwhm, double inhomogeneous_fwhm);

}  // namespace hcf

#endif  // HCF_SPECTRAL_MODEL_HPP
