#ifndef HCF_FITTING_HPP
#define HCF_FITTING_HPP

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hcf/atomic_data.hpp"
#include "hcf/least_squares.hpp"
#include "hcf/spectral_model.hpp"
#include "hcf/spectrum.hpp"

namespace hcf {

struct FitOptions {
  SolverOptions solver;
  /// Points with transmission at or below this fraction of the baseline are excluded
  /// from transmission fits; a saturated line centre carries no optical-depth information.
  double saturation_mask = 0.02;
  /// Parameter names held at their initial value.
  std::vector<std::string> fixed;
};

// ---------------------------------------------------------------------------
// Models. Each exposes values()/evaluate()/jacobian() in natural parameters
// for fit_model and for finite-difference checks.
// ---------------------------------------------------------------------------

/// Parameters: effective_od, doppler_sigma_hz, global_offset_hz, baseline.
class TransmissionModel {
 public:
  TransmissionModel(LineSet lines, Eigen::ArrayXd freqs);
  static std::vector<std::string> parameter_names();
  static Eigen::VectorXd pack(const TransmissionModelParams& params);
  static TransmissionModelParams unpack(const Eigen::VectorXd& p);

  Eigen::Index values() const { return freqs_.size(); }
  void evaluate(const Eigen::VectorXd& p, Eigen::VectorXd& out) const;
  void jacobian(const Eigen::VectorXd& p, Eigen::MatrixXd& out) const;

 private:
  LineSet lines_;
  Eigen::ArrayXd freqs_;
};

/// Parameters: effective_od, doppler_sigma_hz, global_offset_hz, baseline, dip_fwhm_hz,
/// then one contrast per resonance (`contrast_<id>`).
class SatSpecModel {
 public:
  SatSpecModel(LineSet lines, std::vector<Resonance> resonances, Eigen::ArrayXd freqs);
  std::vector<std::string> parameter_names() const;

  Eigen::Index values() const { return freqs_.size(); }
  void evaluate(const Eigen::VectorXd& p, Eigen::VectorXd& out) const;
  void jacobian(const Eigen::VectorXd& p, Eigen::MatrixXd& out) const;

 private:
  LineSet lines_;
  std::vector<Resonance> resonances_;
  Eigen::ArrayXd centers_;
  Eigen::ArrayXd freqs_;
};

/// Gamma(P) = gamma0 sqrt(1 + P / i_sat). Parameters: gamma0_hz, i_sat.
class PowerBroadeningModel {
 public:
  explicit PowerBroadeningModel(Eigen::ArrayXd powers) : powers_(std::move(powers)) {}
  static std::vector<std::string> parameter_names() { return {"gamma0_hz", "i_sat"}; }

  Eigen::Index values() const { return powers_.size(); }
  void evaluate(const Eigen::VectorXd& p, Eigen::VectorXd& out) const;
  void jacobian(const Eigen::VectorXd& p, Eigen::MatrixXd& out) const;

 private:
  Eigen::ArrayXd powers_;
};

enum class LiadModelForm {
  /// baseline + A (1 - exp(-x/rise)) exp(-x/decay), x = t - onset >= 0
  rise_decay_product,
  /// baseline + A (exp(-x/decay) - exp(-x/rise))
  double_exponential,
};

struct LiadTransientParams {
  double baseline_od = 0.0;
  double amplitude = 0.0;
  double rise_tau = 0.0;   // s
  double decay_tau = 0.0;  // s
  double onset_time = 0.0; // s
};

void validate(const LiadTransientParams& params);

/// Parameters: baseline_od, amplitude, rise_tau_s, decay_tau_s, onset_time_s.
class LiadModel {
 public:
  LiadModel(Eigen::ArrayXd times, LiadModelForm form) : times_(std::move(times)), form_(form) {}
  static std::vector<std::string> parameter_names();
  static Eigen::VectorXd pack(const LiadTransientParams& params);

  Eigen::Index values() const { return times_.size(); }
  void evaluate(const Eigen::VectorXd& p, Eigen::VectorXd& out) const;
  void jacobian(const Eigen::VectorXd& p, Eigen::MatrixXd& out) const;

 private:
  Eigen::ArrayXd times_;
  LiadModelForm form_;
};

double liad_model_value(const LiadTransientParams& params, LiadModelForm form, double time);

struct LiadPeak {
  double time = 0.0;  // s, absolute
  double effective_od = 0.0;
};

/// Closed-form maximum of the transient.
LiadPeak liad_peak(const LiadTransientParams& params, LiadModelForm form);

// ---------------------------------------------------------------------------
// Fits
// ---------------------------------------------------------------------------

/// Moment-based starting point: baseline from the wings, sigma from the absorbance width,
/// d* from the peak absorbance.
TransmissionModelParams default_transmission_guess(const AtomicSystem& system, int ground_F, const Spectrum& spectrum);

FitResult fit_transmission(const AtomicSystem& system, int ground_F, const Spectrum& spectrum,
                           const TransmissionModelParams& init, const FitOptions& options = {});

/// Fits background, Lamb-dip width and per-resonance contrasts with the pump saturation s held
/// at `init.pump_saturation`; reports gamma0_hz = dip_fwhm / sqrt(1 + s) as a derived value.
FitResult fit_satspec(const AtomicSystem& system, int ground_F, const Spectrum& spectrum,
                      const SatSpecModelParams& init, const FitOptions& options = {});

struct PowerPoint {
  double power = 0.0;        // intensity or power, any unit; i_sat comes back in the same unit
  double width = 0.0;        // Hz
  double width_sigma = 0.0;  // Hz
};

FitResult fit_power_broadening(std::span<const PowerPoint> points, const FitOptions& options = {});

struct TimeSeries {
  Eigen::VectorXd time;  // s, sorted
  Eigen::VectorXd effective_od;
  std::optional<Eigen::VectorXd> sigma;
};

LiadTransientParams default_liad_guess(const TimeSeries& series);

/// Fits a single LIAD transient; reports peak_od and peak_time_s as derived values.
FitResult fit_liad_transient(const TimeSeries& series, LiadModelForm form = LiadModelForm::rise_decay_product,
                             const FitOptions& options = {});

struct CalibrationMap {
  double scale = 1.0;   // Hz per raw unit
  double offset = 0.0;  // Hz
  std::vector<double> residuals;  // Hz, reference - mapped
  double rms_residual = 0.0;

  double operator()(double raw) const { return scale * raw + offset; }
};

/// Least-squares affine map from raw sweep positions to reference frequencies.
CalibrationMap calibrate_frequency_axis(std::span<const double> raw_features, std::span<const double> reference);

struct PumpingExtraction {
  double efficiency = 0.0;          // fraction of atoms in the target manifold
  double remaining_fraction = 0.0;  // od_pumped / od_unpumped
  bool clamped = false;
  std::vector<std::string> warnings;
};

/// Optical-pumping efficiency from the drop in the probe manifold's optical depth:
/// eta = 1 - p_F r, r = od_pumped / od_unpumped.
PumpingExtraction extract_pumping_efficiency(double od_unpumped, double od_pumped, const ThermalState& initial,
                                             int pumped_from_F);

}  // namespace hcf

#endif  // HCF_FITTING_HPP
