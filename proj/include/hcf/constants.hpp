#ifndef HCF_CONSTANTS_HPP
#define HCF_CONSTANTS_HPP

#include <cmath>
#include <numbers>

// SI, CODATA 2018.
namespace hcf::constants {

inline constexpr double speed_of_light = 299792458.0;
inline constexpr double boltzmann = 1.380649e-23;
inline constexpr double planck = 6.62607015e-34;
inline constexpr double vacuum_permittivity = 8.8541878128e-12;
inline constexpr double pi = std::numbers::pi;

/// FWHM / sigma for a Gaussian, 2 sqrt(2 ln 2).
inline const double gaussian_fwhm_per_sigma = 2.0 * std::sqrt(2.0 * std::numbers::ln2);

}  // namespace hcf::constants

#endif  // HCF_CONSTANTS_HPP
