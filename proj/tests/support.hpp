#ifndef HCF_TESTS_SUPPORT_HPP
#define HCF_TESTS_SUPPORT_HPP

#include <Eigen/Core>
#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "hcf/atomic_data.hpp"
#include "hcf/spectrum.hpp"

namespace hcf::test {

inline const AtomicSystem& cesium() {
  static const AtomicSystem system = load_atomic_data(std::filesystem::path(HCF_DATA_DIR) / "cesium_d2.dat");
  return system;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

/// Adds N(0, sd) noise; a detector cannot report negative transmission.
inline Spectrum add_noise(const Spectrum& clean, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sd);
  Eigen::VectorXd t = clean.transmission();
  for (auto& v : t) v = std::max(0.0, v + noise(rng));
  return Spectrum(clean.frequency(), t);
}

inline double relative_error(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Scratch directory removed on scope exit.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("hcf_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

// Reference values from an independent numpy/scipy evaluation of the same
// formulas (CODATA constants, the data file's Cs values).
namespace oracle {
inline constexpr double sigma_363 = 176800086.74979773;
inline constexpr double fwhm_363 = 416332388.2416344;
inline constexpr double fwhm_480 = 478748585.6512979;
inline constexpr double od_from_300 = 27620.11071065181;
inline constexpr double f3_argmin = -77154308.61723447;  // 500-point grid, -700..500 MHz, sigma 177 MHz
inline constexpr double f3_min_transmission = 0.00998311420973784;
inline constexpr double power_for_700mhz = 8.872500949513865e-05;
inline constexpr double crossovers_f4[3] = {-87.844995e6, 37.70105e6, 138.344555e6};
inline constexpr double c_squared_example = 3.12;
inline constexpr double remaining_for_90 = 0.2285714285714286;
inline constexpr double transmission_02db = 0.954992586021436;
inline constexpr double transit_mean_363 = 9.980266386715946e-08;
inline constexpr double eta_700 = 0.7682136858487553;
}  // namespace oracle

}  // namespace hcf::test

#endif  // HCF_TESTS_SUPPORT_HPP
