#ifndef HCF_SPECTRUM_HPP
#define HCF_SPECTRUM_HPP

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hcf {

/*
 * A sampled transmission trace. Frequencies are strictly increasing and
 * transmissions finite and non-negative; `sigma` is either empty or one
 * positive uncertainty per point.
 */
class Spectrum {
 public:
  Spectrum() = default;
  Spectrum(Eigen::VectorXd frequency, Eigen::VectorXd transmission,
           std::optional<Eigen::VectorXd> sigma = std::nullopt);

  Eigen::Index size() const { return frequency_.size(); }
  bool empty() const { return frequency_.size() == 0; }
  const Eigen::VectorXd& frequency() const { return frequency_; }
  const Eigen::VectorXd& transmission() const { return transmission_; }
  const std::optional<Eigen::VectorXd>& sigma() const { return sigma_; }

 private:
  Eigen::VectorXd frequency_;
  Eigen::VectorXd transmission_;
  std::optional<Eigen::VectorXd> sigma_;
};

/// Header `frequency_hz,transmission[,sigma]`, one point per line, ascending frequency.
std::string write_spectrum_csv(const Spectrum& spectrum);
Spectrum parse_spectrum_csv(const std::string& text);
Spectrum read_spectrum_csv(const std::filesystem::path& path);

/// Generic numeric CSV with a fixed expected header; used for power-broadening and LIAD series.
struct NumericTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Parses a CSV whose header must start with `required` and may continue with `optional`
/// columns (in order). Throws ParseError on any schema violation or an empty table.
NumericTable parse_numeric_csv(const std::string& text, const std::vector<std::string>& required,
                               const std::vector<std::string>& optional = {});
std::string write_numeric_csv(const NumericTable& table);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace hcf

#endif  // HCF_SPECTRUM_HPP
