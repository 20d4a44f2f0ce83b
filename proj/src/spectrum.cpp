#include "hcf/spectrum.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hcf/error.hpp"

namespace hcf {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? std::string{} : cell.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Spectrum::Spectrum(Eigen::VectorXd frequency, Eigen::VectorXd transmission,
                   std::optional<Eigen::VectorXd> sigma)
    : frequency_(std::move(frequency)), transmission_(std::move(transmission)), sigma_(std::move(sigma)) {
  if (frequency_.size() != transmission_.size())
    throw InvariantError("transmission", "length differs from frequency");
  if (sigma_ && sigma_->size() != frequency_.size())
    throw InvariantError("sigma", "length differs from frequency");
  for (Eigen::Index i = 0; i < frequency_.size(); ++i) {
    if (!std::isfinite(frequency_[i])) throw InvariantError("frequency_hz", "not finite");
    if (i > 0 && !(frequency_[i] > frequency_[i - 1]))
      throw InvariantError("frequency_hz", "not strictly increasing at index " + std::to_string(i));
    if (!std::isfinite(transmission_[i]) || transmission_[i] < 0.0)
      throw InvariantError("transmission", "must be finite and >= 0 at index " + std::to_string(i));
    if (sigma_ && (!std::isfinite((*sigma_)[i]) || !((*sigma_)[i] > 0.0)))
      throw InvariantError("sigma", "must be finite and > 0 at index " + std::to_string(i));
  }
}

NumericTable parse_numeric_csv(const std::string& text, const std::vector<std::string>& required,
                               const std::vector<std::string>& optional) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("CSV is empty");
  // UTF-8 byte order mark
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  NumericTable table;
  table.columns = split_csv_line(line);
  const auto& cols = table.columns;
  if (cols.size() < required.size() || cols.size() > required.size() + optional.size())
    throw ParseError("CSV header has " + std::to_string(cols.size()) + " columns");
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const std::string& expected = i < required.size() ? required[i] : optional[i - required.size()];
    if (cols[i] != expected)
      throw ParseError("CSV header column " + std::to_string(i + 1) + " is '" + cols[i] + "', expected '" +
                       expected + "'");
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != cols.size())
      throw ParseError("CSV line " + std::to_string(lineno) + ": expected " + std::to_string(cols.size()) +
                       " fields, got " + std::to_string(cells.size()));
    std::vector<double> row;
    for (const auto& c : cells) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (c.empty() || used != c.size())
        throw ParseError("CSV line " + std::to_string(lineno) + ": '" + c + "' is not a number");
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw ParseError("CSV has no data rows");
  return table;
}

std::string write_numeric_csv(const NumericTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

Spectrum parse_spectrum_csv(const std::string& text) {
  const auto table = parse_numeric_csv(text, {"frequency_hz", "transmission"}, {"sigma"});
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Eigen::VectorXd f(n), t(n);
  std::optional<Eigen::VectorXd> s;
  if (table.columns.size() == 3) s = Eigen::VectorXd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    f[i] = table.rows[i][0];
    t[i] = table.rows[i][1];
    if (s) (*s)[i] = table.rows[i][2];
  }
  try {
    return Spectrum(std::move(f), std::move(t), std::move(s));
  } catch (const InvariantError& e) {
    throw ParseError(std::string("spectrum CSV: ") + e.what());
  }
}

std::string write_spectrum_csv(const Spectrum& spectrum) {
  NumericTable table;
  table.columns = {"frequency_hz", "transmission"};
  if (spectrum.sigma()) table.columns.push_back("sigma");
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
    std::vector<double> row{spectrum.frequency()[i], spectrum.transmission()[i]};
    if (spectrum.sigma()) row.push_back((*spectrum.sigma())[i]);
    table.rows.push_back(std::move(row));
  }
  return write_numeric_csv(table);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Spectrum read_spectrum_csv(const std::filesystem::path& path) { return parse_spectrum_csv(read_text_file(path)); }

}  // namespace hcf
