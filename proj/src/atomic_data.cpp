#include "hcf/atomic_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hcf/constants.hpp"
#include "hcf/error.hpp"

namespace hcf {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ParseError("atomic data: '" + key + "' is not a number: '" + text + "'");
  }
  if (used != text.size()) throw ParseError("atomic data: trailing characters in '" + key + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(text, &used);
  } catch (const std::exception&) {
    throw ParseError("atomic data: '" + key + "' is not an integer: '" + text + "'");
  }
  if (used != text.size()) throw ParseError("atomic data: trailing characters in '" + key + "'");
  return v;
}

void check_manifold_set(const std::vector<HyperfineManifold>& set, const std::string& name) {
  if (set.empty()) throw InvariantError(name, "no manifolds");
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& m = set[i];
    const std::string field = name + "[F=" + std::to_string(m.F) + "]";
    if (m.F < 0) throw InvariantError(field + ".F", "negative quantum number");
    if (m.degeneracy != 2 * m.F + 1)
      throw InvariantError(field + ".degeneracy", "expected 2F+1 = " + std::to_string(2 * m.F + 1) +
                                                      ", got " + std::to_string(m.degeneracy));
    if (!std::isfinite(m.frequency_offset))
      throw InvariantError(field + ".frequency_offset", "not finite");
  }
  auto sorted = set;
  std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.F < b.F; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].F == sorted[i - 1].F)
      throw InvariantError(name + ".F", "duplicate manifold F=" + std::to_string(sorted[i].F));
  }
  // offsets must be strictly monotone in F (either direction)
  if (sorted.size() >= 2) {
    const bool up = sorted[1].frequency_offset > sorted[0].frequency_offset;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      const double d = sorted[i].frequency_offset - sorted[i - 1].frequency_offset;
      if (!(up ? d > 0.0 : d < 0.0))
        throw InvariantError(name + ".frequency_offset", "offsets are not strictly ordered in F");
    }
  }
}

const HyperfineManifold* find_manifold(const std::vector<HyperfineManifold>& set, int F) {
  for (const auto& m : set)
    if (m.F == F) return &m;
  return nullptr;
}

}  // namespace

double AtomicSystem::line_frequency() const { return constants::speed_of_light / d2_wavelength; }

bool AtomicSystem::has_ground_manifold(int F) const {
  return find_manifold(ground_manifolds, F) != nullptr;
}

const HyperfineManifold& AtomicSystem::ground_manifold(int F) const {
  if (const auto* m = find_manifold(ground_manifolds, F)) return *m;
  throw InvariantError("ground_F", "unknown ground manifold F=" + std::to_string(F));
}

std::vector<HyperfineLine> AtomicSystem::lines_from(int ground_F) const {
  ground_manifold(ground_F);
  std::vector<HyperfineLine> out;
  for (const auto& l : lines)
    if (l.ground_F == ground_F) out.push_back(l);
  std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.offset < b.offset; });
  return out;
}

double ThermalState::population(int F) const {
  auto it = ground_populations.find(F);
  if (it == ground_populations.end())
    throw InvariantError("ground_F", "no population for F=" + std::to_string(F));
  return it->second;
}

double doppler_sigma(const AtomicSystem& system, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw DomainError("doppler_sigma: temperature must be positive, got " + format_double(temperature));
  return system.line_frequency() / constants::speed_of_light *
         std::sqrt(constants::boltzmann * temperature / system.mass);
}

double doppler_fwhm(const AtomicSystem& system, double temperature) {
  return constants::gaussian_fwhm_per_sigma * doppler_sigma(system, temperature);
}

ThermalState thermal_ground_populations(const AtomicSystem& system, double temperature,
                                        PopulationModel model) {
  if (!(temperature > 0.0))
    throw DomainError("thermal_ground_populations: temperature must be positive");
  // The high-temperature limit is assumed: every ground splitting is far below k_B T / h.
  ThermalState state;
  state.temperature = temperature;
  const auto& set = system.ground_manifolds;
  double total = 0.0;
  for (const auto& m : set) total += model == PopulationModel::equal ? 1.0 : m.degeneracy;
  for (const auto& m : set) {
    const double w = model == PopulationModel::equal ? 1.0 : m.degeneracy;
    state.ground_populations[m.F] = w / total;
  }
  return state;
}

void validate(const AtomicSystem& s) {
  auto positive = [](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvariantError(field, "must be positive and finite");
  };
  if (s.schema_version != 1)
    throw InvariantError("schema_version", "unsupported version " + std::to_string(s.schema_version));
  positive(s.mass, "mass_kg");
  positive(s.d2_wavelength, "d2_wavelength_m");
  positive(s.natural_linewidth_gamma0, "natural_linewidth_hz");
  positive(s.excited_lifetime, "excited_lifetime_s");
  if (s.dipole_moment) positive(*s.dipole_moment, "dipole_moment_cm");

  const double from_lifetime = 1.0 / (2.0 * constants::pi * s.excited_lifetime);
  if (std::abs(from_lifetime / s.natural_linewidth_gamma0 - 1.0) > 0.05)
    throw InvariantError("natural_linewidth_hz",
                         "inconsistent with excited_lifetime_s beyond 5% (1/(2 pi tau) = " +
                             format_double(from_lifetime) + " Hz)");

  check_manifold_set(s.ground_manifolds, "ground_manifolds");
  check_manifold_set(s.excited_manifolds, "excited_manifolds");
  for (const auto& m : s.ground_manifolds)
    if (m.level != Level::ground) throw InvariantError("ground_manifolds", "excited manifold in ground set");
  for (const auto& m : s.excited_manifolds)
    if (m.level != Level::excited) throw InvariantError("excited_manifolds", "ground manifold in excited set");

  if (s.lines.empty()) throw InvariantError("lines", "no lines");
  for (const auto& l : s.lines) {
    const std::string field =
        "lines[" + std::to_string(l.ground_F) + "->" + std::to_string(l.excited_F) + "]";
    if (!find_manifold(s.ground_manifolds, l.ground_F))
      throw InvariantError(field + ".ground_F", "no such ground manifold");
    if (!find_manifold(s.excited_manifolds, l.excited_F))
      throw InvariantError(field + ".excited_F", "no such excited manifold");
    if (std::abs(l.ground_F - l.excited_F) > 1)
      throw InvariantError(field, "violates dipole selection |F - F'| <= 1");
    if (!(l.strength >= 0.0) || !std::isfinite(l.strength))
      throw InvariantError(field + ".strength", "must be finite and >= 0");
    if (!std::isfinite(l.offset)) throw InvariantError(field + ".offset", "not finite");
  }
  for (std::size_t i = 0; i < s.lines.size(); ++i)
    for (std::size_t j = i + 1; j < s.lines.size(); ++j)
      if (s.lines[i].ground_F == s.lines[j].ground_F && s.lines[i].excited_F == s.lines[j].excited_F)
        throw InvariantError("lines", "duplicate line " + std::to_string(s.lines[i].ground_F) + "->" +
                                          std::to_string(s.lines[i].excited_F));
}

AtomicSystem parse_atomic_data(const std::string& text) {
  AtomicSystem s;
  std::map<std::string, std::string> keys;
  enum class Section { header, manifolds, lines } section = Section::header;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line == "[manifolds]") {
      section = Section::manifolds;
      continue;
    }
    if (line == "[lines]") {
      section = Section::lines;
      continue;
    }
    if (line.front() == '[') throw ParseError("atomic data line " + std::to_string(lineno) + ": unknown section " + line);

    const std::string where = "atomic data line " + std::to_string(lineno);
    if (section == Section::header) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(where + ": expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      if (keys.count(key)) throw ParseError(where + ": duplicate key '" + key + "'");
      keys[key] = trim(line.substr(eq + 1));
      continue;
    }

    std::istringstream row(line);
    std::vector<std::string> cols;
    for (std::string c; row >> c;) cols.push_back(c);
    if (section == Section::manifolds) {
      if (cols.size() != 4) throw ParseError(where + ": manifold rows need 4 columns");
      HyperfineManifold m;
      if (cols[0] == "ground") {
        m.level = Level::ground;
      } else if (cols[0] == "excited") {
        m.level = Level::excited;
      } else {
        throw ParseError(where + ": level must be 'ground' or 'excited'");
      }
      m.F = parse_int("F", cols[1]);
      m.degeneracy = parse_int("degeneracy", cols[2]);
      m.frequency_offset = parse_double("frequency_offset_hz", cols[3]);
      (m.level == Level::ground ? s.ground_manifolds : s.excited_manifolds).push_back(m);
    } else {
      if (cols.size() != 4) throw ParseError(where + ": line rows need 4 columns");
      HyperfineLine l;
      l.ground_F = parse_int("ground_F", cols[0]);
      l.excited_F = parse_int("excited_F", cols[1]);
      l.offset = parse_double("offset_hz", cols[2]);
      l.strength = parse_double("strength", cols[3]);
      s.lines.push_back(l);
    }
  }

  auto take = [&](const std::string& key) -> std::string {
    auto it = keys.find(key);
    if (it == keys.end()) throw ParseError("atomic data: missing required key '" + key + "'");
    std::string v = it->second;
    keys.erase(it);
    return v;
  };
  auto take_optional = [&](const std::string& key) -> std::optional<std::string> {
    auto it = keys.find(key);
    if (it == keys.end()) return std::nullopt;
    std::string v = it->second;
    keys.erase(it);
    return v;
  };

  s.schema_version = parse_int("schema_version", take("schema_version"));
  s.mass = parse_double("mass_kg", take("mass_kg"));
  s.d2_wavelength = parse_double("d2_wavelength_m", take("d2_wavelength_m"));
  s.natural_linewidth_gamma0 = parse_double("natural_linewidth_hz", take("natural_linewidth_hz"));
  s.excited_lifetime = parse_double("excited_lifetime_s", take("excited_lifetime_s"));
  s.species_name = take_optional("species").value_or("unnamed");
  if (auto d = take_optional("dipole_moment_cm")) s.dipole_moment = parse_double("dipole_moment_cm", *d);
  s.ground_reference = take_optional("ground_reference").value_or("");
  s.excited_reference = take_optional("excited_reference").value_or("");
  s.line_reference = take_optional("line_reference").value_or("");
  s.strength_normalization = take_optional("strength_normalization").value_or("");
  if (!keys.empty()) throw ParseError("atomic data: unknown key '" + keys.begin()->first + "'");

  validate(s);
  return s;
}

AtomicSystem load_atomic_data(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open atomic data file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_atomic_data(buf.str());
}

std::string serialize_atomic_data(const AtomicSystem& s) {
  std::ostringstream out;
  out << "schema_version = " << s.schema_version << '\n';
  out << "species = " << s.species_name << '\n';
  out << "mass_kg = " << format_double(s.mass) << '\n';
  out << "d2_wavelength_m = " << format_double(s.d2_wavelength) << '\n';
  out << "natural_linewidth_hz = " << format_double(s.natural_linewidth_gamma0) << '\n';
  out << "excited_lifetime_s = " << format_double(s.excited_lifetime) << '\n';
  if (s.dipole_moment) out << "dipole_moment_cm = " << format_double(*s.dipole_moment) << '\n';
  if (!s.ground_reference.empty()) out << "ground_reference = " << s.ground_reference << '\n';
  if (!s.excited_reference.empty()) out << "excited_reference = " << s.excited_reference << '\n';
  if (!s.line_reference.empty()) out << "line_reference = " << s.line_reference << '\n';
  if (!s.strength_normalization.empty())
    out << "strength_normalization = " << s.strength_normalization << '\n';
  out << "\n[manifolds]\n";
  auto write_set = [&](const std::vector<HyperfineManifold>& set) {
    for (const auto& m : set)
      out << (m.level == Level::ground ? "ground" : "excited") << ' ' << m.F << ' ' << m.degeneracy
          << ' ' << format_double(m.frequency_offset) << '\n';
  };
  write_set(s.ground_manifolds);
  write_set(s.excited_manifolds);
  out << "\n[lines]\n";
  for (const auto& l : s.lines)
    out << l.ground_F << ' ' << l.excited_F << ' ' << format_double(l.offset) << ' '
        << format_double(l.strength) << '\n';
  return out.str();
}

}  // namespace hcf
