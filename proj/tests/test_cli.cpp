#include "doctest.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "hcf/fitting.hpp"
#include "hcf/report.hpp"
#include "hcf/spectral_model.hpp"
#include "hcf/spectrum.hpp"
#include "support.hpp"

using namespace hcf;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "hcf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string preset(const std::string& name) { return (fs::path(HCF_PRESET_DIR) / name).string(); }

json read_json(const fs::path& p) { return json::parse(read_text_file(p)); }

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

bool empty_dir(const fs::path& p) { return !fs::exists(p) || fs::is_empty(p); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate then fit recovers the inputs") {
  test::TempDir dir;
  const std::string out = (dir.path / "out").string();
  REQUIRE(run({"simulate-spectrum", "-c", preset("fibre_363k.json"), "-o", out, "--noise", "0.01", "--seed", "2024"})
              .code == 0);
  const Run fit = run({"fit-spectrum", "-c", preset("fibre_363k.json"), "-i", out + "/spectrum.csv", "-o", out});
  REQUIRE(fit.code == 0);
  const json r = report_result(read_json(fs::path(out) / "fit_spectrum.json"), "fit-spectrum");
  CHECK(r["converged"] == true);
  for (const auto& p : r["parameters"]) {
    if (p["name"] == "effective_od") CHECK(std::abs(p["value"].get<double>() - 5.7) < 0.1);
    if (p["name"] == "doppler_sigma_hz") CHECK(std::abs(p["value"].get<double>() - 177e6) < 3e6);
  }
}

TEST_CASE("minimum of the simulated spectrum matches an independent evaluation") {
  test::TempDir dir;
  REQUIRE(run({"simulate-spectrum", "-c", preset("fibre_363k.json"), "-o", dir.path.string()}).code == 0);
  const Spectrum s = read_spectrum_csv(dir.path / "spectrum.csv");
  REQUIRE(s.size() == 500);
  Eigen::Index argmin = 0;
  s.transmission().minCoeff(&argmin);

  // direct sum over the line table, no model code
  const AtomicSystem& cs = test::cesium();
  double best_f = 0.0, best_t = 2.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double f = s.frequency()[i];
    double profile = 0.0;
    for (const auto& line : cs.lines_from(3))
      profile += line.strength * std::exp(-0.5 * std::pow((f - line.offset) / 177e6, 2));
    const double t = std::exp(-5.7 * profile);
    if (t < best_t) best_t = t, best_f = f;
  }
  CHECK(s.frequency()[argmin] == best_f);
  CHECK(best_f == doctest::Approx(test::oracle::f3_argmin).epsilon(1e-9));
  CHECK(s.transmission()[argmin] == doctest::Approx(best_t).epsilon(1e-12));
  const json prov = report_result(read_json(dir.path / "spectrum.json"), "simulate-spectrum");
  CHECK(prov["min_transmission"]["frequency_hz"] == best_f);
  CHECK(prov["parameters"]["effective_od"] == 5.7);
}

TEST_CASE("zero optical depth gives a constant baseline") {
  test::TempDir dir;
  REQUIRE(run({"simulate-spectrum", "-c", preset("zero_od.json"), "-o", dir.path.string()}).code == 0);
  const Spectrum s = read_spectrum_csv(dir.path / "spectrum.csv");
  CHECK(s.size() == 200);
  CHECK((s.transmission().array() == 1.0).all());
}

TEST_CASE("noise without a seed is a config error") {
  test::TempDir dir;
  const Run r = run({"simulate-spectrum", "-o", (dir.path / "out").string(), "--noise", "0.01"});
  CHECK(r.code == 2);
  CHECK(r.err.find("seed") != std::string::npos);
  CHECK(empty_dir(dir.path / "out"));
}

TEST_CASE("malformed config exits 2 without writing anything") {
  test::TempDir dir;
  const fs::path out = dir.path / "out";
  write_file(dir.path / "broken.json", "{ \"thermal\": { \"temperature_k\": ");
  Run r = run({"simulate-spectrum", "-c", (dir.path / "broken.json").string(), "-o", out.string()});
  CHECK(r.code == 2);
  CHECK(!r.err.empty());
  CHECK(empty_dir(out));

  write_file(dir.path / "negative.json", R"({"thermal": {"temperature_k": -5}})");
  r = run({"simulate-spectrum", "-c", (dir.path / "negative.json").string(), "-o", out.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("thermal.temperature_k") != std::string::npos);
  CHECK(empty_dir(out));

  write_file(dir.path / "unknown.json", R"({"geometry": {"core_diameter": 26e-6}})");
  r = run({"transit-mc", "-c", (dir.path / "unknown.json").string(), "-o", out.string(), "--seed", "1"});
  CHECK(r.code == 2);
  CHECK(r.err.find("geometry.core_diameter") != std::string::npos);

  write_file(dir.path / "missing.json", R"({"atomic_data_path": "nowhere.dat"})");
  r = run({"simulate-spectrum", "-c", (dir.path / "missing.json").string(), "-o", out.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("atomic_data_path") != std::string::npos);
  CHECK(empty_dir(out));

  CHECK(run({"no-such-command"}).code == 2);
  CHECK(run({"fit-spectrum"}).code == 2);
}

TEST_CASE("empty or malformed CSV exits 2") {
  test::TempDir dir;
  write_file(dir.path / "empty.csv", "");
  CHECK(run({"fit-spectrum", "-i", (dir.path / "empty.csv").string(), "-o", dir.path.string()}).code == 2);
  write_file(dir.path / "header.csv", "frequency_hz,transmission\n");
  CHECK(run({"fit-spectrum", "-i", (dir.path / "header.csv").string(), "-o", dir.path.string()}).code == 2);
  write_file(dir.path / "wrong.csv", "power,width\n1,2\n");
  CHECK(run({"fit-power", "-i", (dir.path / "wrong.csv").string(), "-o", dir.path.string()}).code == 2);
  CHECK(run({"fit-liad", "-i", (dir.path / "absent.csv").string(), "-o", dir.path.string()}).code == 2);
  CHECK(!fs::exists(dir.path / "fit_spectrum.json"));
}

TEST_CASE("fit-power on three exact points") {
  test::TempDir dir;
  std::ostringstream csv;
  csv.precision(17);
  csv << "power,width_hz,width_sigma_hz\n";
  for (double p : {10e-9, 50e-9, 200e-9}) csv << p << "," << 6e6 * std::sqrt(1.0 + p / 50e-9) << ",1e5\n";
  write_file(dir.path / "power.csv", csv.str());
  REQUIRE(run({"fit-power", "-i", (dir.path / "power.csv").string(), "-o", dir.path.string()}).code == 0);
  const json r = report_result(read_json(dir.path / "fit_power.json"), "fit-power");
  for (const auto& p : r["parameters"]) {
    if (p["name"] == "gamma0_hz") CHECK(p["value"].get<double>() == doctest::Approx(6e6).epsilon(1e-9));
    if (p["name"] == "i_sat") CHECK(p["value"].get<double>() == doctest::Approx(50e-9).epsilon(1e-9));
  }
}

TEST_CASE("fit-liad round trip") {
  test::TempDir dir;
  LiadTransientParams truth{10.0, 290.0, 2.0, 60.0, 1.0};
  std::ostringstream csv;
  csv.precision(17);
  csv << "time_s,effective_od\n";
  for (int i = 0; i < 300; ++i) {
    const double t = 0.5 + 0.6 * i;
    csv << t << "," << liad_model_value(truth, LiadModelForm::rise_decay_product, t) << "\n";
  }
  write_file(dir.path / "liad.csv", csv.str());
  REQUIRE(run({"fit-liad", "-i", (dir.path / "liad.csv").string(), "-o", dir.path.string()}).code == 0);
  const json r = report_result(read_json(dir.path / "fit_liad.json"), "fit-liad");
  CHECK(r["derived"]["peak_od"].get<double>() == doctest::Approx(liad_peak(truth, LiadModelForm::rise_decay_product).effective_od).epsilon(1e-6));
}

TEST_CASE("unconverged fits exit 4 unless allowed") {
  test::TempDir dir;
  REQUIRE(run({"simulate-spectrum", "-c", preset("fibre_363k.json"), "-o", dir.path.string(), "--noise", "0.01",
               "--seed", "7"}).code == 0);
  write_file(dir.path / "tight.json", R"({"fit": {"max_iterations": 1}})");
  const std::string csv = (dir.path / "spectrum.csv").string();
  const std::string cfg = (dir.path / "tight.json").string();
  CHECK(run({"fit-spectrum", "-c", cfg, "-i", csv, "-o", dir.path.string()}).code == 4);
  CHECK(fs::exists(dir.path / "fit_spectrum.json"));
  CHECK(run({"fit-spectrum", "-c", cfg, "-i", csv, "-o", dir.path.string(), "--allow-unconverged"}).code == 0);
}

TEST_CASE("transit-mc is deterministic and needs a seed") {
  test::TempDir dir;
  const fs::path a = dir.path / "a", b = dir.path / "b";
  CHECK(run({"transit-mc", "-o", a.string()}).code == 2);
  CHECK(empty_dir(a));
  REQUIRE(run({"transit-mc", "-c", preset("fibre_363k.json"), "-o", a.string(), "--workers", "1"}).code == 0);
  REQUIRE(run({"transit-mc", "-c", preset("fibre_363k.json"), "-o", b.string(), "--workers", "3"}).code == 0);
  json ja = read_json(a / "transit.json"), jb = read_json(b / "transit.json");
  const double mean = report_result(ja, "transit-mc")["mean_s"].get<double>();
  CHECK(mean > 60e-9);
  CHECK(mean < 140e-9);
  CHECK(report_result(ja, "transit-mc")["n_samples"] == 1000000);
  ja.erase("timestamp");
  jb.erase("timestamp");
  CHECK(ja.dump() == jb.dump());
}

TEST_CASE("flags override the config") {
  test::TempDir dir;
  REQUIRE(run({"transit-mc", "-c", preset("fibre_363k.json"), "-o", dir.path.string(), "--seed", "5", "-n",
               "20000", "--temperature", "1452"}).code == 0);
  const json r = report_result(read_json(dir.path / "transit.json"), "transit-mc");
  CHECK(r["rng_seed"] == 5);
  CHECK(r["n_samples"] == 20000);
  CHECK(r["temperature_k"] == 1452.0);
  CHECK(r["mean_s"].get<double>() < 60e-9);
}

TEST_CASE("pump-efficiency sweep is monotone") {
  test::TempDir dir;
  REQUIRE(run({"transit-mc", "-c", preset("fibre_363k.json"), "-o", dir.path.string(), "-n", "100000"}).code == 0);
  REQUIRE(run({"pump-efficiency", "-c", preset("fibre_363k.json"), "-o", dir.path.string(), "--transit-report",
               (dir.path / "transit.json").string()}).code == 0);
  const NumericTable t =
      parse_numeric_csv(read_text_file(dir.path / "pump_efficiency.csv"), {"rabi_hz", "efficiency"});
  REQUIRE(t.rows.size() == 41);
  CHECK(t.rows.front()[0] == 0.0);
  CHECK(t.rows.back()[0] == 1e9);
  CHECK(t.rows.front()[1] == 9.0 / 16.0);
  for (std::size_t i = 1; i < t.rows.size(); ++i) CHECK(t.rows[i][1] >= t.rows[i - 1][1]);
  const json r = report_result(read_json(dir.path / "pump_efficiency.json"), "pump-efficiency");
  CHECK(r["transit_source"] == "transit.json");
  CHECK(r["efficiency"].get<double>() == doctest::Approx(test::oracle::eta_700).epsilon(2e-3));

  CHECK(run({"pump-efficiency", "-o", dir.path.string(), "--transit-report", (dir.path / "none.json").string()})
            .code == 2);
  // a report of the wrong kind
  CHECK(run({"pump-efficiency", "-o", dir.path.string(), "--transit-report",
             (dir.path / "pump_efficiency.json").string()}).code == 2);
}

TEST_CASE("memory-report composes upstream reports") {
  test::TempDir dir;
  const std::string out = dir.path.string();
  REQUIRE(run({"transit-mc", "-c", preset("fibre_363k.json"), "-o", out, "-n", "100000"}).code == 0);
  REQUIRE(run({"pump-efficiency", "-c", preset("fibre_363k.json"), "-o", out, "--transit-report",
               out + "/transit.json"}).code == 0);
  const Run r = run({"memory-report", "-c", preset("raman_memory.json"), "-o", out, "--transit-report",
                     out + "/transit.json", "--pump-report", out + "/pump_efficiency.json"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("feasible") != std::string::npos);
  const json j = report_result(read_json(dir.path / "memory_report.json"), "memory-report");
  CHECK(j["verdict"] == "feasible");
  CHECK(read_text_file(dir.path / "memory_report.txt").find("feasible") != std::string::npos);
  bool saw_transit = false;
  for (const auto& line : j["lines"])
    if (line["name"] == "transit_over_lifetime") saw_transit = line["source"].get<std::string>().find("transit") != std::string::npos;
  CHECK(saw_transit);
}

TEST_CASE("memory-report with zero optical depth is infeasible") {
  test::TempDir dir;
  REQUIRE(run({"memory-report", "-c", preset("zero_od.json"), "-o", dir.path.string()}).code == 0);
  const json j = report_result(read_json(dir.path / "memory_report.json"), "memory-report");
  CHECK(j["verdict"] == "infeasible");
}

TEST_CASE("memory-report enumerates every missing upstream file") {
  test::TempDir dir;
  const Run r = run({"memory-report", "-c", preset("raman_memory.json"), "-o", (dir.path / "out").string(),
                     "--transit-report", "gone_transit.json", "--pump-report", "gone_pump.json", "--fit-report",
                     "gone_fit.json"});
  CHECK(r.code == 2);
  CHECK(r.err.find("memory.transit_report") != std::string::npos);
  CHECK(r.err.find("memory.pump_report") != std::string::npos);
  CHECK(r.err.find("memory.fit_report") != std::string::npos);
  CHECK(empty_dir(dir.path / "out"));
}

TEST_CASE("memory-report takes d* from a fit report") {
  test::TempDir dir;
  const std::string out = dir.path.string();
  REQUIRE(run({"simulate-spectrum", "-c", preset("fibre_363k.json"), "-o", out}).code == 0);
  REQUIRE(run({"fit-spectrum", "-c", preset("fibre_363k.json"), "-i", out + "/spectrum.csv", "-o", out}).code == 0);
  REQUIRE(run({"memory-report", "-c", preset("raman_memory.json"), "-o", out, "--fit-report",
               out + "/fit_spectrum.json"}).code == 0);
  const json j = report_result(read_json(dir.path / "memory_report.json"), "memory-report");
  // d* = 5.7 is far below the bandwidth threshold
  CHECK(j["verdict"] == "infeasible");
  for (const auto& line : j["lines"])
    if (line["name"] == "effective_od") {
      CHECK(line["value"].get<double>() == doctest::Approx(5.7).epsilon(1e-6));
      CHECK(line["source"].get<std::string>().find("fit_spectrum.json") != std::string::npos);
    }
}

TEST_CASE("reruns are byte-identical apart from the timestamp") {
  test::TempDir dir;
  const fs::path a = dir.path / "a", b = dir.path / "b";
  for (const auto& d : {a, b})
    REQUIRE(run({"simulate-spectrum", "-c", preset("fibre_363k.json"), "-o", d.string(), "--noise", "0.02", "--seed",
                 "11"}).code == 0);
  CHECK(read_text_file(a / "spectrum.csv") == read_text_file(b / "spectrum.csv"));
  json ja = read_json(a / "spectrum.json"), jb = read_json(b / "spectrum.json");
  CHECK(ja["input_digest"] == jb["input_digest"]);
  ja.erase("timestamp");
  jb.erase("timestamp");
  CHECK(ja.dump() == jb.dump());

  REQUIRE(run({"simulate-spectrum", "-c", preset("fibre_363k.json"), "-o", b.string(), "--noise", "0.02", "--seed",
               "12"}).code == 0);
  CHECK(read_json(b / "spectrum.json")["input_digest"] != ja["input_digest"]);
}

}  // TEST_SUITE
