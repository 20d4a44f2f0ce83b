#include "doctest.h"

#include <cmath>

#include "hcf/error.hpp"
#include "hcf/memory_metrics.hpp"
#include "support.hpp"

using namespace hcf;

namespace {

MemoryBudget reference_budget() {
  MemoryBudget b;
  b.effective_od = 300.0;
  b.homogeneous_gamma = 5.2e6;
  b.inhomogeneous_gamma = test::oracle::fwhm_480;
  b.bandwidth_delta = 1.5e9;
  b.rabi_omega = 3e9;
  b.detuning_Delta = 15e9;
  b.storage_time = 100e-9;
  b.pulse_duration = 300e-12;
  return b;
}

FeasibilityInputs reference_inputs() {
  FeasibilityInputs in;
  in.budget = reference_budget();
  in.geometry = FibreGeometry{};
  in.coupling_efficiency = 0.65;
  return in;
}

}  // namespace

TEST_SUITE("memory-metrics") {

TEST_CASE("raman coupling examples") {
  MemoryBudget b;
  b.od = 1e4;
  b.homogeneous_gamma = 5.2e6;
  b.bandwidth_delta = 1.5e9;
  b.detuning_Delta = 10e9;
  b.rabi_omega = 3e9;
  const RamanCoupling c = raman_coupling(b);
  CHECK(c.c_squared == doctest::Approx(test::oracle::c_squared_example).epsilon(1e-12));
  CHECK(c.efficient);
  CHECK(!c.adiabatic_warning);

  b.rabi_omega = 0.0;
  CHECK(raman_coupling(b).c_squared == 0.0);
  CHECK(!raman_coupling(b).efficient);
}

TEST_CASE("raman coupling scaling") {
  MemoryBudget b = reference_budget();
  const double c0 = raman_coupling(b).c_squared;
  MemoryBudget d2 = b;
  d2.effective_od = 600.0;
  CHECK(raman_coupling(d2).c_squared == doctest::Approx(2 * c0).epsilon(1e-14));
  MemoryBudget big_delta = b;
  big_delta.detuning_Delta *= 2;
  CHECK(raman_coupling(big_delta).c_squared == doctest::Approx(c0 / 4).epsilon(1e-14));

  for (double k : {0.1, 3.0, 17.0}) {
    MemoryBudget widths = b;
    widths.od = optical_depth(b);
    widths.homogeneous_gamma *= k;
    widths.bandwidth_delta *= k;
    CHECK(raman_coupling(widths).c_squared == doctest::Approx(c0).epsilon(1e-13));
    MemoryBudget fields = b;
    fields.rabi_omega *= k;
    fields.detuning_Delta *= k;
    CHECK(raman_coupling(fields).c_squared == doctest::Approx(c0).epsilon(1e-13));
  }
}

TEST_CASE("raman coupling errors and adiabatic warning") {
  MemoryBudget b = reference_budget();
  b.bandwidth_delta = 0.0;
  CHECK_THROWS_AS(raman_coupling(b), DomainError);
  b = reference_budget();
  b.detuning_Delta = 0.0;
  CHECK_THROWS_AS(raman_coupling(b), DomainError);
  b = reference_budget();
  b.rabi_omega = 0.6 * b.detuning_Delta;
  CHECK(raman_coupling(b).adiabatic_warning);
  b.rabi_omega = 0.5 * b.detuning_Delta;
  CHECK(!raman_coupling(b).adiabatic_warning);
}

TEST_CASE("required effective optical depth") {
  const OdRequirement r = required_effective_od(1.5e9, 420e6);
  CHECK(r.ratio == doctest::Approx(1.5 / 0.42).epsilon(1e-14));
  CHECK(std::lround(r.ratio) == 4);
  CHECK(required_effective_od(420e6, 420e6, 10.0).threshold == 10.0);
  const OdRequirement p = required_effective_od(1.5e9, 420e6, 10.0, 300.0);
  REQUIRE(p.pass.has_value());
  CHECK(*p.pass);
  CHECK(p.threshold == doctest::Approx(35.714).epsilon(1e-4));
  CHECK(!required_effective_od(1.5e9, 420e6).pass.has_value());
  CHECK_THROWS_AS(required_effective_od(1.5e9, 420e6, 0.5), DomainError);
  CHECK_THROWS_AS(required_effective_od(0.0, 420e6), DomainError);
}

TEST_CASE("time bandwidth product") {
  CHECK(time_bandwidth_product(100e-9, 300e-12) == doctest::Approx(333.333).epsilon(1e-5));
  CHECK(time_bandwidth_product(1e-6, 1e-6) == 1.0);
  CHECK_THROWS_AS(time_bandwidth_product(0.0, 1.0), DomainError);
}

TEST_CASE("propagation transmission") {
  CHECK(propagation_transmission(0.2, 1.0) == doctest::Approx(test::oracle::transmission_02db).epsilon(1e-14));
  CHECK(propagation_transmission(0.0, 1.0) == 1.0);
  CHECK(propagation_transmission(10.0, 1.0) == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("reference budget is feasible") {
  FeasibilityInputs in = reference_inputs();
  in.transit_mean = test::oracle::transit_mean_363;
  in.transit_source = "transit-mc";
  in.excited_lifetime = 30.473e-9;
  in.pump_efficiency = 0.77;
  in.pump_source = "pump-efficiency";
  const FeasibilityReport r = feasibility_report(in);
  CHECK(r.feasible);
  CHECK(r.failing_conditions.empty());
  CHECK(*r.line("raman_coupling_c2").pass);
  CHECK(*r.line("required_effective_od").pass);
  CHECK(r.line("effective_od").value == 300.0);
  CHECK(r.line("propagation_transmission").value == doctest::Approx(test::oracle::transmission_02db));
  CHECK(r.line("coupling_efficiency").value == 0.65);
  CHECK(r.line("time_bandwidth_product").value == doctest::Approx(332.68).epsilon(1e-3));
  CHECK(r.line("storage_time").source == "transit-mc");
  CHECK(r.line("pump_efficiency").source == "pump-efficiency");
  for (const auto& l : r.lines) CHECK(!l.source.empty());
  CHECK(r.to_text().find("feasible") != std::string::npos);
}

TEST_CASE("zero optical depth is infeasible with the condition named") {
  FeasibilityInputs in = reference_inputs();
  in.budget->effective_od = 0.0;
  const FeasibilityReport r = feasibility_report(in);
  CHECK(!r.feasible);
  REQUIRE(!r.failing_conditions.empty());
  CHECK(r.failing_conditions[0].find("raman_coupling_c2") != std::string::npos);
  CHECK(r.to_text().find("infeasible") != std::string::npos);
}

TEST_CASE("missing inputs are enumerated by name") {
  FeasibilityInputs in;
  try {
    feasibility_report(in);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("budget") != std::string::npos);
    CHECK(msg.find("geometry") != std::string::npos);
    CHECK(msg.find("coupling_efficiency") != std::string::npos);
  }
  in = reference_inputs();
  in.budget->effective_od.reset();
  in.budget->pulse_duration = 0.0;
  try {
    feasibility_report(in);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("budget.od or budget.effective_od") != std::string::npos);
    CHECK(msg.find("budget.pulse_duration") != std::string::npos);
  }
}

TEST_CASE("verdict is monotone in optical depth and rabi frequency") {
  bool was_feasible = false;
  for (double od = 0.0; od <= 600.0; od += 5.0) {
    FeasibilityInputs in = reference_inputs();
    in.budget->effective_od = od;
    const bool now = feasibility_report(in).feasible;
    CHECK(!(was_feasible && !now));
    was_feasible = now;
  }
  was_feasible = false;
  for (double rabi = 0.0; rabi <= 14e9; rabi += 0.25e9) {
    FeasibilityInputs in = reference_inputs();
    in.budget->rabi_omega = rabi;
    const bool now = feasibility_report(in).feasible;
    CHECK(!(was_feasible && !now));
    was_feasible = now;
  }
  CHECK(was_feasible);
}

TEST_CASE("adiabatic breakdown is a warning, not a failure") {
  FeasibilityInputs in = reference_inputs();
  in.budget->rabi_omega = 0.8 * in.budget->detuning_Delta;
  const FeasibilityReport r = feasibility_report(in);
  CHECK(r.feasible);
  CHECK(!r.warnings.empty());
}

TEST_CASE("transit shorter than the excited lifetime fails the verdict") {
  FeasibilityInputs in = reference_inputs();
  in.transit_mean = 10e-9;
  in.transit_source = "test";
  in.excited_lifetime = 30e-9;
  const FeasibilityReport r = feasibility_report(in);
  CHECK(!r.feasible);
  CHECK(!*r.line("transit_over_lifetime").pass);
}

}  // TEST_SUITE
