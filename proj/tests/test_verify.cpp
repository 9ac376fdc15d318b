#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cabm/json_io.hpp"
#include "cabm/verify.hpp"

#include <json.hpp>

#include <cmath>
#include <stdexcept>

using namespace cabm;

TEST_CASE("report comparison rule and hashing") {
  const CheckReport pass =
      makeReport("demo", {{"theta", "0.5"}}, 1.0, 1.02, 0.01, 3.0, 0.0);
  CHECK(pass.pass);
  CHECK(pass.discrepancy == doctest::Approx(0.02));
  CHECK(pass.tolerance == doctest::Approx(0.03));

  const CheckReport fail =
      makeReport("demo", {{"theta", "0.5"}}, 1.0, 1.05, 0.01, 3.0, 0.01);
  CHECK_FALSE(fail.pass);

  const CheckReport nan =
      makeReport("demo", {}, std::nan(""), 1.0, 0.0, 3.0, 10.0);
  CHECK_FALSE(nan.pass);

  CHECK(paramHash(pass) == paramHash(fail));  // inputs decide the hash
  const CheckReport other =
      makeReport("demo", {{"theta", "0.25"}}, 1.0, 1.02, 0.01, 3.0, 0.0);
  CHECK(paramHash(pass) != paramHash(other));

  const CheckReport reports[] = {pass, fail};
  CHECK(allPass(std::span<const CheckReport>(reports, 1)));
  CHECK_FALSE(allPass(reports));

  const std::string csv = reportsToCsv(reports);
  CHECK(csv.rfind("check,param_hash,analytic,mc_mean,mc_stderr,tolerance,pass\n",
                  0) == 0);
  CHECK(csv.find(",1\n") != std::string::npos);
  CHECK(csv.find(",0\n") != std::string::npos);

  const nlohmann::json doc = nlohmann::json::parse(reportsToJson(reports));
  CHECK(doc.at("schema_version") == 1);
  CHECK(doc.at("checks").size() == 2);
  CHECK(doc.at("checks")[0].at("name") == "demo");
  CHECK(doc.at("checks")[0].at("pass") == true);
  CHECK(doc.at("checks")[1].at("pass") == false);
  CHECK(doc.at("checks")[0].at("inputs").at("theta") == "0.5");
}

TEST_CASE("duality check: analytic Pfaffian matches the simulation") {
  const FiniteSpinData f{PointMeasure{{{-1.0, 1}, {0.0, 1}, {2.0, 1}}}};
  McParams mc;
  mc.dt = 2e-3;
  mc.replicates = 4000;
  mc.seed = 11;

  const double n1[] = {-0.5, 0.5};
  const CheckReport r = dualityCheck(f, 0.5, 0.5, n1, mc);
  CHECK(r.pass);
  CHECK(r.stdError > 0.0);
  CHECK(r.name == "duality_n1_theta0.5");

  // theta = 0 turns the statistic into an empty-interval probability.
  const CheckReport r0 = dualityCheck(f, 0.0, 0.5, n1, mc);
  CHECK(r0.pass);
  CHECK(r0.analytic >= 0.0);
  CHECK(r0.analytic <= 1.0);

  const double n2[] = {-0.5, 0.5, 1.0, 1.5};
  const CheckReport r2 = dualityCheck(f, 1.0, 0.5, n2, mc);
  CHECK(r2.pass);
}

TEST_CASE("duality check: empty initial measure is exact on both sides") {
  const FiniteSpinData empty{};
  McParams mc;
  mc.replicates = 50;
  const double pts[] = {-0.3, 0.8};
  const CheckReport r = dualityCheck(empty, 0.7, 0.4, pts, mc);
  CHECK(r.analytic == 1.0);
  CHECK(r.estimate == 1.0);
  CHECK(r.stdError == 0.0);
  CHECK(r.discrepancy == 0.0);
  CHECK(r.pass);
}

TEST_CASE("duality check rejects malformed requests") {
  const FiniteSpinData f{PointMeasure{{{0.0, 1}}}};
  McParams mc;
  mc.replicates = 10;
  const double odd[] = {0.0, 1.0, 2.0};
  CHECK_THROWS_AS(dualityCheck(f, 0.5, 0.5, odd, mc), std::invalid_argument);
  const double unsorted[] = {0.5, -0.5};
  CHECK_THROWS_AS(dualityCheck(f, 0.5, 0.5, unsorted, mc), std::invalid_argument);
  const FiniteSpinData inf{PointMeasure{{{0.0, kInfiniteWeight}}}};
  const double ok[] = {-0.5, 0.5};
  CHECK_THROWS_AS(dualityCheck(inf, 0.5, 0.5, ok, mc), std::invalid_argument);
}

TEST_CASE("intensity check: dense lattice start reproduces the maximal density") {
  const ScalarKernel kernel(InitialData(MaximalData{}), 0.0);
  const std::vector<double> init = latticeConfiguration(-4.0, 4.0, 0.02);
  McParams mc;
  mc.dt = 5e-4;
  mc.replicates = 8000;
  mc.seed = 5;
  IntensityGrid grid;  // bins on [-1,1], windows [-0.6,-0.2] x [0.2,0.6]
  const auto reports = intensityCheck(init, kernel, 0.125, grid, mc);
  REQUIRE(reports.size() == static_cast<std::size_t>(grid.bins) + 2);
  for (const auto& r : reports) {
    INFO(r.name, ": analytic ", r.analytic, " estimate ", r.estimate,
         " tolerance ", r.tolerance);
    CHECK(r.pass);
  }
  // The factorization row is analytic-only and essentially exact.
  CHECK(reports.back().name == "intensity_factorization");
  CHECK(reports.back().discrepancy < 1e-6);
}

TEST_CASE("intensity check validates its grid") {
  const ScalarKernel kernel(InitialData(MaximalData{}), 0.0);
  McParams mc;
  mc.replicates = 10;
  IntensityGrid bad;
  bad.bins = 0;
  CHECK_THROWS_AS(intensityCheck({0.0}, kernel, 0.5, bad, mc),
                  std::invalid_argument);
  IntensityGrid overlap;
  overlap.a1 = 0.3;
  overlap.b0 = 0.2;
  CHECK_THROWS_AS(intensityCheck({0.0}, kernel, 0.5, overlap, mc),
                  std::invalid_argument);
}

TEST_CASE("fredholm series: trivial and validation cases") {
  const ScalarKernel kernel(InitialData(MaximalData{}), 0.0);

  const FredholmResult zero =
      laplaceFredholm(kernel, 1.0, StepFunction::constant(0.0));
  CHECK(zero.value == 1.0);
  CHECK(zero.orderUsed == 0);
  CHECK(zero.converged);
  CHECK(zero.tailBound == std::vector<double>{0.0});

  const StepFunction zeroPieces{{-1.0, 1.0}, {0.0, 0.0, 0.0}};
  CHECK(laplaceFredholm(kernel, 1.0, zeroPieces).value == 1.0);

  const StepFunction phi{{-0.2, 0.2}, {0.0, 0.5, 0.0}};
  CHECK_THROWS_AS(laplaceFredholm(kernel, 0.0, phi), std::invalid_argument);
  CHECK_THROWS_AS(laplaceFredholm(kernel, 1.0, phi, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(laplaceFredholm(kernel, 1.0, phi, 1e-6, 0), std::invalid_argument);
  CHECK_THROWS_AS(laplaceFredholm(kernel, 1.0, phi, 1e-6, 13), std::invalid_argument);
  CHECK_THROWS_AS(laplaceFredholm(kernel, 1.0, phi, 1e-6, 12, 1), std::invalid_argument);
  CHECK_THROWS_AS(laplaceFredholm(kernel, 1.0, phi, 1e-6, 12, 33), std::invalid_argument);
  const StepFunction one{{-0.2, 0.2}, {0.0, 1.0, 0.0}};
  CHECK_THROWS_AS(laplaceFredholm(kernel, 1.0, one), std::invalid_argument);
  const StepFunction tail{{-0.2, 0.2}, {0.1, 0.5, 0.0}};
  CHECK_THROWS_AS(laplaceFredholm(kernel, 1.0, tail), std::invalid_argument);
  CHECK_THROWS_AS(laplaceFredholm(kernel, 1.0, StepFunction::constant(0.5)),
                  std::invalid_argument);
}

TEST_CASE("fredholm series: near-indicator recovers the no-particle probability") {
  const ScalarKernel kernel(InitialData(MaximalData{}), 0.0);
  const StepFunction phi{{-0.15, 0.15}, {0.0, 1.0 - 1e-6, 0.0}};
  const FredholmResult fr = laplaceFredholm(kernel, 1.0, phi);

  CHECK(fr.converged);
  CHECK(fr.tailBound.back() < 1e-6);
  CHECK(fr.orderUsed >= 2);
  CHECK(fr.value == doctest::Approx(0.880764615259515).epsilon(1e-3));
  CHECK(fr.partialSums.back() == fr.value);

  // Every term sits under its recorded majorant.
  REQUIRE(fr.termByOrder.size() == fr.orderBound.size());
  for (std::size_t k = 0; k < fr.termByOrder.size(); ++k)
    CHECK(std::abs(fr.termByOrder[k]) <= fr.orderBound[k] * (1.0 + 1e-12));

  // Alternating structure: the first-order truncation is a lower bound.
  CHECK(fr.partialSums[1] <= fr.value + 1e-15);

  // Quadrature stability: a smaller node budget agrees tightly.
  const FredholmResult coarse = laplaceFredholm(kernel, 1.0, phi, 1e-6, 12, 14);
  CHECK(coarse.value == doctest::Approx(fr.value).epsilon(1e-6));
}

TEST_CASE("fredholm series: reacting initial data stays in range") {
  const FiniteSpinData f{PointMeasure{{{-0.4, 1}, {0.3, 2}}}};
  const ScalarKernel kernel(InitialData(f), 0.5);
  const StepFunction phi{{-0.5, 0.4}, {0.0, 0.6, 0.0}};
  const FredholmResult fr = laplaceFredholm(kernel, 0.5, phi);
  CHECK(fr.converged);
  CHECK(fr.value > 0.5);
  CHECK(fr.value < 1.0);
}

TEST_CASE("laplace check: series vs simulation vs kernel") {
  const ScalarKernel kernel(InitialData(MaximalData{}), 0.0);
  const StepFunction phi{{-0.15, 0.15}, {0.0, 1.0 - 1e-6, 0.0}};
  const std::vector<double> init = latticeConfiguration(-6.0, 6.0, 0.04);
  McParams mc;
  mc.dt = 2e-3;
  mc.replicates = 2500;
  mc.seed = 9;
  const auto reports = laplaceCheck(kernel, 1.0, phi, init, mc);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].name == "laplace_series_vs_mc");
  CHECK(reports[1].name == "laplace_series_vs_kernel");
  for (const auto& r : reports) {
    INFO(r.name, ": analytic ", r.analytic, " estimate ", r.estimate,
         " tolerance ", r.tolerance);
    CHECK(r.pass);
  }
}

TEST_CASE("mixture check: linearity, survivors, cluster duality") {
  MixtureConfig c;
  c.theta = 0.5;
  c.k = 3;
  c.t = 0.1;
  c.eps = 1e-3;
  McParams mc;
  mc.dt = 2e-4;
  mc.replicates = 6000;
  mc.seed = 23;
  mc.biasAllowance = 0.02;
  const auto reports = mixtureCheck(c, mc);
  REQUIRE(reports.size() == 5);
  CHECK(reports[0].name == "mixture_kernel_linearity_theta0.5_k3");
  CHECK(reports[0].estimate <= 1e-8);  // exact identity, rounding only
  CHECK(reports[1].analytic == doctest::Approx(0.25));
  for (const auto& r : reports) {
    INFO(r.name, ": analytic ", r.analytic, " estimate ", r.estimate,
         " tolerance ", r.tolerance);
    CHECK(r.pass);
  }
}

TEST_CASE("mixture check validation") {
  McParams mc;
  MixtureConfig c;
  c.k = 1;
  CHECK_THROWS_AS(mixtureCheck(c, mc), std::invalid_argument);
  c.k = 2;
  c.theta = 1.5;
  CHECK_THROWS_AS(mixtureCheck(c, mc), std::invalid_argument);
  c.theta = 0.5;
  c.eps = 0.0;
  CHECK_THROWS_AS(mixtureCheck(c, mc), std::invalid_argument);
}

TEST_CASE("initial data json round trips") {
  const char* texts[] = {
      R"({"variant":"maximal"})",
      R"({"variant":"finite_spin","atoms":[{"position":-0.3,"multiplicity":1},{"position":0.4,"multiplicity":"inf"}]})",
      R"({"variant":"product","factor":{"breakpoints":[-0.2,0.5],"values":[1.0,-1.0,1.0]}})",
      R"({"variant":"closed_set_avoid","intervals":[{"lo":-0.5,"hi":0.2}],"isolated":[{"position":1.0,"weight":2}]})",
  };
  for (const char* text : texts) {
    const InitialData f = initialDataFromJsonText(text);
    const std::string emitted = initialDataToJsonText(f);
    const InitialData g = initialDataFromJsonText(emitted);
    CHECK(emitted == initialDataToJsonText(g));
    CHECK(f.index() == g.index());
  }

  const InitialData shorthand = initialDataFromJsonText("\"maximal\"");
  CHECK(std::holds_alternative<MaximalData>(shorthand));
  const InitialData empty = initialDataFromJsonText("\"empty\"");
  CHECK(std::get<FiniteSpinData>(empty).measure.atoms.empty());

  const InitialData prod = initialDataFromJsonText(R"({"variant":"product","constant":0.6})");
  CHECK(std::get<ProductData>(prod).factor.values == std::vector<double>{0.6});

  CHECK_THROWS_AS(initialDataFromJsonText("not json"), std::invalid_argument);
  CHECK_THROWS_AS(initialDataFromJsonText(R"({"variant":"nope"})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(initialDataFromJsonText(R"("bogus")"), std::invalid_argument);
  CHECK_THROWS_AS(
      initialDataFromJsonText(R"({"variant":"finite_spin","atoms":[{"position":0.0,"multiplicity":0}]})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      initialDataFromJsonText(R"({"variant":"finite_spin","atoms":[{"position":0.0,"multiplicity":"lots"}]})"),
      std::invalid_argument);
  CHECK_THROWS_AS(initialDataFromJsonText(R"({"variant":"product"})"),
                  std::invalid_argument);

  const StepFunction phi =
      stepFunctionFromJsonText(R"({"breakpoints":[0.0,1.0],"values":[0.0,0.5,0.0]})");
  CHECK(phi(0.5) == 0.5);
  CHECK(stepFunctionFromJsonText(stepFunctionToJsonText(phi)).values == phi.values);
  CHECK_THROWS_AS(stepFunctionFromJsonText("[]"), std::invalid_argument);
}

TEST_CASE("quick acceptance battery passes end to end") {
  AcceptanceOptions opt;
  opt.quick = true;
  const auto results = runAcceptance(opt);
  REQUIRE(results.size() == 7);
  for (std::size_t i = 0; i < results.size(); ++i) {
    CHECK(results[i].index == static_cast<int>(i) + 1);
    CHECK(!results[i].name.empty());
    CHECK(!results[i].detail.empty());
    INFO(results[i].name, ": ", results[i].detail);
    CHECK(results[i].pass);
  }
}
