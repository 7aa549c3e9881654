#include "doctest.h"

#include <cmath>
#include <sstream>

#include "vptlab/error.hpp"
#include "vptlab/oracle.hpp"
#include "vptlab/variational.hpp"

using namespace vptlab;

namespace {

const RationalSeries& series() {
  static const RationalSeries s = rs_coefficients(200);
  return s;
}

}  // namespace

TEST_SUITE("variational") {
  TEST_CASE("config validation") {
    auto cfg = VariationalConfig::make(to_real(4, 40), to_real(0L, 40), 5);
    CHECK_NOTHROW(cfg.validate());
    auto bad = cfg;
    bad.g = to_real(0L, 40);
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = cfg;
    bad.N = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = cfg;
    bad.c_constant = to_real("0.2", 40);
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = cfg;
    bad.correction_constant = to_real(-1, 40);
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK(parse_omega_strategy("stationary") == OmegaStrategy::Stationary);
    CHECK(parse_omega_strategy("formula") == OmegaStrategy::Formula);
    CHECK_THROWS_AS(parse_omega_strategy("best"), Error);
  }

  TEST_CASE("reexpansion at sigma = 0 reproduces the bare coefficients") {
    const auto t = reexpansion_coefficients(series(), to_real(0L, 40), 4);
    REQUIRE(t.epsilons.size() == 5);
    for (unsigned l = 0; l <= 4; ++l) CHECK(agree(t.epsilons[l], to_real(series()[l], 40), 35));
  }

  TEST_CASE("first reexpansion coefficients") {
    for (const char* sig : {"0.3", "1.7", "5"}) {
      const BigReal sigma = to_real(sig, 40);
      const auto t = reexpansion_coefficients(series(), sigma, 3);
      CHECK(t.epsilons[0] == BigReal("0.5"));
      PrecisionScope p(40);
      CHECK(agree(t.epsilons[1], BigReal("0.75") - sigma, 35));
    }
  }

  TEST_CASE("exact and real reexpansion paths agree") {
    const BigRational sigma(37, 10);
    const auto exact = reexpansion_coefficients_exact(series(), sigma, 40);
    const auto real = reexpansion_coefficients(series(), to_real(sigma, 60), 40, {}, 40);
    for (unsigned l = 0; l <= 40; ++l) CHECK(agree(real.epsilons[l], to_real(exact[l], 60), 38));
  }

  TEST_CASE("reexpansion is stable under escalation at N = 60") {
    auto cfg = VariationalConfig::make(to_real(4, 60), to_real(0L, 60), 60);
    const BigReal sigma = sigma_of_order(60, cfg);
    const auto a = reexpansion_coefficients(series(), sigma, 60);
    PrecisionPolicy hi;
    hi.base_digits = 120;
    const auto b = reexpansion_coefficients(series(), sigma, 60, hi);
    for (unsigned l = 0; l <= 60; l += 10) CHECK(agree(a.epsilons[l], b.epsilons[l], 50));
  }

  TEST_CASE("truncated energy reduces to the bare series at Omega = omega") {
    for (unsigned N : {0u, 1u, 3u, 6u}) {
      auto cfg = VariationalConfig::make(to_real("0.4", 40), to_real(1, 40), std::max(N, 1u));
      cfg.N = N;
      const BigReal w = truncated_energy(cfg, to_real(1, 40), series());
      CHECK(agree(w, series_partial_sum(series(), cfg.g, cfg.omega, N), 35));
    }
    auto cfg = VariationalConfig::make(to_real("0.4", 40), to_real(1, 40), 1);
    CHECK(agree(truncated_energy(cfg, to_real(1, 40), series()), to_real("0.575", 40), 35));
    cfg.N = 0;
    CHECK(agree(truncated_energy(cfg, to_real("2.5", 40), series()), to_real("1.25", 40), 35));
    CHECK_THROWS_AS(truncated_energy(cfg, to_real(0L, 40), series()), Error);
  }

  TEST_CASE("analytic derivatives match the verified energy and finite differences") {
    auto cfg = VariationalConfig::make(to_real("0.4", 60), to_real(1, 60), 6);
    PrecisionScope p(60);
    const BigReal omega = to_real("1.3", 60);
    const auto d = truncated_energy_derivatives(cfg, omega, series());
    CHECK(agree(d.value, truncated_energy(cfg, omega, series()), 40));
    const BigReal h = BigReal("1e-15");
    const auto up = truncated_energy_derivatives(cfg, omega + h, series());
    const auto dn = truncated_energy_derivatives(cfg, omega - h, series());
    CHECK(agree(d.first, (up.value - dn.value) / (2 * h), 20));
    CHECK(agree(d.second, (up.first - dn.first) / (2 * h), 20));
  }

  TEST_CASE("sigma consistency") {
    // sigma ghat = 1 - omega^2 / Omega^2 for sigma = Omega (Omega^2 - omega^2) / g, ghat = g / Omega^3.
    PrecisionScope p(50);
    const BigReal g = BigReal("0.7"), w = BigReal("1.1"), Om = BigReal("1.9");
    const BigReal sigma = Om * (Om * Om - w * w) / g, ghat = g / (Om * Om * Om);
    CHECK(agree(sigma * ghat, 1 - w * w / (Om * Om), 45));
  }

  TEST_CASE("sigma of order") {
    auto cfg = VariationalConfig::make(to_real(4, 40), to_real(0L, 40), 1);
    CHECK(to_decimal(cfg.c_constant, 15) == "1.86047272987975e-01");
    const BigReal s1 = sigma_of_order(1, cfg);
    CHECK(s1.convert_to<double>() == doctest::Approx(0.186047272987975 * 7.85).epsilon(1e-14));
    double prev = 1e9;
    for (unsigned N : {10u, 1000u, 100000u, 10000000u}) {
      const double ratio = (sigma_of_order(N, cfg) / N).convert_to<double>() / 0.186047272987975;
      CHECK(ratio > 1);
      CHECK(ratio < prev);
      prev = ratio;
    }
    CHECK(prev < 1.002);
    CHECK_THROWS_AS(sigma_of_order(0, cfg), Error);
  }

  TEST_CASE("strong derivative sums, hand values") {
    const BigReal ghat = to_real("0.3", 40);
    auto s0 = strong_derivative_sums(ghat, 0, 0, series());
    CHECK(agree(s0[0], to_real("0.5", 40), 35));
    auto s1 = strong_derivative_sums(ghat, 1, 0, series());
    PrecisionScope p(40);
    CHECK(agree(s1[0], BigReal("0.25") + 3 * ghat / 16, 35));
    CHECK_THROWS_AS(strong_derivative_sums(ghat, 2, 3, series()), Error);
    CHECK_THROWS_AS(strong_derivative_sums(to_real(0L, 40), 2, 1, series()), Error);
  }

  TEST_CASE("strong derivative sums rebuild the energy in reduced variables") {
    // w_N(ghat, x) = sum_n s_n x^n equals the truncated energy at Omega = 1, g = ghat, omega^2 = x.
    const unsigned N = 12;
    const BigReal ghat = to_real("0.35", 60);
    const auto s = strong_derivative_sums(ghat, N, N, series(), {}, 50);
    PrecisionScope p(60);
    for (const char* xs : {"0.01", "0.2", "0.45"}) {
      const BigReal x = BigReal(xs);
      BigReal sum = 0;
      for (unsigned n = N + 1; n-- > 0;) sum = sum * x + s[n];
      auto cfg = VariationalConfig::make(ghat, sqrt(x), N, 60);
      CHECK(agree(sum, truncated_energy(cfg, BigReal(1), series()), 40));
    }
  }

  TEST_CASE("first derivative sum matches a finite difference") {
    const unsigned N = 9;
    const BigReal ghat = to_real("0.4", 100);
    const auto s = strong_derivative_sums(ghat, N, 1, series(), {}, 60);
    PrecisionScope p(100);
    const BigReal h = BigReal("1e-25");
    auto w = [&](const BigReal& x) {
      auto cfg = VariationalConfig::make(ghat, sqrt(x), N, 100);
      return truncated_energy(cfg, BigReal(1), series());
    };
    const BigReal fd = (-3 * w(BigReal(0)) + 4 * w(h) - w(2 * h)) / (2 * h);
    CHECK(agree(s[1], fd, 40));
  }

  TEST_CASE("alpha_0 at N = 1") {
    auto cfg = VariationalConfig::make(to_real(4, 60), to_real(0L, 60), 1);
    const auto r = alpha_approximants(1, 0, cfg, series());
    const double a0 = r.alphas[0].convert_to<double>();
    CHECK(a0 > 0.66);
    CHECK(a0 < 0.70);
    PrecisionScope p(40);
    CHECK(agree(r.sigma_N * r.ghat_N, BigReal(1), 35));
    CHECK_FALSE(r.delta_N.has_value());
  }

  TEST_CASE("alphas carry delta when a reference is given") {
    auto cfg = VariationalConfig::make(to_real(4, 60), to_real(0L, 60), 10);
    const BigReal ref = alpha0_reference(40).energy;
    const auto r = alpha_approximants(10, 3, cfg, series(), {}, 40, ref);
    REQUIRE(r.alphas.size() == 4);
    REQUIRE(r.delta_N.has_value());
    CHECK(*r.delta_N > 0);
    CHECK(*r.delta_N < BigReal("1e-5"));
    CHECK_THROWS_AS(alpha_approximants(3, 4, cfg, series()), Error);
  }

  TEST_CASE("stationary strategy evaluates at a zero of dW/dOmega") {
    auto cfg = VariationalConfig::make(to_real(4, 60), to_real(0L, 60), 9);
    cfg.omega_strategy = OmegaStrategy::Stationary;
    const auto r = alpha_approximants(9, 0, cfg, series());
    const double a0 = r.alphas[0].convert_to<double>();
    CHECK(a0 == doctest::Approx(0.667986).epsilon(1e-4));
  }

  TEST_CASE("optimize omega: bare limit and root contract") {
    auto weak = VariationalConfig::make(to_real("1e-6", 60), to_real(1, 60), 1);
    weak.omega_strategy = OmegaStrategy::Stationary;
    const auto o1 = optimize_omega(weak, series());
    CHECK(std::abs(o1.omega.convert_to<double>() - 1) < 1e-3);

    // Odd orders have an extremum; even orders only a turning point.
    for (unsigned N : {1u, 2u, 3u, 4u}) {
      auto cfg = VariationalConfig::make(to_real("0.4", 60), to_real(1, 60), N);
      cfg.omega_strategy = OmegaStrategy::Stationary;
      const auto o = optimize_omega(cfg, series());
      CHECK(o.stationary == (N % 2 == 1));
      PrecisionScope p(60);
      const auto d = truncated_energy_derivatives(cfg, o.omega, series());
      const BigReal& zero = o.stationary ? d.first : d.second;
      CHECK(abs(zero) <= pow(BigReal(10), -50) * abs(d.value));
      CHECK_FALSE(o.candidates.empty());
    }
  }

  TEST_CASE("optimize omega tracks the order-dependent prediction at strong coupling") {
    for (unsigned N : {21u, 41u, 81u}) {
      auto cfg = VariationalConfig::make(to_real(4, 60), to_real(0L, 60), N);
      cfg.omega_strategy = OmegaStrategy::Stationary;
      const auto o = optimize_omega(cfg, series());
      CHECK(o.stationary);
      const double ratio = (o.omega / o.prediction).convert_to<double>();
      CHECK(ratio == doctest::Approx(1).epsilon(0.10));
    }
  }

  TEST_CASE("suppression of reexpansion coefficients") {
    for (const char* sig : {"0.5", "1", "2"}) {
      const BigReal sigma = to_real(sig, 60);
      const auto t = reexpansion_coefficients(series(), sigma, 80, {}, 30);
      const double target = std::exp(-2 * sigma.convert_to<double>());
      double prev_gap = 1e9;
      for (unsigned k = 40; k <= 80; k += 5) {
        const double ratio = (t.epsilons[k] / to_real(series()[k], 60)).convert_to<double>();
        const double gap = std::abs(ratio - target);
        CHECK(gap < prev_gap);
        prev_gap = gap;
      }
      CHECK(prev_gap < 0.2 * target);
    }
  }

  TEST_CASE("approximant csv round trip") {
    auto cfg = VariationalConfig::make(to_real(4, 60), to_real(0L, 60), 4);
    std::vector<ApproximantRecord> recs;
    for (unsigned N = 3; N <= 4; ++N) {
      recs.push_back(alpha_approximants(N, 2, cfg, series(), {}, 30, to_real("0.668", 40)));
    }
    recs[0].delta_N.reset();
    std::ostringstream out;
    write_approximants_csv(out, recs, {"test"});
    std::istringstream in(out.str());
    const auto back = read_approximants_csv(in, 40);
    REQUIRE(back.size() == 2);
    CHECK(back[1].N == 4);
    CHECK_FALSE(back[0].delta_N.has_value());
    REQUIRE(back[1].delta_N.has_value());
    CHECK(agree(back[1].alphas[2], recs[1].alphas[2], 25));
  }
}
