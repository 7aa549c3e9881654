#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vptlab/asymptotics.hpp"
#include "vptlab/error.hpp"
#include "vptlab/oracle.hpp"
#include "vptlab/rs_series.hpp"
#include "vptlab/singularity.hpp"
#include "vptlab/variational.hpp"

using namespace vptlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!out.pass) ++failures;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2fs", secs);
  std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " ["
            << out.detail << "; " << buf << "]" << std::endl;
}

std::string fmt(double x, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << x;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Shared pipeline state, computed lazily.
const RationalSeries& series() {
  static const RationalSeries s = rs_coefficients(200);
  return s;
}

const OracleEnergy& reference() {
  static const OracleEnergy r = alpha0_reference(45);
  return r;
}

VariationalConfig strong_config(unsigned N) {
  return VariationalConfig::make(to_real(4, 60), to_real(0L, 60), N);
}

const std::vector<ApproximantRecord>& records() {
  static const std::vector<ApproximantRecord> recs = [] {
    std::vector<ApproximantRecord> out;
    for (unsigned N = 1; N <= 120; ++N) {
      out.push_back(alpha_approximants(N, 0, strong_config(N), series(), {}, 40,
                                       reference().energy));
    }
    return out;
  }();
  return recs;
}

const DeltaSequence& deltas() {
  static const DeltaSequence d =
      build_delta_sequence(records(), reference().energy, reference().certified_digits);
  return d;
}

const ApproximantRecord& strong_alphas() {
  static const ApproximantRecord r =
      alpha_approximants(200, 22, strong_config(200), series(), {}, 40);
  return r;
}

std::optional<SingularityEstimate> method_a, method_b;

const SingularityEstimate& estimate_a() {
  if (!method_a) method_a = fit_oscillation(deltas().restricted(40, 120));
  return *method_a;
}

const SingularityEstimate& estimate_b() {
  if (!method_b) method_b = fit_ratio_singularity(ratio_sequence(strong_alphas().alphas));
  return *method_b;
}

bool within(double x, double lo, double hi) { return x >= lo && x <= hi; }

}  // namespace

int main() {
  report(1, "exact low-order coefficients", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = rs_coefficients(4);
    const double secs = seconds_since(t0);
    const std::vector<BigRational> expected{BigRational(1, 2), BigRational(3, 4),
                                            BigRational(-21, 8), BigRational(333, 16),
                                            BigRational(-30885, 128)};
    bool ok = s.size() == expected.size();
    for (std::size_t l = 0; ok && l < expected.size(); ++l) ok = s[l] == expected[l];
    return Outcome{ok && secs < 1, "E_4 = " + to_string(s[4]) + ", " + fmt(secs) + "s"};
  });

  report(2, "saddle constants at 30 digits", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sol = solve_gamma_c(30);
    const double secs = seconds_since(t0);
    const bool ok = agree(sol.gamma, to_real("-0.242964029973520", 30), 14) &&
                    agree(sol.c, to_real("0.186047272987975", 30), 14) && secs < 1;
    return Outcome{ok, "gamma = " + to_decimal(sol.gamma, 16) + ", c = " + to_decimal(sol.c, 16)};
  });

  report(3, "C_1 exponent constant", [] {
    const auto& sol = default_saddle();
    PrecisionScope p(50);
    const double q = (-log(-sol.gamma) * BigReal("6.85")).convert_to<double>();
    return Outcome{within(q, 9.60, 9.80), "q = " + fmt(q, 8)};
  });

  report(4, "strong-coupling alpha_0 vs oracle (N=23: 10 digits, N=80: 15 digits)", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r23 = alpha_approximants(23, 0, strong_config(23), series(), {}, 40);
    const auto r80 = alpha_approximants(80, 0, strong_config(80), series(), {}, 40);
    const double secs = seconds_since(t0);
    const double d23 = agreeing_digits(r23.alphas[0], reference().energy);
    const double d80 = agreeing_digits(r80.alphas[0], reference().energy);
    const bool ok = d23 >= 10 && d80 >= 15 && secs < 600;
    return Outcome{ok, "N=23: " + fmt(d23, 4) + " digits, N=80: " + fmt(d80, 4) +
                           " digits, reference certified to " +
                           std::to_string(reference().certified_digits)};
  });

  report(5, "convergence envelope a cos(theta) over N in [40, 120]", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& est = estimate_a();
    const double secs = seconds_since(t0);
    const double env = *est.envelope_constant();
    const unsigned top = PrecisionPolicy{}.working_digits(120);
    return Outcome{within(env, 8.8, 9.6) && secs < 1800,
                   "a cos(theta) = " + fmt(env) + ", working digits at N=120: " +
                       std::to_string(top)};
  });

  report(6, "singularity from the oscillation fit", [] {
    const auto& est = estimate_a();
    const bool ok = std::abs(est.theta + 0.467) <= 0.03 && std::abs(est.g_s_abs - 0.160) <= 0.010;
    return Outcome{ok, "theta = " + fmt(est.theta) + ", |g_s| = " + fmt(est.g_s_abs)};
  });

  report(7, "singularity from the ratio fit", [] {
    const auto& est = estimate_b();
    const double xs = *est.x_s_abs;
    const bool ok = std::abs(xs * 0.117 - 1) <= 0.05 && std::abs(est.theta + 0.467) <= 0.05 &&
                    std::abs(est.g_s_abs / 0.160 - 1) <= 0.02;
    return Outcome{ok, "|x_s| = " + fmt(xs) + " (1/|x_s| = " + fmt(1 / xs) + "), theta = " +
                           fmt(est.theta) + ", |g_s| = " + fmt(est.g_s_abs)};
  });

  report(8, "cross-validation of the two methods", [] {
    const auto r = cross_validate(estimate_a(), estimate_b());
    return Outcome{r.pass, "rel diff |g_s| = " + fmt(r.rel_diff_g_s_abs, 3) +
                               ", theta = " + fmt(r.rel_diff_theta, 3)};
  });

  report(9, "suppression factor eps_k / E_k -> exp(-2 sigma)", [] {
    bool ok = true;
    std::string detail;
    for (const char* sig : {"0.5", "1", "2"}) {
      const BigReal sigma = to_real(sig, 60);
      const auto t = reexpansion_coefficients(series(), sigma, 80, {}, 30);
      const double target = std::exp(-2 * sigma.convert_to<double>());
      double prev = INFINITY;
      for (unsigned k = 40; k <= 80; ++k) {
        const double ratio = (t.epsilons[k] / to_real(series()[k], 60)).convert_to<double>();
        const double gap = std::abs(ratio - target);
        ok = ok && gap < prev;
        prev = gap;
      }
      ok = ok && prev < 0.2 * target;
      detail += std::string(detail.empty() ? "" : ", ") + "sigma=" + sig +
                ": rel gap " + fmt(prev / target, 3);
    }
    return Outcome{ok, detail};
  });

  report(10, "strong-coupling sum vs oracle (g=2 agrees, g=0.1 fails)", [] {
    const auto& alphas = strong_alphas().alphas;
    const BigReal w = to_real(1, 50);
    const BigReal g2 = to_real(2, 50), g01 = to_real("0.1", 50);
    const BigReal e2 = ground_energy(g2, w, 30).energy;
    const BigReal e01 = ground_energy(g01, w, 30).energy;
    const BigReal s2 = strong_coupling_partial_sum(alphas, g2, w, 23);
    const BigReal s01 = strong_coupling_partial_sum(alphas, g01, w, 23);
    const double d2 = agreeing_digits(s2, e2);
    PrecisionScope p(50);
    const double err01 = abs(s01 - e01).convert_to<double>();
    return Outcome{d2 >= 6 && err01 > 1e-2,
                   "g=2: " + fmt(d2, 4) + " digits, g=0.1: error " + fmt(err01, 3)};
  });

  report(11, "property suite", [] {
    std::vector<std::string> failed;
    auto expect = [&](bool cond, const char* name) {
      if (!cond) failed.push_back(name);
    };

    {
      const auto& table = shared_half_binomials();
      bool ok = true;
      for (unsigned j = 0; j <= 200 && ok; ++j) {
        const BigRational a(1 - 3 * static_cast<long>(j), 2);
        ok = table(j, 0) == 1;
        for (unsigned m = 1; ok && j + m <= 200; ++m) {
          ok = table(j, m) == table(j, m - 1) * (a - m + 1) / m;
        }
      }
      expect(ok, "binomial recurrence");
    }
    {
      bool ok = true;
      for (unsigned l = 1; l <= 200; ++l) ok = ok && sign(series()[l]) == (l % 2 ? 1 : -1);
      expect(ok, "coefficient sign alternation");
    }
    {
      const auto a = solve_gamma_c(30), b = solve_gamma_c(60);
      expect(agree(a.gamma, b.gamma, 28) && agree(a.c, b.c, 28), "saddle precision stability");
      const auto prm = ConvergenceModelParams::defaults();
      const double q = c1_exponent_constant(prm).convert_to<double>();
      expect(within(q, 9.65, 9.75), "q range");
      const double env = envelope_exponent(prm).convert_to<double>();
      expect(std::abs(env - 9.23) / 9.23 <= 0.01, "envelope within 1% of 9.23");
    }
    {
      const auto& s = series();
      const auto t = reexpansion_coefficients(s, to_real(0L, 40), 30);
      bool ok = true;
      for (unsigned l = 0; l <= 30; ++l) ok = ok && agree(t.epsilons[l], to_real(s[l], 40), 35);
      expect(ok, "reexpansion at sigma = 0");
    }
    {
      // Delta_N <= A exp(-8.8 N^(1/3)), A from N in [10, 40].
      double A = 0;
      for (const auto& e : deltas().entries) {
        if (e.N < 10 || e.N > 40) continue;
        A = std::max(A, e.delta.convert_to<double>() * std::exp(8.8 * std::cbrt(double(e.N))));
      }
      bool ok = true;
      for (const auto& e : deltas().entries) {
        if (e.N < 10) continue;
        ok = ok && e.delta.convert_to<double>() <= A * std::exp(-8.8 * std::cbrt(double(e.N)));
      }
      expect(ok, "convergence envelope bound");
    }
    {
      const auto r = ground_energy(to_real(2, 50), to_real(1, 50), 30);
      bool ok = true;
      for (std::size_t i = 1; i < r.history.size(); ++i) {
        ok = ok && r.history[i].energy <= r.history[i - 1].energy;
      }
      expect(ok, "oracle non-increasing in basis size");
      OracleOptions alt;
      alt.scale_frequency = to_real("1.7", 50);
      const auto b = ground_energy(to_real(2, 50), to_real(1, 50), 30, alt);
      expect(agree(r.energy, b.energy, std::min(r.certified_digits, b.certified_digits)),
             "oracle basis-frequency independence");
    }
    {
      bool ok = true;
      for (long g : {4L, 32L, 500L}) {
        const auto e = ground_energy(to_real(g, 60), to_real(0L, 60), 40);
        PrecisionScope p(60);
        const unsigned d = std::min(e.certified_digits, reference().certified_digits);
        ok = ok && agree(e.energy / cbrt(BigReal(g) / 4), reference().energy, d - 1);
      }
      expect(ok, "oracle omega = 0 scaling at g = 4, 32, 500");
    }
    {
      bool ok = true;
      for (const char* gs : {"1e-3", "1e-4"}) {
        const BigReal g = to_real(gs, 40);
        const BigReal e = ground_energy(g, to_real(1, 40), 25).energy;
        PrecisionScope p(40);
        ok = ok && abs(e - BigReal("0.5") - BigReal("0.1875") * g) <= BigReal("0.2") * g * g;
      }
      expect(ok, "oracle weak-coupling limit");
    }
    {
      DeltaSequence syn;
      syn.reference_alpha0 = to_real("0.668", 30);
      syn.reference_digits = 30;
      for (long N = 40; N <= 120; ++N) {
        const double t = std::cbrt(double(N));
        const double d = std::exp(3 - 10.4 * std::cos(-0.467) * t) *
                         std::abs(std::cos(10.4 * std::sin(-0.467) * t + 0.3));
        syn.entries.push_back({N, to_real(format_double(d), 30), N % 2 ? Parity::Odd : Parity::Even});
      }
      const auto est = fit_oscillation(syn);
      expect(std::abs(*est.a / 10.4 - 1) < 1e-6 && std::abs(est.theta / -0.467 - 1) < 1e-6,
             "oscillation fit round trip");
      expect(to_json(est) == to_json(fit_oscillation(syn)), "oscillation fit determinism");
    }
    {
      std::vector<BigReal> R;
      for (int n = 0; n < 22; ++n) {
        R.push_back(to_real(format_double(ratio_model(n, 1 / 0.117, -0.467, -0.15)), 30));
      }
      const auto est = fit_ratio_singularity(R);
      expect(std::abs(*est.x_s_abs * 0.117 - 1) < 1e-6 && std::abs(est.theta / -0.467 - 1) < 1e-6,
             "ratio fit round trip");
      expect(est.g_s_abs == 4 * std::pow(*est.x_s_abs, -1.5), "ratio conversion identity");
      const auto& alphas = strong_alphas().alphas;
      std::vector<BigReal> scaled;
      for (const auto& a : alphas) {
        PrecisionScope scope(precision_digits(a));
        scaled.push_back(a * BigReal(-3));
      }
      const auto r1 = ratio_sequence(alphas), r2 = ratio_sequence(scaled);
      bool ok = true;
      for (std::size_t i = 0; i < r1.size(); ++i) ok = ok && agree(r1[i], r2[i], 35);
      expect(ok, "ratio scale covariance");
    }
    std::string detail = failed.empty() ? "all properties hold" : "failed:";
    for (const auto& f : failed) detail += " " + f + ";";
    return Outcome{failed.empty(), detail};
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
