#include "vptlab/asymptotics.hpp"

#include <ostream>

#include <boost/math/constants/constants.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "vptlab/csv.hpp"
#include "vptlab/error.hpp"

namespace vptlab {

namespace {

unsigned digits_of(const BigReal& a, const BigReal& b) {
  return std::max(precision_digits(a), precision_digits(b));
}

void require_negative(const BigReal& gamma, const char* what) {
  if (!(gamma < 0)) throw Error(ErrorKind::DomainError, std::string(what) + " needs gamma < 0");
}

BigReal tolerance(unsigned digits, int guard) {
  return pow(BigReal(10), -static_cast<long>(digits) + guard);
}

}  // namespace

BigReal f_k(const BigReal& gamma, const BigReal& sigma, long k) {
  require_negative(gamma, "f_k");
  PrecisionScope scope(digits_of(gamma, sigma));
  const BigReal s = sqrt(1 - gamma);
  return -(BigReal(k) + BigReal(3) / 2) * log(-gamma) + 4 * sigma / (3 * gamma) * s * s * s;
}

BigReal f_N_reduced(const BigReal& gamma, const BigReal& c) {
  require_negative(gamma, "f_N");
  PrecisionScope scope(digits_of(gamma, c));
  const BigReal s = sqrt(1 - gamma);
  return -log(-gamma) + 4 * c / (3 * gamma) * s * s * s;
}

BigReal extremum_residual(const BigReal& gamma, const BigReal& c) {
  require_negative(gamma, "extremum condition");
  PrecisionScope scope(digits_of(gamma, c));
  return 1 + 4 * c / (3 * gamma) * sqrt(1 - gamma) * (1 + gamma / 2);
}

SaddleSolution solve_gamma_c(unsigned digits) {
  PrecisionScope scope(digits);
  // Unknowns u = log(-gamma), v = log(c); d gamma/du = gamma, dc/dv = c.
  BigReal u = log(BigReal("0.25"));
  BigReal v = log(BigReal("0.19"));
  const BigReal tol = tolerance(digits, 8);

  auto residuals = [](const BigReal& gamma, const BigReal& c, BigReal& r1, BigReal& r2) {
    const BigReal s = sqrt(1 - gamma);
    const BigReal h = 4 * c / (3 * gamma);
    r1 = 1 + h * s * (1 + gamma / 2);
    r2 = -log(-gamma) + h * s * s * s;
  };

  BigReal r1, r2;
  residuals(-exp(u), exp(v), r1, r2);
  for (unsigned it = 1; it <= 200; ++it) {
    const BigReal gamma = -exp(u);
    const BigReal c = exp(v);
    const BigReal s = sqrt(1 - gamma);
    const BigReal h = 4 * c / (3 * gamma);
    const BigReal q = 1 + gamma / 2;
    // Partial derivatives in (gamma, c), then chain rule to (u, v).
    const BigReal d1g = -h / gamma * s * q - h / (2 * s) * q + h * s / 2;
    const BigReal d1c = h / c * s * q;
    const BigReal d2g = -1 / gamma - h * s * s * s / gamma - BigReal(3) / 2 * h * s;
    const BigReal d2c = h / c * s * s * s;
    const BigReal j11 = d1g * gamma, j12 = d1c * c;
    const BigReal j21 = d2g * gamma, j22 = d2c * c;
    const BigReal det = j11 * j22 - j12 * j21;
    if (det == 0) break;
    const BigReal du = -(j22 * r1 - j12 * r2) / det;
    const BigReal dv = -(-j21 * r1 + j11 * r2) / det;

    const BigReal norm = abs(r1) + abs(r2);
    BigReal lambda = 1;
    BigReal n1, n2;
    for (int halving = 0; halving < 60; ++halving) {
      residuals(-exp(u + lambda * du), exp(v + lambda * dv), n1, n2);
      if (abs(n1) + abs(n2) < norm) break;
      lambda /= 2;
    }
    u += lambda * du;
    v += lambda * dv;
    r1 = n1;
    r2 = n2;
    if (abs(r1) < tol && abs(r2) < tol) {
      return {-exp(u), exp(v), r1, r2, it};
    }
  }
  throw Error(ErrorKind::NoConvergence, "saddle system did not converge at " +
                                            std::to_string(digits) + " digits");
}

const SaddleSolution& default_saddle() {
  static const SaddleSolution solution = solve_gamma_c(50);
  return solution;
}

BigReal f_k_stationary_point(const BigReal& sigma, long k) {
  if (!(sigma > 0) || k < 1) {
    throw Error(ErrorKind::DomainError, "stationary point needs sigma > 0 and k >= 1");
  }
  const unsigned digits = precision_digits(sigma);
  PrecisionScope scope(digits);
  const BigReal kk = BigReal(k) + BigReal(3) / 2;
  // gamma^2 f_k'(gamma), free of the pole at gamma = 0.
  auto scaled_derivative = [&](const BigReal& gamma) {
    const BigReal s = sqrt(1 - gamma);
    return -kk * gamma - 4 * sigma / 3 * s * s * s - 2 * sigma * s * gamma;
  };
  const BigReal guess = -4 * sigma / (3 * BigReal(k));
  BigReal lo = guess * 4;
  BigReal hi = guess / 4;
  while (scaled_derivative(lo) < 0) lo *= 2;
  std::uintmax_t iters = 500;
  auto tol = boost::math::tools::eps_tolerance<BigReal>(static_cast<int>((digits - 5) * 3.32));
  auto r = boost::math::tools::toms748_solve(scaled_derivative, lo, hi, tol, iters);
  return (r.first + r.second) / 2;
}

BigReal semiclassical_discontinuity_magnitude(const BigReal& gbar) {
  if (!(gbar < 0)) throw Error(ErrorKind::DomainError, "semiclassical discontinuity needs gbar < 0");
  PrecisionScope scope(precision_digits(gbar));
  const BigReal pi = boost::math::constants::pi<BigReal>();
  return sqrt(6 / pi) * sqrt(4 / (-3 * gbar)) * exp(4 / (3 * gbar));
}

ConvergenceModelParams ConvergenceModelParams::make(const BigReal& g_s_abs, const BigReal& theta,
                                                    const BigReal& c,
                                                    const BigReal& correction_constant,
                                                    const BigReal& gamma) {
  if (!(g_s_abs > 0) || !(c > 0)) {
    throw Error(ErrorKind::Validation, "model parameters need |g_s| > 0 and c > 0");
  }
  PrecisionScope scope(digits_of(g_s_abs, c));
  ConvergenceModelParams p{g_s_abs, theta, c, BigReal(0), correction_constant, gamma};
  p.a = pow(g_s_abs * c, BigReal(-2) / 3);
  return p;
}

ConvergenceModelParams ConvergenceModelParams::defaults(unsigned digits) {
  const auto& saddle = default_saddle();
  return make(to_real("0.160", digits), to_real("-0.467", digits), round_to(saddle.c, digits),
              to_real("6.85", digits), round_to(saddle.gamma, digits));
}

BigReal c1_exponent_constant(const ConvergenceModelParams& params) {
  PrecisionScope scope(precision_digits(params.gamma));
  return -log(-params.gamma) * params.correction_constant;
}

BigReal model_SN_C1(long N, const BigReal& g, const ConvergenceModelParams& params) {
  if (N < 1 || !(g > 0)) throw Error(ErrorKind::DomainError, "model_SN_C1 needs N >= 1, g > 0");
  PrecisionScope scope(digits_of(g, params.c));
  const BigReal q = c1_exponent_constant(params);
  return exp(-(q + pow(params.c * g, BigReal(-2) / 3)) * cbrt(BigReal(N)));
}

BigReal model_SN_C1_leading(long N, const BigReal& g, const BigReal& c) {
  if (N < 1 || !(g > 0)) {
    throw Error(ErrorKind::DomainError, "model_SN_C1_leading needs N >= 1, g > 0");
  }
  PrecisionScope scope(digits_of(g, c));
  return exp(-cbrt(BigReal(N)) / pow(c * g, BigReal(2) / 3));
}

BigReal envelope_exponent(const ConvergenceModelParams& params) {
  PrecisionScope scope(digits_of(params.a, params.theta));
  return params.a * cos(params.theta);
}

BigReal model_SN_osc(long N, const ConvergenceModelParams& params, const BigReal& phase) {
  if (N < 1) throw Error(ErrorKind::DomainError, "model_SN_osc needs N >= 1");
  PrecisionScope scope(digits_of(params.a, params.theta));
  const BigReal t = cbrt(BigReal(N));
  return exp(-params.a * cos(params.theta) * t) * cos(params.a * sin(params.theta) * t + phase);
}

SubleadingModel model_SN_subleading(long N, const BigReal& sigma, const BigReal& ghat) {
  PrecisionScope scope(digits_of(sigma, ghat));
  const BigReal x = sigma * ghat;
  if (!(x > 0) || !(x < 1)) {
    throw Error(ErrorKind::DomainError,
                x == 1 ? "sigma*ghat = 1: degenerate (omega = 0 frame), no subleading decay"
                       : "model_SN_subleading needs 0 < sigma*ghat < 1");
  }
  // In units omega = 1: sigma ghat = 1 - 1/Omega^2 and sigma g = sigma ghat Omega^3.
  const BigReal omega2 = 1 / (1 - x);
  const BigReal sigma_g = x * omega2 * sqrt(omega2);
  return {pow(x, BigReal(N)), exp(-BigReal(N) / pow(sigma_g, BigReal(2) / 3))};
}

void write_model_curves_csv(std::ostream& out, long n_first, long n_last, const BigReal& g,
                            const ConvergenceModelParams& params, const BigReal& phase,
                            const std::vector<std::string>& comments) {
  csv::write_comments(out, comments);
  csv::write_row(out, {"N", "S_N_C1", "S_N_osc", "envelope"});
  for (long N = n_first; N <= n_last; ++N) {
    PrecisionScope scope(precision_digits(params.a));
    const BigReal env = exp(-envelope_exponent(params) * cbrt(BigReal(N)));
    csv::write_row(out, {std::to_string(N), to_decimal(model_SN_C1(N, g, params), 20),
                         to_decimal(model_SN_osc(N, params, phase), 20), to_decimal(env, 20)});
  }
}

}  // namespace vptlab
