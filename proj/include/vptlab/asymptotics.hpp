#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vptlab/precision.hpp"

namespace vptlab {

/// Joint solution (gamma, c) of the extremum condition
///   1 + (4c / 3 gamma) (1 - gamma)^(1/2) (1 + gamma/2) = 0
/// and the vanishing condition f_N(gamma)/N = 0.
struct SaddleSolution {
  BigReal gamma;
  BigReal c;
  BigReal residual_gamma1;
  BigReal residual_fN;
  unsigned iterations = 0;
};

/// Inputs of the closed-form convergence models. `a` is derived:
/// a = (g_s_abs * c)^(-2/3).
struct ConvergenceModelParams {
  BigReal g_s_abs;
  BigReal theta;
  BigReal c;
  BigReal a;
  BigReal correction_constant;
  BigReal gamma;  // saddle gamma, enters the C_1 exponent

  static ConvergenceModelParams make(const BigReal& g_s_abs, const BigReal& theta,
                                     const BigReal& c, const BigReal& correction_constant,
                                     const BigReal& gamma);
  // |g_s| = 0.160, theta = -0.467, saddle (gamma, c), correction 6.85.
  static ConvergenceModelParams defaults(unsigned digits = 50);
};

// -(k + 3/2) log(-gamma) + (4 sigma / 3 gamma) (1 - gamma)^(3/2); gamma < 0.
BigReal f_k(const BigReal& gamma, const BigReal& sigma, long k);

// -log(-gamma) + (4c / 3 gamma) (1 - gamma)^(3/2); gamma < 0.
BigReal f_N_reduced(const BigReal& gamma, const BigReal& c);

// Left-hand side of the extremum condition.
BigReal extremum_residual(const BigReal& gamma, const BigReal& c);

/// Damped Newton in (log(-gamma), log c) from (-0.25, 0.19) at `digits`
/// precision. Throws Error(NoConvergence) when the residuals do not fall below
/// 10^-(digits-8) within 200 iterations.
SaddleSolution solve_gamma_c(unsigned digits = 50);

// solve_gamma_c(50), computed once.
const SaddleSolution& default_saddle();

// Stationary point of f_k in gamma near -4 sigma / 3k (numerical root).
BigReal f_k_stationary_point(const BigReal& sigma, long k);

/// |disc E(gbar)| / 2 = sqrt(6/pi) sqrt(4 / (-3 gbar)) exp(4 / (3 gbar)), gbar < 0.
BigReal semiclassical_discontinuity_magnitude(const BigReal& gbar);

// q = -log(-gamma) * correction_constant.
BigReal c1_exponent_constant(const ConvergenceModelParams& params);

/// exp(-[q + (c g)^(-2/3)] N^(1/3)).
BigReal model_SN_C1(long N, const BigReal& g, const ConvergenceModelParams& params);

/// exp(-N^(1/3) / (c g)^(2/3)), the C_1 estimate before the finite-N correction.
BigReal model_SN_C1_leading(long N, const BigReal& g, const BigReal& c);

/// exp(-a cos(theta) N^(1/3)) cos(a sin(theta) N^(1/3) + phase).
BigReal model_SN_osc(long N, const ConvergenceModelParams& params, const BigReal& phase);

// a cos(theta)
BigReal envelope_exponent(const ConvergenceModelParams& params);

struct SubleadingModel {
  BigReal power;        // (sigma ghat)^N
  BigReal approximant;  // exp(-N / (sigma g)^(2/3)), with Omega from sigma ghat = 1 - 1/Omega^2
};

/// Requires 0 < sigma ghat < 1; sigma ghat = 1 (the omega = 0 frame) is
/// degenerate and reported as Error(DomainError).
SubleadingModel model_SN_subleading(long N, const BigReal& sigma, const BigReal& ghat);

// CSV columns N,S_N_C1,S_N_osc,envelope for N = n_first ... n_last.
void write_model_curves_csv(std::ostream& out, long n_first, long n_last, const BigReal& g,
                            const ConvergenceModelParams& params, const BigReal& phase,
                            const std::vector<std::string>& comments = {});

}  // namespace vptlab
