#pragma once

#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "vptlab/precision.hpp"
#include "vptlab/rs_series.hpp"

namespace vptlab {

// Growth constant of the optimal sigma_N and its finite-N correction.
inline constexpr std::string_view kDefaultGrowthConstant = "0.186047272987975";
inline constexpr std::string_view kDefaultCorrectionConstant = "6.85";

enum class OmegaStrategy { Formula, Stationary };

std::string_view to_string(OmegaStrategy s) noexcept;
OmegaStrategy parse_omega_strategy(std::string_view text);

/// Inputs of one variational evaluation of the potential
/// omega^2 x^2 / 2 + g x^4 / 4 at truncation order N.
struct VariationalConfig {
  BigReal g;
  BigReal omega;
  unsigned N = 1;
  BigReal c_constant;
  BigReal correction_constant;
  OmegaStrategy omega_strategy = OmegaStrategy::Formula;

  // Defaults for the strong-coupling pipeline: g = 4, omega = 0, so that
  // W_N equals alpha_0 directly.
  static VariationalConfig make(const BigReal& g, const BigReal& omega, unsigned N,
                                unsigned digits = 60);

  // Throws Error(Validation) when an invariant is violated.
  void validate() const;
};

/// eps_l(sigma) for l = 0 ... N.
struct ReexpansionTable {
  BigReal sigma;
  std::vector<BigReal> epsilons;
};

/// One row of the convergence study.
struct ApproximantRecord {
  unsigned N = 0;
  BigReal sigma_N;
  BigReal ghat_N;  // reduced coupling g / Omega^3 at the evaluation point
  std::vector<BigReal> alphas;
  std::optional<BigReal> delta_N;  // |alpha_0 - reference|
};

/// eps_l(sigma) = sum_{j<=l} E_j C((1-3j)/2, l-j) (-4 sigma)^(l-j), each entry
/// verified by precision escalation. target_digits = 0 uses sigma's precision.
ReexpansionTable reexpansion_coefficients(const RationalSeries& series, const BigReal& sigma,
                                          unsigned N, const PrecisionPolicy& policy = {},
                                          unsigned target_digits = 0);

// Same sum over exact rationals.
std::vector<BigRational> reexpansion_coefficients_exact(const RationalSeries& series,
                                                        const BigRational& sigma, unsigned N);

/// W_N = Omega sum_{l<=N} eps_l(sigma) (ghat/4)^l with ghat = g/Omega^3 and
/// sigma = Omega (Omega^2 - omega^2) / g. Result at the precision of config.g.
BigReal truncated_energy(const VariationalConfig& config, const BigReal& Omega,
                         const RationalSeries& series, const PrecisionPolicy& policy = {});

/// W_N and its first two Omega-derivatives, from the rearrangement
///   W_N = sum_j E_j (g/4)^j Omega^(1-3j) sum_{m<=N-j} C((1-3j)/2, m) (-t)^m,
///   t = sigma ghat = 1 - omega^2/Omega^2,
/// differentiated term by term. Evaluated at the current working precision.
struct EnergyDerivatives {
  BigReal value;
  BigReal first;
  BigReal second;
};
EnergyDerivatives truncated_energy_derivatives(const VariationalConfig& config,
                                               const BigReal& Omega,
                                               const RationalSeries& series);

/// sigma_N = c N (1 + correction / N^(2/3)).
BigReal sigma_of_order(unsigned N, const VariationalConfig& config);
BigReal sigma_of_order(unsigned N, const BigReal& c, const BigReal& correction);

/// (1/n!) d^n w_N / d(omega-hat^2)^n at omega-hat = 0, n = 0 ... n_max:
///   sum_j E_j (ghat/4)^j sum_{m=n}^{N-j} (-1)^(m+n) C((1-3j)/2, m) C(m, n).
/// target_digits = 0 uses ghat's precision.
std::vector<BigReal> strong_derivative_sums(const BigReal& ghat, unsigned N, unsigned n_max,
                                            const RationalSeries& series,
                                            const PrecisionPolicy& policy = {},
                                            unsigned target_digits = 0);

/// Strong-coupling coefficients alpha_n = sums[n] (ghat/4)^((2n-1)/3) at the
/// order-N evaluation point: ghat_N = 1/sigma_N (Formula), or the stationary
/// point of W_N in Omega at omega = 0 (Stationary).
ApproximantRecord alpha_approximants(unsigned N, unsigned n_max, const VariationalConfig& config,
                                     const RationalSeries& series,
                                     const PrecisionPolicy& policy = {},
                                     unsigned target_digits = 40,
                                     const std::optional<BigReal>& reference_alpha0 = {});

struct OmegaOptimum {
  BigReal omega;
  BigReal prediction;           // root of Omega (Omega^2 - omega^2) = g sigma_N
  bool stationary = true;       // false: turning point (zero of the second derivative)
  std::vector<BigReal> candidates;  // every zero found in the search window
};

/// Omega_N: the zero of dW_N/dOmega nearest to the prediction; failing that,
/// the nearest zero of d^2W_N/dOmega^2. Search window [0.2, 5] x prediction.
/// Throws Error(NoExtremum) when neither exists.
OmegaOptimum optimize_omega(const VariationalConfig& config, const RationalSeries& series,
                            const PrecisionPolicy& policy = {});

// CSV: N,sigma_N,ghat_N,alpha_0..alpha_{n_max},delta_N (empty when absent).
void write_approximants_csv(std::ostream& out, const std::vector<ApproximantRecord>& records,
                            const std::vector<std::string>& comments = {});
std::vector<ApproximantRecord> read_approximants_csv(std::istream& in, unsigned digits);

}  // namespace vptlab
