#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "vptlab/precision.hpp"

namespace vptlab {

inline constexpr unsigned kDefaultMaxOrder = 200;

/// Exact Rayleigh-Schroedinger coefficients of the anharmonic-oscillator
/// ground-state energy,
///   E(g) = omega * sum_l E_l ((g/4) / omega^3)^l,
/// for the potential omega^2 x^2 / 2 + g x^4 / 4.
struct RationalSeries {
  static constexpr std::string_view convention_note =
      "E(g) = omega * sum_l E_l (g/(4 omega^3))^l";

  std::vector<BigRational> coefficients;

  std::size_t size() const noexcept { return coefficients.size(); }
  const BigRational& operator[](std::size_t l) const { return coefficients[l]; }
  // Highest stored order.
  unsigned max_order() const noexcept {
    return coefficients.empty() ? 0 : static_cast<unsigned>(coefficients.size() - 1);
  }
};

/// E_0 ... E_L, exact. Throws Error(ResourceLimit) when L > max_order.
///
/// The ground state is written psi = exp(-x^2/2) * sum_k lambda^k B_k(x) with
/// lambda = g/4 and B_k an even polynomial (B_0 = 1, B_k(0) = 0 for k >= 1).
/// Order by order, x B_k' - B_k''/2 = -x^4 B_{k-1} + sum_{m=1}^{k} E_m B_{k-m},
/// solved from the top power downwards; E_k is minus the x^2 coefficient of B_k.
RationalSeries rs_coefficients(unsigned L, unsigned max_order = kDefaultMaxOrder);

/// omega * sum_{l<=L} E_l ((g/4)/omega^3)^l at the precision of the arguments.
BigReal series_partial_sum(const RationalSeries& series, const BigReal& g, const BigReal& omega,
                           unsigned L);

// CSV with header "l,numerator,denominator"; exact decimal integers.
void write_coefficients_csv(std::ostream& out, const RationalSeries& series);
RationalSeries read_coefficients_csv(std::istream& in);

}  // namespace vptlab
