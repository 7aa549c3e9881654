#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vptlab/precision.hpp"

namespace vptlab {

struct OracleOptions {
  unsigned max_digits = 60;
  unsigned max_basis = 4096;
  unsigned initial_basis = 16;
  unsigned guard_digits = 20;
  // Overrides the default basis frequency max(omega, g^(1/3)).
  std::optional<BigReal> scale_frequency;
};

struct OracleStep {
  unsigned basis_size;
  BigReal energy;
};

/// Lowest eigenvalue of p^2/2 + omega^2 x^2/2 + g x^4/4 in the even harmonic
/// basis. `energy` is the value at the largest basis tried; `history` holds
/// every basis doubling and is non-increasing.
struct OracleEnergy {
  BigReal energy;
  unsigned certified_digits = 0;
  unsigned basis_size_used = 0;
  BigReal scale_frequency;
  std::vector<OracleStep> history;
};

/// Lowest eigenvalue of the truncated Hamiltonian with `basis_size` even
/// states, computed at `digits` working precision.
BigReal truncated_ground_energy(const BigReal& g, const BigReal& omega, const BigReal& frequency,
                                unsigned basis_size, unsigned digits);

/// Doubles the basis until two successive energies agree to target_digits.
/// Errors: Validation (g < 0, omega < 0, both zero, target above max_digits),
/// NonConvergent (no agreement by max_basis).
OracleEnergy ground_energy(const BigReal& g, const BigReal& omega, unsigned target_digits,
                           const OracleOptions& options = {});

// ground_energy(4, 0, target_digits): alpha_0 under E = (g/4)^(1/3) alpha_0.
OracleEnergy alpha0_reference(unsigned target_digits, const OracleOptions& options = {});

/// (g/4)^(1/3) sum_{n<terms} alpha_n (g/4 omega^3)^(-2n/3).
BigReal strong_coupling_partial_sum(const std::vector<BigReal>& alphas, const BigReal& g,
                                    const BigReal& omega, unsigned terms);

struct OracleRow {
  BigReal g;
  BigReal omega;
  OracleEnergy oracle;
  std::vector<std::optional<BigReal>> sums;  // one per requested column
};

// Columns g,omega,energy,certified_digits followed by `sum_labels`.
void write_oracle_csv(std::ostream& out, const std::vector<OracleRow>& rows,
                      const std::vector<std::string>& sum_labels,
                      const std::vector<std::string>& comments = {});

}  // namespace vptlab
