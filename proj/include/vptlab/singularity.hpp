#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vptlab/precision.hpp"
#include "vptlab/variational.hpp"

namespace vptlab {

enum class Parity { Even, Odd };
enum class ReferenceProvenance { Oracle, Extrapolated };
enum class FitMethod { OscillationFit, RatioFit };

std::string_view to_string(Parity p) noexcept;
std::string_view to_string(ReferenceProvenance p) noexcept;
std::string_view to_string(FitMethod m) noexcept;

struct DeltaEntry {
  long N = 0;
  BigReal delta;
  Parity parity = Parity::Even;
};

/// Delta_N = |alpha_0(N) - reference| for increasing N.
struct DeltaSequence {
  std::vector<DeltaEntry> entries;
  BigReal reference_alpha0;
  unsigned reference_digits = 0;
  ReferenceProvenance provenance = ReferenceProvenance::Oracle;

  // Entries with n_first <= N <= n_last.
  DeltaSequence restricted(long n_first, long n_last) const;
};

/// Errors: Validation (empty, N not strictly increasing), InsufficientPrecision
/// (reference_digits cannot resolve the smallest nonzero delta).
DeltaSequence build_delta_sequence(const std::vector<ApproximantRecord>& records,
                                   const BigReal& reference, unsigned reference_digits,
                                   ReferenceProvenance provenance = ReferenceProvenance::Oracle);

// Digits of the reference needed to resolve every nonzero delta.
unsigned required_reference_digits(const std::vector<ApproximantRecord>& records,
                                   const BigReal& reference);

// CSV: N,delta,parity, with the reference in the comment header.
void write_delta_csv(std::ostream& out, const DeltaSequence& seq,
                     const std::vector<std::string>& comments = {});
DeltaSequence read_delta_csv(std::istream& in, unsigned digits);

/// Fitted location of the leading conjugate singularity pair. Fits run in
/// double precision. theta <= 0 by convention and g_s_arg = (3/2)|theta|.
struct SingularityEstimate {
  std::optional<double> x_s_abs;
  double theta = 0;
  std::optional<double> delta_phase;  // delta (ratio fit) or phi (oscillation fit)
  double g_s_abs = 0;
  double g_s_arg = 0;
  std::optional<double> a;
  double fit_rms = 0;
  FitMethod method = FitMethod::OscillationFit;
  // Oscillation fit only: log amplitude, or per-parity log amplitudes.
  std::optional<double> log_amplitude;
  std::optional<double> log_amplitude_even;
  std::optional<double> log_amplitude_odd;
  std::size_t points = 0;
  std::size_t starts = 0;

  // a cos(theta) when a is present.
  std::optional<double> envelope_constant() const;
};

struct OscillationFitOptions {
  double zero_distance = 0.15;  // phase distance below which points are down-weighted
  bool separate_parity = false;
  double growth_constant = 0.186047272987975;
  std::size_t min_entries = 20;
  long min_span = 40;  // the sequence must reach N >= min_span
};

/// Least squares for
///   log Delta_N = log A - a cos(theta) N^(1/3) + log|cos(a sin(theta) N^(1/3) + phi)|
/// by iteratively reweighted Levenberg-Marquardt from a 3x3x4 grid of
/// (a, theta, phi). g_s_abs = a^(-3/2) / growth_constant.
/// Errors: Validation, FitDiverged, DegenerateFit.
SingularityEstimate fit_oscillation(const DeltaSequence& seq, const OscillationFitOptions& options = {});

/// R_n = alpha_{n+1} / alpha_n. Error: IndexedError(DivisionByZero, n).
std::vector<BigReal> ratio_sequence(const std::vector<BigReal>& alphas);

/// -cos((n+1) theta + delta) / (x_s_abs cos(n theta + delta)).
/// Error: IndexedError(PoleAtIndex, n) when |cos(n theta + delta)| <= tolerance
/// (default 10^-(p-5) at the working precision p).
BigReal ratio_model(long n, const BigReal& x_s_abs, const BigReal& theta, const BigReal& delta,
                    std::optional<BigReal> tolerance = {});
double ratio_model(long n, double x_s_abs, double theta, double delta);

/// Least squares over (x_s_abs, theta, delta) on R_n, n >= n_min, from a 3x3x4
/// grid. Errors: Validation (< 8 usable ratios), FitDiverged, DegenerateFit.
SingularityEstimate fit_ratio_singularity(const std::vector<BigReal>& ratios, long n_min = 6);

struct CrossValidationReport {
  double rel_diff_g_s_abs = 0;
  double rel_diff_theta = 0;
  double tolerance = 0.10;
  bool pass = false;
};

CrossValidationReport cross_validate(const SingularityEstimate& est_a,
                                     const SingularityEstimate& est_b, double tolerance = 0.10);

std::string to_json(const SingularityEstimate& est, const std::optional<DeltaSequence>& source = {});
std::string to_json(const CrossValidationReport& report);

// CSV: n,R_n,R_n_model.
void write_ratios_csv(std::ostream& out, const std::vector<BigReal>& ratios,
                      const SingularityEstimate& est,
                      const std::vector<std::string>& comments = {});

// Shortest round-trip decimal of a double.
std::string format_double(double x);

}  // namespace vptlab
