#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace vptlab {

using BigInt = boost::multiprecision::mpz_int;
using BigRational = boost::multiprecision::mpq_rational;

// Arbitrary-precision real. Each value carries its own precision
// (BigReal::precision() reports it in decimal digits); new values are created
// at the thread-local default precision, see PrecisionScope.
using BigReal = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                              boost::multiprecision::et_off>;

/// RAII guard setting the working precision (decimal digits) of every BigReal
/// created on this thread while it is alive.
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned digits);
  ~PrecisionScope();
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

  unsigned digits() const noexcept { return digits_; }

 private:
  unsigned digits_;
  unsigned saved_;
};

unsigned precision_digits(const BigReal& x);

// Conversions. Results carry exactly `digits` decimal digits of precision and
// are correctly rounded.
BigReal to_real(const BigRational& q, unsigned digits);
BigReal to_real(std::string_view decimal, unsigned digits);
BigReal to_real(long value, unsigned digits);
BigReal round_to(const BigReal& x, unsigned digits);

// Locale-independent decimal rendering with `significant` digits
// (0 = the value's own precision).
std::string to_decimal(const BigReal& x, unsigned significant = 0);
std::string to_string(const BigRational& q);

// |a - b| <= 10^-digits * max(|a|, |b|); exact zeros agree with each other.
bool agree(const BigReal& a, const BigReal& b, unsigned digits);

// Agreement at the value's own precision, leaving 5 guard digits for rounding.
bool agree_at_precision(const BigReal& a, const BigReal& b);

// -log10(|a - b| / |b|), capped at the smaller precision of the two.
double agreeing_digits(const BigReal& a, const BigReal& b);

/// How much working precision a computation of expansion order N gets.
struct PrecisionPolicy {
  unsigned base_digits = 40;
  BigRational per_order_digits{2};
  BigRational escalation_factor{3, 2};
  unsigned max_escalations = 4;

  // base_digits + ceil(per_order_digits * order)
  unsigned working_digits(long order) const;
  // working_digits(order) scaled by escalation_factor^level (rounded up).
  unsigned escalated_digits(long order, unsigned level) const;
  std::string describe() const;
};

/// Generalized binomial C((1 - 3j)/2, m), exact.
BigRational half_binomial(unsigned j, unsigned m);

/// Eagerly built table of C((1 - 3j)/2, m) for j + m <= max_index, filled
/// row by row with C(a, m) = C(a, m - 1) (a - m + 1) / m. Immutable after
/// construction.
class HalfBinomialTable {
 public:
  explicit HalfBinomialTable(unsigned max_index);

  unsigned max_index() const noexcept { return max_index_; }
  bool contains(unsigned j, unsigned m) const noexcept { return j + m <= max_index_; }
  const BigRational& operator()(unsigned j, unsigned m) const;

 private:
  unsigned max_index_;
  std::vector<std::vector<BigRational>> rows_;
};

// Process-wide table covering j + m <= 200, built on first use.
const HalfBinomialTable& shared_half_binomials();

// Ordinary binomial C(n, k) for nonnegative integers.
BigInt integer_binomial(unsigned n, unsigned k);

using RealComputation = std::function<BigReal(unsigned digits)>;
using VectorComputation = std::function<std::vector<BigReal>(unsigned digits)>;

/// Runs `computation` at the policy's working precision for `order` and again
/// at escalated precision; returns the escalated result rounded to
/// `target_digits` once two successive runs agree to `target_digits`.
/// Throws Error(PrecisionExhausted) after policy.max_escalations attempts.
BigReal verified_eval(const RealComputation& computation, const PrecisionPolicy& policy,
                      long order, unsigned target_digits);

// Element-wise variant; every entry must agree.
std::vector<BigReal> verified_eval(const VectorComputation& computation,
                                   const PrecisionPolicy& policy, long order,
                                   unsigned target_digits);

}  // namespace vptlab
