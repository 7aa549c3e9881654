#include "vptlab/precision.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "vptlab/error.hpp"

namespace vptlab {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Validation: return "Validation";
    case ErrorKind::ResourceLimit: return "ResourceLimit";
    case ErrorKind::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NoExtremum: return "NoExtremum";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NonConvergent: return "NonConvergent";
    case ErrorKind::InsufficientPrecision: return "InsufficientPrecision";
    case ErrorKind::FitDiverged: return "FitDiverged";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::PoleAtIndex: return "PoleAtIndex";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

bool is_numerical(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Validation:
    case ErrorKind::ResourceLimit:
    case ErrorKind::Io:
      return false;
    default:
      return true;
  }
}

PrecisionScope::PrecisionScope(unsigned digits)
    : digits_(digits), saved_(BigReal::default_precision()) {
  BigReal::default_precision(digits);
}

PrecisionScope::~PrecisionScope() { BigReal::default_precision(saved_); }

unsigned precision_digits(const BigReal& x) { return x.precision(); }

BigReal to_real(const BigRational& q, unsigned digits) {
  PrecisionScope scope(digits);
  BigReal r;
  mpfr_set_q(r.backend().data(), q.backend().data(), MPFR_RNDN);
  return r;
}

BigReal to_real(std::string_view decimal, unsigned digits) {
  PrecisionScope scope(digits);
  return BigReal(std::string(decimal));
}

BigReal to_real(long value, unsigned digits) {
  PrecisionScope scope(digits);
  return BigReal(value);
}

BigReal round_to(const BigReal& x, unsigned digits) {
  PrecisionScope scope(digits);
  BigReal r;
  mpfr_set(r.backend().data(), x.backend().data(), MPFR_RNDN);
  return r;
}

std::string to_decimal(const BigReal& x, unsigned significant) {
  if (significant == 0) significant = x.precision();
  if (x == 0) return "0";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(static_cast<int>(significant) - 1) << std::scientific << x;
  return os.str();
}

std::string to_string(const BigRational& q) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << numerator(q);
  if (denominator(q) != 1) os << '/' << denominator(q);
  return os.str();
}

bool agree(const BigReal& a, const BigReal& b, unsigned digits) {
  if (a == b) return true;
  const unsigned work = std::max(a.precision(), b.precision()) + 10;
  PrecisionScope scope(work);
  BigReal diff = abs(BigReal(a) - BigReal(b));
  BigReal scale = abs(BigReal(a));
  if (BigReal ab = abs(BigReal(b)); ab > scale) scale = ab;
  BigReal tol = pow(BigReal(10), -static_cast<long>(digits));
  return diff <= tol * scale;
}

bool agree_at_precision(const BigReal& a, const BigReal& b) {
  const unsigned p = std::min(a.precision(), b.precision());
  return agree(a, b, p > 5 ? p - 5 : 1);
}

double agreeing_digits(const BigReal& a, const BigReal& b) {
  const double cap = static_cast<double>(std::min(a.precision(), b.precision()));
  if (a == b) return cap;
  const unsigned work = std::max(a.precision(), b.precision()) + 10;
  PrecisionScope scope(work);
  BigReal diff = abs(BigReal(a) - BigReal(b));
  BigReal scale = abs(BigReal(b));
  if (scale == 0) return 0.0;
  BigReal d = -log10(diff / scale);
  return std::min(cap, d.convert_to<double>());
}

namespace {

unsigned ceil_rational(const BigRational& q) {
  BigInt n = numerator(q);
  BigInt d = denominator(q);
  BigInt c = n / d;
  if (c * d < n) c += 1;
  return c.convert_to<unsigned>();
}

}  // namespace

unsigned PrecisionPolicy::working_digits(long order) const {
  if (order < 0) order = 0;
  return base_digits + ceil_rational(per_order_digits * BigRational(order));
}

unsigned PrecisionPolicy::escalated_digits(long order, unsigned level) const {
  BigRational digits(working_digits(order));
  for (unsigned i = 0; i < level; ++i) digits *= escalation_factor;
  return ceil_rational(digits);
}

std::string PrecisionPolicy::describe() const {
  std::ostringstream os;
  os << "base_digits=" << base_digits << ";per_order_digits=" << to_string(per_order_digits)
     << ";escalation_factor=" << to_string(escalation_factor);
  return os.str();
}

BigInt integer_binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

BigRational half_binomial(unsigned j, unsigned m) {
  const auto& table = shared_half_binomials();
  if (table.contains(j, m)) return table(j, m);
  const BigRational a(1 - 3 * static_cast<long>(j), 2);
  BigRational r = 1;
  for (unsigned i = 0; i < m; ++i) r = r * (a - BigRational(i)) / BigRational(i + 1);
  return r;
}

HalfBinomialTable::HalfBinomialTable(unsigned max_index) : max_index_(max_index) {
  rows_.resize(max_index + 1);
  for (unsigned j = 0; j <= max_index; ++j) {
    const BigRational a(1 - 3 * static_cast<long>(j), 2);
    auto& row = rows_[j];
    row.reserve(max_index - j + 1);
    row.emplace_back(1);
    for (unsigned m = 1; m + j <= max_index; ++m) {
      row.push_back(row.back() * (a - BigRational(m - 1)) / BigRational(m));
    }
  }
}

const BigRational& HalfBinomialTable::operator()(unsigned j, unsigned m) const {
  if (!contains(j, m)) {
    throw Error(ErrorKind::ResourceLimit, "half-binomial table lookup (" + std::to_string(j) +
                                              ", " + std::to_string(m) + ") out of range");
  }
  return rows_[j][m];
}

const HalfBinomialTable& shared_half_binomials() {
  static const HalfBinomialTable table(200);
  return table;
}

namespace {

template <class Result, class Compare>
Result escalate(const std::function<Result(unsigned)>& computation, const PrecisionPolicy& policy,
                long order, unsigned target_digits, Compare&& same) {
  const unsigned floor_digits = target_digits + 5;
  auto digits_at = [&](unsigned level) {
    return std::max(policy.escalated_digits(order, level), floor_digits + 5 * level);
  };
  unsigned digits = digits_at(0);
  Result previous = [&] {
    PrecisionScope scope(digits);
    return computation(digits);
  }();
  for (unsigned level = 1; level <= policy.max_escalations; ++level) {
    digits = digits_at(level);
    Result current = [&] {
      PrecisionScope scope(digits);
      return computation(digits);
    }();
    if (same(previous, current)) return current;
    previous = std::move(current);
  }
  throw IndexedError(ErrorKind::PrecisionExhausted, order,
                     "no agreement to " + std::to_string(target_digits) +
                         " digits after escalating to " + std::to_string(digits) +
                         " digits (order " + std::to_string(order) + ")");
}

}  // namespace

BigReal verified_eval(const RealComputation& computation, const PrecisionPolicy& policy,
                      long order, unsigned target_digits) {
  BigReal r = escalate<BigReal>(computation, policy, order, target_digits,
                                [&](const BigReal& a, const BigReal& b) {
                                  return agree(a, b, target_digits);
                                });
  return round_to(r, target_digits);
}

std::vector<BigReal> verified_eval(const VectorComputation& computation,
                                   const PrecisionPolicy& policy, long order,
                                   unsigned target_digits) {
  auto r = escalate<std::vector<BigReal>>(
      computation, policy, order, target_digits,
      [&](const std::vector<BigReal>& a, const std::vector<BigReal>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
          if (!agree(a[i], b[i], target_digits)) return false;
        }
        return true;
      });
  for (auto& x : r) x = round_to(x, target_digits);
  return r;
}

}  // namespace vptlab
