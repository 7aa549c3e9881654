#include "vptlab/rs_series.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "vptlab/csv.hpp"
#include "vptlab/error.hpp"

namespace vptlab {

RationalSeries rs_coefficients(unsigned L, unsigned max_order) {
  if (L > max_order) {
    throw Error(ErrorKind::ResourceLimit, "requested order " + std::to_string(L) +
                                              " exceeds the configured maximum " +
                                              std::to_string(max_order));
  }
  // Work with the integers t[k][i] = 8^k i! b_{k,i}, where b_{k,i} is the
  // coefficient of x^(2i) in B_k. The order-k equation becomes
  //   2i t[k][i] = (2i+1) t[k][i+1] - 8 i (i-1) t[k-1][i-2]
  //                - sum_{m=1}^{k-1} t[m][1] t[k-m][i],
  // and E_k = -t[k][1] / 8^k.
  std::vector<std::vector<BigInt>> t;
  t.reserve(L + 1);
  t.push_back({BigInt(1)});

  RationalSeries series;
  series.coefficients.reserve(L + 1);
  series.coefficients.emplace_back(1, 2);

  BigInt acc;
  BigInt eight_pow = 1;
  for (unsigned k = 1; k <= L; ++k) {
    eight_pow *= 8;
    const unsigned top = 2 * k;
    std::vector<BigInt> row(top + 2);
    for (unsigned i = top; i >= 1; --i) {
      mpz_mul_ui(acc.backend().data(), row[i + 1].backend().data(), 2 * i + 1);
      if (i >= 2 && i - 2 < t[k - 1].size()) {
        mpz_submul_ui(acc.backend().data(), t[k - 1][i - 2].backend().data(),
                      8ul * i * (i - 1));
      }
      for (unsigned m = 1; m < k; ++m) {
        const auto& lower = t[k - m];
        if (i < lower.size()) {
          mpz_submul(acc.backend().data(), t[m][1].backend().data(), lower[i].backend().data());
        }
      }
      if (!mpz_divisible_ui_p(acc.backend().data(), 2 * i)) {
        throw std::logic_error("non-integral intermediate in the perturbation recursion");
      }
      mpz_divexact_ui(row[i].backend().data(), acc.backend().data(), 2 * i);
    }
    row.pop_back();
    series.coefficients.emplace_back(-row[1], eight_pow);
    t.push_back(std::move(row));
  }
  return series;
}

BigReal series_partial_sum(const RationalSeries& series, const BigReal& g, const BigReal& omega,
                           unsigned L) {
  if (L >= series.size()) {
    throw Error(ErrorKind::Validation, "partial sum order " + std::to_string(L) +
                                           " exceeds stored series length");
  }
  if (omega <= 0) throw Error(ErrorKind::DomainError, "series_partial_sum needs omega > 0");
  const unsigned digits = std::max(precision_digits(g), precision_digits(omega));
  PrecisionScope scope(digits);
  const BigReal x = g / (4 * omega * omega * omega);
  // Horner in x.
  BigReal sum = to_real(series[L], digits);
  for (unsigned l = L; l-- > 0;) sum = sum * x + to_real(series[l], digits);
  return omega * sum;
}

void write_coefficients_csv(std::ostream& out, const RationalSeries& series) {
  csv::write_row(out, {"l", "numerator", "denominator"});
  for (std::size_t l = 0; l < series.size(); ++l) {
    const auto& q = series[l];
    csv::write_row(out, {std::to_string(l), numerator(q).str(), denominator(q).str()});
  }
}

RationalSeries read_coefficients_csv(std::istream& in) {
  const auto table = csv::read(in);
  const auto cl = table.column("l");
  const auto cn = table.column("numerator");
  const auto cd = table.column("denominator");
  RationalSeries series;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (std::stoul(row[cl]) != r) {
      throw Error(ErrorKind::Validation, "coefficient rows must be consecutive from l = 0");
    }
    series.coefficients.emplace_back(BigInt(row[cn]), BigInt(row[cd]));
  }
  return series;
}

}  // namespace vptlab
