#include "vptlab/oracle.hpp"

#include <cmath>
#include <ostream>

#include "vptlab/csv.hpp"
#include "vptlab/error.hpp"

namespace vptlab {

namespace {

// Symmetric pentadiagonal matrix: d[i] = A(i,i), e[i] = A(i,i+1), f[i] = A(i,i+2).
template <class T>
struct Band {
  std::vector<T> d, e, f;
  std::size_t size() const { return d.size(); }
};

// Matrix elements in the states |2m>, m < M.
template <class T>
Band<T> hamiltonian(const T& g, const T& omega, const T& frequency, unsigned M) {
  Band<T> h;
  h.d.resize(M);
  h.e.resize(M > 0 ? M - 1 : 0);
  h.f.resize(M > 1 ? M - 2 : 0);
  const T w2 = omega * omega;
  const T kinetic = frequency / 4;
  const T harmonic = w2 / (4 * frequency);
  const T quartic = g / (16 * frequency * frequency);
  for (unsigned m = 0; m < M; ++m) {
    const unsigned long n = 2ul * m;
    h.d[m] = (kinetic + harmonic) * T(2 * n + 1) + quartic * T(6 * n * n + 6 * n + 3);
    if (m + 1 < M) {
      const T s = sqrt(T((n + 1) * (n + 2)));
      h.e[m] = (harmonic - kinetic) * s + quartic * T(4 * n + 6) * s;
    }
    if (m + 2 < M) {
      // (n+1)(n+2)(n+3)(n+4) overflows 64 bits only far beyond max_basis.
      h.f[m] = quartic * sqrt(T((n + 1) * (n + 2)) * T((n + 3) * (n + 4)));
    }
  }
  return h;
}

// A - mu = L D L^T without pivoting. Returns false on a zero pivot.
template <class T>
bool factor(const Band<T>& a, const T& mu, std::vector<T>& D, std::vector<T>& L1,
            std::vector<T>& L2) {
  const std::size_t M = a.size();
  D.assign(M, T(0));
  L1.assign(M, T(0));  // L1[i] = L(i+1, i)
  L2.assign(M, T(0));  // L2[i] = L(i+2, i)
  for (std::size_t i = 0; i < M; ++i) {
    T di = a.d[i] - mu;
    if (i >= 1) di -= L1[i - 1] * L1[i - 1] * D[i - 1];
    if (i >= 2) di -= L2[i - 2] * L2[i - 2] * D[i - 2];
    if (di == 0) return false;
    D[i] = di;
    if (i + 1 < M) {
      T num = a.e[i];
      if (i >= 1) num -= L2[i - 1] * L1[i - 1] * D[i - 1];
      L1[i] = num / di;
    }
    if (i + 2 < M) L2[i] = a.f[i] / di;
  }
  return true;
}

template <class T>
std::size_t negative_count(const std::vector<T>& D) {
  std::size_t n = 0;
  for (const auto& x : D) n += x < 0;
  return n;
}

template <class T>
void solve(const std::vector<T>& D, const std::vector<T>& L1, const std::vector<T>& L2,
           std::vector<T>& x) {
  const std::size_t M = D.size();
  for (std::size_t i = 1; i < M; ++i) {
    x[i] -= L1[i - 1] * x[i - 1];
    if (i >= 2) x[i] -= L2[i - 2] * x[i - 2];
  }
  for (std::size_t i = 0; i < M; ++i) x[i] /= D[i];
  for (std::size_t i = M; i-- > 0;) {
    if (i + 1 < M) x[i] -= L1[i] * x[i + 1];
    if (i + 2 < M) x[i] -= L2[i] * x[i + 2];
  }
}

template <class T>
T rayleigh(const Band<T>& a, const std::vector<T>& v) {
  const std::size_t M = a.size();
  T num = 0, den = 0;
  for (std::size_t i = 0; i < M; ++i) {
    T hv = a.d[i] * v[i];
    if (i + 1 < M) hv += a.e[i] * v[i + 1];
    if (i >= 1) hv += a.e[i - 1] * v[i - 1];
    if (i + 2 < M) hv += a.f[i] * v[i + 2];
    if (i >= 2) hv += a.f[i - 2] * v[i - 2];
    num += v[i] * hv;
    den += v[i] * v[i];
  }
  return num / den;
}

// Lowest eigenvalue in double by Sylvester inertia bisection.
double seed_eigenvalue(const Band<double>& a) {
  double lo = a.d[0], hi = a.d[0];
  for (std::size_t i = 0; i < a.size(); ++i) {
    double r = 0;
    if (i + 1 < a.size()) r += std::abs(a.e[i]);
    if (i >= 1) r += std::abs(a.e[i - 1]);
    if (i + 2 < a.size()) r += std::abs(a.f[i]);
    if (i >= 2) r += std::abs(a.f[i - 2]);
    lo = std::min(lo, a.d[i] - r);
    hi = std::min(hi, a.d[i]);
  }
  std::vector<double> D, L1, L2;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!factor(a, mid, D, L1, L2) || negative_count(D) > 0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

BigReal truncated_ground_energy(const BigReal& g, const BigReal& omega, const BigReal& frequency,
                                unsigned basis_size, unsigned digits) {
  if (basis_size == 0) throw Error(ErrorKind::Validation, "basis size must be positive");
  const double seed = seed_eigenvalue(hamiltonian<double>(
      g.convert_to<double>(), omega.convert_to<double>(), frequency.convert_to<double>(),
      basis_size));

  PrecisionScope scope(digits);
  const auto h = hamiltonian<BigReal>(round_to(g, digits), round_to(omega, digits),
                                      round_to(frequency, digits), basis_size);
  if (basis_size == 1) return h.d[0];

  // Shift below the lowest eigenvalue, certified by the inertia of A - mu.
  std::vector<BigReal> D, L1, L2;
  double margin = 1e-9 * std::max(1.0, std::abs(seed));
  BigReal mu;
  for (int attempt = 0;; ++attempt) {
    mu = BigReal(seed - margin);
    if (factor(h, mu, D, L1, L2) && negative_count(D) == 0) break;
    if (attempt == 12) {
      throw Error(ErrorKind::NonConvergent, "could not place a shift below the ground state");
    }
    margin *= 100;
  }

  std::vector<BigReal> v(basis_size, BigReal(0));
  v[0] = 1;
  BigReal lambda = rayleigh(h, v);
  const BigReal tol = pow(BigReal(10), -static_cast<long>(digits) + 5);
  for (int it = 0; it < 400; ++it) {
    solve(D, L1, L2, v);
    BigReal norm = 0;
    for (const auto& x : v) norm = std::max(norm, BigReal(abs(x)));
    for (auto& x : v) x /= norm;
    const BigReal next = rayleigh(h, v);
    if (abs(next - lambda) <= tol * abs(next)) return next;
    lambda = next;
  }
  throw Error(ErrorKind::NonConvergent, "inverse iteration did not converge");
}

OracleEnergy ground_energy(const BigReal& g, const BigReal& omega, unsigned target_digits,
                           const OracleOptions& options) {
  if (g < 0 || omega < 0) throw Error(ErrorKind::Validation, "oracle needs g >= 0 and omega >= 0");
  if (g == 0 && omega == 0) throw Error(ErrorKind::Validation, "oracle needs g > 0 or omega > 0");
  if (target_digits == 0 || target_digits > options.max_digits) {
    throw Error(ErrorKind::Validation, "oracle target digits must lie in [1, " +
                                           std::to_string(options.max_digits) + "]");
  }
  const unsigned digits = target_digits + options.guard_digits;
  PrecisionScope scope(digits);

  OracleEnergy out;
  if (options.scale_frequency) {
    if (!(*options.scale_frequency > 0)) {
      throw Error(ErrorKind::Validation, "basis frequency must be positive");
    }
    out.scale_frequency = round_to(*options.scale_frequency, digits);
  } else {
    const BigReal gr = round_to(g, digits);
    const BigReal wr = round_to(omega, digits);
    out.scale_frequency = std::max(wr, BigReal(cbrt(gr)));
  }

  for (unsigned M = std::max(1u, options.initial_basis); M <= options.max_basis; M *= 2) {
    const BigReal e = truncated_ground_energy(g, omega, out.scale_frequency, M, digits);
    out.history.push_back({M, e});
    out.energy = e;
    out.basis_size_used = M;
    if (out.history.size() >= 2) {
      const BigReal& prev = out.history[out.history.size() - 2].energy;
      if (agree(prev, e, target_digits)) {
        out.certified_digits = std::min(static_cast<unsigned>(std::floor(agreeing_digits(prev, e))),
                                        digits - 5);
        return out;
      }
    }
  }
  throw Error(ErrorKind::NonConvergent, "ground energy not converged to " +
                                            std::to_string(target_digits) + " digits by basis " +
                                            std::to_string(options.max_basis));
}

OracleEnergy alpha0_reference(unsigned target_digits, const OracleOptions& options) {
  return ground_energy(BigReal(4), BigReal(0), target_digits, options);
}

BigReal strong_coupling_partial_sum(const std::vector<BigReal>& alphas, const BigReal& g,
                                    const BigReal& omega, unsigned terms) {
  if (terms > alphas.size()) {
    throw Error(ErrorKind::Validation, "partial sum needs " + std::to_string(terms) +
                                           " coefficients, have " +
                                           std::to_string(alphas.size()));
  }
  if (!(g > 0) || !(omega > 0)) {
    throw Error(ErrorKind::DomainError, "strong-coupling sum needs g > 0 and omega > 0");
  }
  unsigned digits = std::max(precision_digits(g), precision_digits(omega));
  if (!alphas.empty()) digits = std::max(digits, precision_digits(alphas[0]));
  PrecisionScope scope(digits);
  const BigReal x = pow(g / (4 * omega * omega * omega), BigReal(-2) / 3);
  BigReal sum = 0;
  for (unsigned n = terms; n-- > 0;) sum = sum * x + alphas[n];
  return cbrt(g / 4) * sum;
}

void write_oracle_csv(std::ostream& out, const std::vector<OracleRow>& rows,
                      const std::vector<std::string>& sum_labels,
                      const std::vector<std::string>& comments) {
  csv::write_comments(out, comments);
  std::vector<std::string> header{"g", "omega", "energy", "certified_digits"};
  header.insert(header.end(), sum_labels.begin(), sum_labels.end());
  csv::write_row(out, header);
  for (const auto& r : rows) {
    const unsigned sig = std::max(r.oracle.certified_digits, 1u);
    std::vector<std::string> cells{to_decimal(r.g, 17), to_decimal(r.omega, 17),
                                   to_decimal(r.oracle.energy, sig),
                                   std::to_string(r.oracle.certified_digits)};
    for (const auto& s : r.sums) cells.push_back(s ? to_decimal(*s, 25) : std::string());
    csv::write_row(out, cells);
  }
}

}  // namespace vptlab
