#include "vptlab/variational.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "vptlab/csv.hpp"
#include "vptlab/error.hpp"

namespace vptlab {

std::string_view to_string(OmegaStrategy s) noexcept {
  return s == OmegaStrategy::Formula ? "formula" : "stationary";
}

OmegaStrategy parse_omega_strategy(std::string_view text) {
  if (text == "formula") return OmegaStrategy::Formula;
  if (text == "stationary") return OmegaStrategy::Stationary;
  throw Error(ErrorKind::Validation, "unknown omega strategy '" + std::string(text) + "'");
}

VariationalConfig VariationalConfig::make(const BigReal& g, const BigReal& omega, unsigned N,
                                          unsigned digits) {
  VariationalConfig c;
  c.g = round_to(g, digits);
  c.omega = round_to(omega, digits);
  c.N = N;
  c.c_constant = to_real(kDefaultGrowthConstant, digits);
  c.correction_constant = to_real(kDefaultCorrectionConstant, digits);
  return c;
}

void VariationalConfig::validate() const {
  if (!(g > 0)) throw Error(ErrorKind::Validation, "coupling g must be positive");
  if (omega < 0) throw Error(ErrorKind::Validation, "frequency omega must be nonnegative");
  if (N < 1) throw Error(ErrorKind::Validation, "truncation order N must be at least 1");
  if (!(c_constant > BigReal("0.18") && c_constant < BigReal("0.19"))) {
    throw Error(ErrorKind::Validation, "growth constant c must lie in (0.18, 0.19)");
  }
  if (correction_constant < 0) {
    throw Error(ErrorKind::Validation, "correction constant must be nonnegative");
  }
}

namespace {

void require_series(const RationalSeries& series, unsigned N) {
  if (series.size() < N + 1) {
    throw Error(ErrorKind::Validation, "series holds " + std::to_string(series.size()) +
                                           " coefficients, order " + std::to_string(N) +
                                           " needs " + std::to_string(N + 1));
  }
  if (!shared_half_binomials().contains(0, N)) {
    throw Error(ErrorKind::ResourceLimit,
                "order " + std::to_string(N) + " beyond the binomial table");
  }
}

std::vector<BigReal> real_coefficients(const RationalSeries& series, unsigned N,
                                       unsigned digits) {
  std::vector<BigReal> out;
  out.reserve(N + 1);
  for (unsigned j = 0; j <= N; ++j) out.push_back(to_real(series[j], digits));
  return out;
}

unsigned digits_or(unsigned target, const BigReal& fallback) {
  return target ? target : precision_digits(fallback);
}

// Integer binomials C(m, n) for m <= 200, n <= m, built once.
const std::vector<std::vector<BigInt>>& pascal_rows() {
  static const auto rows = [] {
    std::vector<std::vector<BigInt>> r(kDefaultMaxOrder + 1);
    for (unsigned m = 0; m <= kDefaultMaxOrder; ++m) {
      r[m].resize(m + 1);
      r[m][0] = r[m][m] = 1;
      for (unsigned n = 1; n < m; ++n) r[m][n] = r[m - 1][n - 1] + r[m - 1][n];
    }
    return r;
  }();
  return rows;
}

}  // namespace

ReexpansionTable reexpansion_coefficients(const RationalSeries& series, const BigReal& sigma,
                                          unsigned N, const PrecisionPolicy& policy,
                                          unsigned target_digits) {
  require_series(series, N);
  const unsigned target = digits_or(target_digits, sigma);
  const auto& binom = shared_half_binomials();
  auto eps = verified_eval(
      [&](unsigned digits) {
        const auto E = real_coefficients(series, N, digits);
        const BigReal s = round_to(sigma, digits);
        std::vector<BigReal> pw(N + 1);
        pw[0] = 1;
        for (unsigned m = 1; m <= N; ++m) pw[m] = pw[m - 1] * (-4 * s);
        std::vector<BigReal> out(N + 1);
        for (unsigned l = 0; l <= N; ++l) {
          BigReal sum = 0;
          for (unsigned j = 0; j <= l; ++j) {
            sum += E[j] * to_real(binom(j, l - j), digits) * pw[l - j];
          }
          out[l] = sum;
        }
        return out;
      },
      policy, N, target);
  return {round_to(sigma, target), std::move(eps)};
}

std::vector<BigRational> reexpansion_coefficients_exact(const RationalSeries& series,
                                                        const BigRational& sigma, unsigned N) {
  require_series(series, N);
  const auto& binom = shared_half_binomials();
  std::vector<BigRational> pw(N + 1);
  pw[0] = 1;
  for (unsigned m = 1; m <= N; ++m) pw[m] = pw[m - 1] * (BigRational(-4) * sigma);
  std::vector<BigRational> out(N + 1);
  for (unsigned l = 0; l <= N; ++l) {
    BigRational sum = 0;
    for (unsigned j = 0; j <= l; ++j) sum += series[j] * binom(j, l - j) * pw[l - j];
    out[l] = sum;
  }
  return out;
}

BigReal sigma_of_order(unsigned N, const BigReal& c, const BigReal& correction) {
  if (N < 1) throw Error(ErrorKind::Validation, "sigma_of_order needs N >= 1");
  PrecisionScope scope(std::max(precision_digits(c), precision_digits(correction)));
  const BigReal n(N);
  return c * n * (1 + correction / pow(n, BigReal(2) / 3));
}

BigReal sigma_of_order(unsigned N, const VariationalConfig& config) {
  return sigma_of_order(N, config.c_constant, config.correction_constant);
}

BigReal truncated_energy(const VariationalConfig& config, const BigReal& Omega,
                         const RationalSeries& series, const PrecisionPolicy& policy) {
  if (!(Omega > 0)) throw Error(ErrorKind::DomainError, "trial frequency Omega must be positive");
  if (!(config.g > 0)) throw Error(ErrorKind::DomainError, "coupling g must be positive");
  const unsigned N = config.N;
  require_series(series, N);
  const auto& binom = shared_half_binomials();
  return verified_eval(
      [&](unsigned digits) {
        const auto E = real_coefficients(series, N, digits);
        const BigReal g = round_to(config.g, digits);
        const BigReal w = round_to(config.omega, digits);
        const BigReal W = round_to(Omega, digits);
        const BigReal sigma = W * (W * W - w * w) / g;
        const BigReal quarter_ghat = g / (W * W * W) / 4;
        std::vector<BigReal> pw(N + 1);
        pw[0] = 1;
        for (unsigned m = 1; m <= N; ++m) pw[m] = pw[m - 1] * (-4 * sigma);
        BigReal total = 0;
        BigReal x = 1;
        for (unsigned l = 0; l <= N; ++l) {
          BigReal eps = 0;
          for (unsigned j = 0; j <= l; ++j) {
            eps += E[j] * to_real(binom(j, l - j), digits) * pw[l - j];
          }
          total += eps * x;
          x *= quarter_ghat;
        }
        return W * total;
      },
      policy, N, precision_digits(config.g));
}

EnergyDerivatives truncated_energy_derivatives(const VariationalConfig& config,
                                               const BigReal& Omega,
                                               const RationalSeries& series) {
  const unsigned N = config.N;
  require_series(series, N);
  const unsigned digits = BigReal::default_precision();
  const auto& binom = shared_half_binomials();
  const BigReal W = round_to(Omega, digits);
  const BigReal w2 = round_to(config.omega, digits) * round_to(config.omega, digits);
  const BigReal quarter_g = round_to(config.g, digits) / 4;

  const BigReal inv = 1 / W;
  const BigReal t = 1 - w2 * inv * inv;
  const BigReal dt = 2 * w2 * inv * inv * inv;
  const BigReal d2t = -6 * w2 * inv * inv * inv * inv;

  EnergyDerivatives out{BigReal(0), BigReal(0), BigReal(0)};
  BigReal coupling = 1;  // (g/4)^j
  BigReal power = W;     // Omega^(1-3j)
  const BigReal inv3 = inv * inv * inv;
  for (unsigned j = 0; j <= N; ++j) {
    // P(t) = sum_{m<=N-j} C(a_j, m) (-t)^m with first and second derivatives (Horner).
    BigReal p = 0, dp = 0, d2p = 0;
    for (unsigned m = N - j + 1; m-- > 0;) {
      BigReal coeff = to_real(binom(j, m), digits);
      if (m % 2) coeff = -coeff;
      d2p = d2p * t + 2 * dp;
      dp = dp * t + p;
      p = p * t + coeff;
    }
    const BigReal k(1 - 3 * static_cast<long>(j));
    const BigReal scale = to_real(series[j], digits) * coupling;
    const BigReal pk = power;
    const BigReal pk1 = k * power * inv;
    const BigReal pk2 = k * (k - 1) * power * inv * inv;
    out.value += scale * pk * p;
    out.first += scale * (pk1 * p + pk * dp * dt);
    out.second += scale * (pk2 * p + 2 * pk1 * dp * dt + pk * (d2p * dt * dt + dp * d2t));
    coupling *= quarter_g;
    power *= inv3;
  }
  return out;
}

std::vector<BigReal> strong_derivative_sums(const BigReal& ghat, unsigned N, unsigned n_max,
                                            const RationalSeries& series,
                                            const PrecisionPolicy& policy,
                                            unsigned target_digits) {
  if (!(ghat > 0)) throw Error(ErrorKind::DomainError, "reduced coupling must be positive");
  if (n_max > N) throw Error(ErrorKind::Validation, "n_max must not exceed N");
  require_series(series, N);
  const auto& binom = shared_half_binomials();
  const auto& pascal = pascal_rows();
  return verified_eval(
      [&](unsigned digits) {
        const auto E = real_coefficients(series, N, digits);
        const BigReal quarter = round_to(ghat, digits) / 4;
        std::vector<BigReal> sums(n_max + 1, BigReal(0));
        std::vector<BigReal> inner(n_max + 1);
        BigReal x = 1;  // (ghat/4)^j
        BigReal term;
        for (unsigned j = 0; j <= N; ++j) {
          for (auto& v : inner) v = 0;
          for (unsigned m = 0; m + j <= N; ++m) {
            BigReal c = to_real(binom(j, m), digits);
            for (unsigned n = 0; n <= std::min(m, n_max); ++n) {
              mpfr_mul_z(term.backend().data(), c.backend().data(),
                         pascal[m][n].backend().data(), MPFR_RNDN);
              if ((m + n) % 2) inner[n] -= term;
              else inner[n] += term;
            }
          }
          const BigReal weight = E[j] * x;
          for (unsigned n = 0; n <= n_max; ++n) sums[n] += weight * inner[n];
          x *= quarter;
        }
        return sums;
      },
      policy, N, digits_or(target_digits, ghat));
}

namespace {

// Omega with Omega (Omega^2 - omega^2) = g sigma, Omega > omega.
BigReal predicted_omega(const BigReal& g, const BigReal& omega, const BigReal& sigma) {
  const BigReal rhs = g * sigma;
  BigReal x = cbrt(rhs);
  if (x < omega) x = omega;
  x += omega;  // start right of the root: f is convex there
  for (int i = 0; i < 200; ++i) {
    const BigReal f = x * (x * x - omega * omega) - rhs;
    const BigReal df = 3 * x * x - omega * omega;
    const BigReal step = f / df;
    x -= step;
    if (abs(step) <= abs(x) * pow(BigReal(10), -static_cast<long>(x.precision()) + 3)) break;
  }
  return x;
}

}  // namespace

OmegaOptimum optimize_omega(const VariationalConfig& config, const RationalSeries& series,
                            const PrecisionPolicy& policy) {
  config.validate();
  require_series(series, config.N);
  const unsigned digits =
      std::max(policy.working_digits(config.N), precision_digits(config.g) + 10);
  PrecisionScope scope(digits);

  OmegaOptimum result;
  const BigReal sigma = sigma_of_order(config.N, config);
  result.prediction = predicted_omega(round_to(config.g, digits), round_to(config.omega, digits),
                                      round_to(sigma, digits));
  const BigReal lo = result.prediction / 5;
  const BigReal hi = result.prediction * 5;

  auto derivs = [&](const BigReal& x) { return truncated_energy_derivatives(config, x, series); };

  constexpr int kGrid = 240;
  std::vector<BigReal> grid(kGrid + 1);
  std::vector<EnergyDerivatives> values;
  values.reserve(kGrid + 1);
  const BigReal ratio = pow(hi / lo, BigReal(1) / kGrid);
  grid[0] = lo;
  for (int i = 1; i <= kGrid; ++i) grid[i] = grid[i - 1] * ratio;
  grid[kGrid] = hi;
  for (const auto& x : grid) values.push_back(derivs(x));

  const int bits = static_cast<int>((digits - 5) * 3.3219);
  auto tol = boost::math::tools::eps_tolerance<BigReal>(bits);

  auto find_zeros = [&](bool second) {
    std::vector<BigReal> zeros;
    for (int i = 0; i < kGrid; ++i) {
      const BigReal& fa = second ? values[i].second : values[i].first;
      const BigReal& fb = second ? values[i + 1].second : values[i + 1].first;
      if (fa == 0) {
        zeros.push_back(grid[i]);
        continue;
      }
      if ((fa < 0) == (fb < 0)) continue;
      auto f = [&](const BigReal& x) {
        const auto d = derivs(x);
        return second ? d.second : d.first;
      };
      std::uintmax_t iters = 500;
      auto bracket = boost::math::tools::toms748_solve(f, grid[i], grid[i + 1], fa, fb, tol, iters);
      zeros.push_back((bracket.first + bracket.second) / 2);
    }
    return zeros;
  };

  auto nearest = [&](const std::vector<BigReal>& zeros) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < zeros.size(); ++i) {
      if (abs(zeros[i] - result.prediction) < abs(zeros[best] - result.prediction)) best = i;
    }
    return zeros[best];
  };

  auto stationary = find_zeros(false);
  if (!stationary.empty()) {
    result.omega = nearest(stationary);
    // Newton polish on dW/dOmega.
    for (int i = 0; i < 4; ++i) {
      const auto d = derivs(result.omega);
      if (d.second == 0) break;
      result.omega -= d.first / d.second;
    }
    result.candidates = std::move(stationary);
    result.stationary = true;
    return result;
  }
  auto turning = find_zeros(true);
  if (turning.empty()) {
    throw Error(ErrorKind::NoExtremum,
                "no zero of the first or second Omega-derivative of W_" +
                    std::to_string(config.N) + " in [0.2, 5] x prediction");
  }
  result.omega = nearest(turning);
  result.candidates = std::move(turning);
  result.stationary = false;
  return result;
}

ApproximantRecord alpha_approximants(unsigned N, unsigned n_max, const VariationalConfig& config,
                                     const RationalSeries& series, const PrecisionPolicy& policy,
                                     unsigned target_digits,
                                     const std::optional<BigReal>& reference_alpha0) {
  if (N < 1) throw Error(ErrorKind::Validation, "alpha_approximants needs N >= 1");
  if (n_max > N) throw Error(ErrorKind::Validation, "n_max must not exceed N");
  require_series(series, N);

  const unsigned digits = std::max(target_digits + 10, precision_digits(config.c_constant));
  PrecisionScope scope(digits);

  ApproximantRecord rec;
  rec.N = N;
  if (config.omega_strategy == OmegaStrategy::Formula) {
    rec.sigma_N = sigma_of_order(N, config);
    rec.ghat_N = 1 / rec.sigma_N;
  } else {
    VariationalConfig frame = config;
    frame.N = N;
    frame.omega = 0;
    const auto opt = optimize_omega(frame, series, policy);
    PrecisionScope inner(digits);
    rec.ghat_N = round_to(frame.g, digits) / (opt.omega * opt.omega * opt.omega);
    rec.sigma_N = 1 / rec.ghat_N;
  }

  const auto sums =
      strong_derivative_sums(rec.ghat_N, N, n_max, series, policy, target_digits + 5);
  {
    PrecisionScope work(target_digits + 10);
    const BigReal quarter = round_to(rec.ghat_N, target_digits + 10) / 4;
    for (unsigned n = 0; n <= n_max; ++n) {
      const BigReal expo = BigReal(2 * static_cast<long>(n) - 1) / 3;
      rec.alphas.push_back(round_to(round_to(sums[n], target_digits + 10) * pow(quarter, expo),
                                    target_digits));
    }
    if (reference_alpha0) {
      rec.delta_N = round_to(abs(round_to(rec.alphas[0], target_digits + 10) -
                                 round_to(*reference_alpha0, target_digits + 10)),
                             target_digits);
    }
  }
  rec.sigma_N = round_to(rec.sigma_N, target_digits);
  rec.ghat_N = round_to(rec.ghat_N, target_digits);
  return rec;
}

void write_approximants_csv(std::ostream& out, const std::vector<ApproximantRecord>& records,
                            const std::vector<std::string>& comments) {
  csv::write_comments(out, comments);
  std::size_t n_alpha = 0;
  for (const auto& r : records) n_alpha = std::max(n_alpha, r.alphas.size());
  std::vector<std::string> header{"N", "sigma_N", "ghat_N"};
  for (std::size_t n = 0; n < n_alpha; ++n) header.push_back("alpha_" + std::to_string(n));
  header.push_back("delta_N");
  csv::write_row(out, header);
  for (const auto& r : records) {
    std::vector<std::string> row{std::to_string(r.N), to_decimal(r.sigma_N),
                                 to_decimal(r.ghat_N)};
    for (std::size_t n = 0; n < n_alpha; ++n) {
      row.push_back(n < r.alphas.size() ? to_decimal(r.alphas[n]) : "");
    }
    row.push_back(r.delta_N ? to_decimal(*r.delta_N) : "");
    csv::write_row(out, row);
  }
}

std::vector<ApproximantRecord> read_approximants_csv(std::istream& in, unsigned digits) {
  const auto table = csv::read(in);
  const auto cN = table.column("N");
  const auto cs = table.column("sigma_N");
  const auto cg = table.column("ghat_N");
  const auto cd = table.column("delta_N");
  std::vector<std::size_t> alpha_cols;
  for (std::size_t n = 0;; ++n) {
    const auto name = "alpha_" + std::to_string(n);
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) break;
    alpha_cols.push_back(static_cast<std::size_t>(it - table.header.begin()));
  }
  std::vector<ApproximantRecord> out;
  for (const auto& row : table.rows) {
    ApproximantRecord r;
    r.N = static_cast<unsigned>(std::stoul(row[cN]));
    r.sigma_N = to_real(row[cs], digits);
    r.ghat_N = to_real(row[cg], digits);
    for (auto c : alpha_cols) {
      if (row[c].empty()) break;
      r.alphas.push_back(to_real(row[c], digits));
    }
    if (!row[cd].empty()) r.delta_N = to_real(row[cd], digits);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace vptlab
