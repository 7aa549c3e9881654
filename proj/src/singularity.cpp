#include "vptlab/singularity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vptlab/csv.hpp"
#include "vptlab/error.hpp"

namespace vptlab {

std::string_view to_string(Parity p) noexcept { return p == Parity::Even ? "even" : "odd"; }

std::string_view to_string(ReferenceProvenance p) noexcept {
  return p == ReferenceProvenance::Oracle ? "oracle" : "extrapolated";
}

std::string_view to_string(FitMethod m) noexcept {
  return m == FitMethod::OscillationFit ? "OscillationFit" : "RatioFit";
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::optional<double> SingularityEstimate::envelope_constant() const {
  if (!a) return std::nullopt;
  return *a * std::cos(theta);
}

// ---------------------------------------------------------------------------
// Delta sequences

DeltaSequence DeltaSequence::restricted(long n_first, long n_last) const {
  DeltaSequence out = *this;
  out.entries.clear();
  for (const auto& e : entries) {
    if (e.N >= n_first && e.N <= n_last) out.entries.push_back(e);
  }
  return out;
}

unsigned required_reference_digits(const std::vector<ApproximantRecord>& records,
                                   const BigReal& reference) {
  PrecisionScope scope(precision_digits(reference));
  unsigned needed = 0;
  for (const auto& r : records) {
    if (r.alphas.empty()) continue;
    const BigReal d = abs(r.alphas[0] - reference);
    if (d == 0 || reference == 0) continue;
    const double rel = log10(d / abs(reference)).convert_to<double>();
    needed = std::max(needed, static_cast<unsigned>(std::ceil(-rel)) + 2);
  }
  return needed;
}

DeltaSequence build_delta_sequence(const std::vector<ApproximantRecord>& records,
                                   const BigReal& reference, unsigned reference_digits,
                                   ReferenceProvenance provenance) {
  if (records.empty()) throw Error(ErrorKind::Validation, "no approximant records");
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].alphas.empty()) {
      throw Error(ErrorKind::Validation, "record N=" + std::to_string(records[i].N) +
                                             " has no alpha_0");
    }
    if (i > 0 && records[i].N <= records[i - 1].N) {
      throw Error(ErrorKind::Validation, "records must have strictly increasing N");
    }
  }
  const unsigned needed = required_reference_digits(records, reference);
  if (reference_digits < needed) {
    throw Error(ErrorKind::InsufficientPrecision,
                "reference certified to " + std::to_string(reference_digits) +
                    " digits, the smallest delta needs " + std::to_string(needed));
  }
  DeltaSequence seq;
  seq.reference_alpha0 = reference;
  seq.reference_digits = reference_digits;
  seq.provenance = provenance;
  PrecisionScope scope(precision_digits(reference));
  for (const auto& r : records) {
    seq.entries.push_back({static_cast<long>(r.N), BigReal(abs(r.alphas[0] - reference)),
                           r.N % 2 ? Parity::Odd : Parity::Even});
  }
  return seq;
}

void write_delta_csv(std::ostream& out, const DeltaSequence& seq,
                     const std::vector<std::string>& comments) {
  auto all = comments;
  all.push_back("reference_alpha0=" + to_decimal(seq.reference_alpha0, seq.reference_digits));
  all.push_back("reference_digits=" + std::to_string(seq.reference_digits));
  all.push_back("reference_provenance=" + std::string(to_string(seq.provenance)));
  csv::write_comments(out, all);
  csv::write_row(out, {"N", "delta", "parity"});
  for (const auto& e : seq.entries) {
    csv::write_row(out, {std::to_string(e.N), to_decimal(e.delta, 25),
                         std::string(to_string(e.parity))});
  }
}

DeltaSequence read_delta_csv(std::istream& in, unsigned digits) {
  const auto table = csv::read(in);
  DeltaSequence seq;
  for (const auto& c : table.comments) {
    const auto eq = c.find('=');
    if (eq == std::string::npos) continue;
    std::string key = c.substr(0, eq);
    key.erase(0, key.find_first_not_of(' '));
    const std::string value = c.substr(eq + 1);
    if (key == "reference_alpha0") seq.reference_alpha0 = to_real(value, digits);
    if (key == "reference_digits") seq.reference_digits = std::stoul(value);
    if (key == "reference_provenance") {
      seq.provenance = value == "extrapolated" ? ReferenceProvenance::Extrapolated
                                               : ReferenceProvenance::Oracle;
    }
  }
  const auto cn = table.column("N");
  const auto cd = table.column("delta");
  for (const auto& row : table.rows) {
    const long N = std::stol(row[cn]);
    if (!seq.entries.empty() && N <= seq.entries.back().N) {
      throw Error(ErrorKind::Validation, "delta rows must have strictly increasing N");
    }
    BigReal d = to_real(row[cd], digits);
    if (d < 0) throw Error(ErrorKind::Validation, "negative delta at N=" + std::to_string(N));
    seq.entries.push_back({N, d, N % 2 ? Parity::Odd : Parity::Even});
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Levenberg-Marquardt

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Residuals = std::function<void(const Vec& p, Vec& r, Mat* J)>;

constexpr double kPi = std::numbers::pi;

Vec levenberg_marquardt(const Residuals& f, Vec p, int max_iter = 300) {
  Vec r, r_try;
  Mat J;
  f(p, r, &J);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  for (int it = 0; it < max_iter && std::isfinite(cost); ++it) {
    const Mat A = J.transpose() * J;
    const Vec grad = J.transpose() * r;
    bool accepted = false;
    for (int inner = 0; inner < 30; ++inner) {
      Mat M = A;
      for (Eigen::Index i = 0; i < M.rows(); ++i) M(i, i) += lambda * std::max(A(i, i), 1e-12);
      const Vec step = M.ldlt().solve(-grad);
      if (!step.allFinite()) {
        lambda *= 10;
        continue;
      }
      const Vec trial = p + step;
      f(trial, r_try, nullptr);
      const double c = r_try.squaredNorm();
      if (std::isfinite(c) && c < cost) {
        const bool small = step.norm() <= 1e-14 * (1 + p.norm());
        const bool flat = cost - c <= 1e-16 * cost;
        p = trial;
        cost = c;
        f(p, r, &J);
        lambda = std::max(lambda / 10, 1e-15);
        accepted = true;
        if (small || flat) return p;
        break;
      }
      lambda *= 10;
      if (lambda > 1e16) break;
    }
    if (!accepted) break;
  }
  return p;
}

bool lexicographic_less(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

// Into (-pi/2, pi/2].
double fold_half_period(double x) {
  x = std::fmod(x, kPi);
  if (x <= -kPi / 2) x += kPi;
  if (x > kPi / 2) x -= kPi;
  return x;
}

struct Candidate {
  Vec p;
  double rms = std::numeric_limits<double>::infinity();
  bool degenerate = false;
};

void keep_best(std::optional<Candidate>& best, const Candidate& c) {
  if (!best || c.rms < best->rms || (c.rms == best->rms && lexicographic_less(c.p, best->p))) {
    best = c;
  }
}

void raise_fit_failure(bool any_degenerate, const char* what) {
  if (any_degenerate) {
    throw Error(ErrorKind::DegenerateFit, std::string(what) + ": no oscillation detected");
  }
  throw Error(ErrorKind::FitDiverged, std::string(what) + ": no start reduced the residual");
}

}  // namespace

// ---------------------------------------------------------------------------
// Oscillation fit

SingularityEstimate fit_oscillation(const DeltaSequence& seq, const OscillationFitOptions& options) {
  std::vector<double> t, y;
  std::vector<bool> odd;
  for (const auto& e : seq.entries) {
    if (e.delta == 0) continue;
    t.push_back(std::cbrt(static_cast<double>(e.N)));
    y.push_back(log(e.delta).convert_to<double>());
    odd.push_back(e.parity == Parity::Odd);
  }
  if (t.size() < options.min_entries || seq.entries.empty() ||
      seq.entries.back().N < options.min_span) {
    throw Error(ErrorKind::Validation, "oscillation fit needs " +
                                           std::to_string(options.min_entries) +
                                           " nonzero entries reaching N >= " +
                                           std::to_string(options.min_span));
  }
  const std::size_t n = t.size();
  const int amps = options.separate_parity ? 2 : 1;
  const int dim = amps + 3;  // log amplitude(s), a cos(theta), a sin(theta), phi
  const double span = t.back() - t.front();

  auto weights = [&](const Vec& p) {
    Vec w(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = p[amps + 1] * t[i] + p[amps + 2];
      const double ph = (u - kPi / 2) / kPi;
      const double dist = std::abs(ph - std::round(ph)) * kPi;
      w[i] = dist < options.zero_distance ? std::sin(dist) * std::sin(dist) : 1.0;
    }
    return w;
  };
  auto residuals_for = [&](const Vec& w) -> Residuals {
    return [&, w](const Vec& p, Vec& r, Mat* J) {
      r.resize(n);
      if (J) J->resize(n, dim);
      for (std::size_t i = 0; i < n; ++i) {
        const int ai = (amps == 2 && odd[i]) ? 1 : 0;
        const double u = p[amps + 1] * t[i] + p[amps + 2];
        const double cu = std::cos(u);
        const double m = p[ai] - p[amps] * t[i] + std::log(std::abs(cu) + 1e-300);
        r[i] = w[i] * (y[i] - m);
        if (J) {
          const double tn = std::tan(u);
          J->row(i).setZero();
          (*J)(i, ai) = -w[i];
          (*J)(i, amps) = w[i] * t[i];
          (*J)(i, amps + 1) = w[i] * tn * t[i];
          (*J)(i, amps + 2) = w[i] * tn;
        }
      }
    };
  };
  // Normalized by the weights so that collapsing onto model zeros is not rewarded.
  auto score = [&](const Vec& p, const Vec& w) {
    Vec r;
    residuals_for(w)(p, r, nullptr);
    return std::sqrt(r.squaredNorm() / w.squaredNorm());
  };

  std::optional<Candidate> best;
  bool any_degenerate = false;
  std::size_t starts = 0;
  for (double a0 : {8.0, 10.4, 12.0}) {
    for (double th0 : {-0.3, -0.467, -0.6}) {
      for (int k = 0; k < 4; ++k) {
        ++starts;
        Vec p(dim);
        const double ac = a0 * std::cos(th0), as = a0 * std::sin(th0), phi = k * kPi / 4;
        double lA = 0;
        for (std::size_t i = 0; i < n; ++i) lA += y[i] + ac * t[i];
        lA /= static_cast<double>(n);
        for (int j = 0; j < amps; ++j) p[j] = lA;
        p[amps] = ac;
        p[amps + 1] = as;
        p[amps + 2] = phi;

        const double start_rms = score(p, weights(p));
        for (int pass = 0; pass < 40; ++pass) {
          const Vec next = levenberg_marquardt(residuals_for(weights(p)), p);
          const bool settled = (next - p).cwiseAbs().maxCoeff() <= 1e-12 * (1 + p.norm());
          p = next;
          if (settled) break;
        }
        if (!p.allFinite()) continue;
        const Vec w = weights(p);
        if (w.sum() < 0.5 * static_cast<double>(n)) {
          any_degenerate = true;
          continue;
        }
        const double rms = score(p, w);
        if (!std::isfinite(rms) || rms > start_rms) continue;
        keep_best(best, {p, rms, std::abs(p[amps + 1]) * span < kPi / 2});
      }
    }
  }
  if (!best) raise_fit_failure(any_degenerate, "oscillation fit");
  if (best->degenerate) raise_fit_failure(true, "oscillation fit");
  {
    // theta = 0: log Delta_N linear in N^(1/3), solved in closed form.
    Mat X(n, 2);
    Vec yy(n);
    for (std::size_t i = 0; i < n; ++i) {
      X(i, 0) = 1;
      X(i, 1) = -t[i];
      yy[i] = y[i];
    }
    const Vec b = X.colPivHouseholderQr().solve(yy);
    const double flat_rms = std::sqrt((yy - X * b).squaredNorm() / static_cast<double>(n));
    if (flat_rms <= best->rms) raise_fit_failure(true, "oscillation fit");
  }

  Vec p = best->p;
  double as = p[amps + 1], phi = p[amps + 2];
  if (as > 0) {
    as = -as;
    phi = -phi;
  }
  const double ac = p[amps];
  const double a = std::hypot(ac, as);
  const double theta = std::atan2(as, ac);

  SingularityEstimate est;
  est.method = FitMethod::OscillationFit;
  est.a = a;
  est.theta = theta;
  est.delta_phase = fold_half_period(phi);
  est.g_s_abs = std::pow(a, -1.5) / options.growth_constant;
  est.g_s_arg = 1.5 * std::abs(theta);
  est.fit_rms = best->rms;
  if (amps == 2) {
    est.log_amplitude_even = p[0];
    est.log_amplitude_odd = p[1];
  } else {
    est.log_amplitude = p[0];
  }
  est.points = n;
  est.starts = starts;
  return est;
}

// ---------------------------------------------------------------------------
// Ratio analysis

std::vector<BigReal> ratio_sequence(const std::vector<BigReal>& alphas) {
  std::vector<BigReal> out;
  if (alphas.size() < 2) return out;
  for (std::size_t n = 0; n + 1 < alphas.size(); ++n) {
    if (alphas[n] == 0) {
      throw IndexedError(ErrorKind::DivisionByZero, static_cast<long>(n),
                         "alpha_" + std::to_string(n) + " is zero");
    }
    PrecisionScope scope(std::max(precision_digits(alphas[n]), precision_digits(alphas[n + 1])));
    out.push_back(alphas[n + 1] / alphas[n]);
  }
  return out;
}

BigReal ratio_model(long n, const BigReal& x_s_abs, const BigReal& theta, const BigReal& delta,
                    std::optional<BigReal> tolerance) {
  const unsigned digits = std::max(precision_digits(x_s_abs), precision_digits(theta));
  PrecisionScope scope(digits);
  const BigReal den = cos(BigReal(n) * theta + delta);
  const BigReal tol = tolerance ? *tolerance : pow(BigReal(10), -static_cast<long>(digits) + 5);
  if (abs(den) <= tol) {
    throw IndexedError(ErrorKind::PoleAtIndex, n,
                       "ratio model has a pole at n=" + std::to_string(n));
  }
  return -cos(BigReal(n + 1) * theta + delta) / (x_s_abs * den);
}

double ratio_model(long n, double x_s_abs, double theta, double delta) {
  const double den = std::cos(n * theta + delta);
  if (std::abs(den) <= 1e-13) {
    throw IndexedError(ErrorKind::PoleAtIndex, n,
                       "ratio model has a pole at n=" + std::to_string(n));
  }
  return -std::cos((n + 1) * theta + delta) / (x_s_abs * den);
}

SingularityEstimate fit_ratio_singularity(const std::vector<BigReal>& ratios, long n_min) {
  std::vector<double> idx, R;
  for (std::size_t n = 0; n < ratios.size(); ++n) {
    if (static_cast<long>(n) < n_min) continue;
    idx.push_back(static_cast<double>(n));
    R.push_back(ratios[n].convert_to<double>());
  }
  if (R.size() < 8) {
    throw Error(ErrorKind::Validation, "ratio fit needs at least 8 ratios with n >= " +
                                           std::to_string(n_min));
  }
  const std::size_t m = R.size();
  const double span = idx.back() - idx.front();

  const Residuals f = [&](const Vec& p, Vec& r, Mat* J) {
    r.resize(m);
    if (J) J->resize(m, 3);
    for (std::size_t i = 0; i < m; ++i) {
      const double u = (idx[i] + 1) * p[1] + p[2];
      const double v = idx[i] * p[1] + p[2];
      const double cu = std::cos(u), cv = std::cos(v), su = std::sin(u), sv = std::sin(v);
      const double model = -cu / (p[0] * cv);
      r[i] = R[i] - model;
      if (J) {
        const double q = p[0] * cv * cv;
        (*J)(i, 0) = model / p[0];
        (*J)(i, 1) = -((idx[i] + 1) * su * cv - idx[i] * cu * sv) / q;
        (*J)(i, 2) = -(su * cv - cu * sv) / q;
      }
    }
  };
  // Cross-multiplied residual x R_n cos(v) + cos(u): same zeros, no poles.
  const Residuals g = [&](const Vec& p, Vec& r, Mat* J) {
    r.resize(m);
    if (J) J->resize(m, 3);
    for (std::size_t i = 0; i < m; ++i) {
      const double u = (idx[i] + 1) * p[1] + p[2];
      const double v = idx[i] * p[1] + p[2];
      r[i] = p[0] * R[i] * std::cos(v) + std::cos(u);
      if (J) {
        (*J)(i, 0) = R[i] * std::cos(v);
        (*J)(i, 1) = -p[0] * R[i] * idx[i] * std::sin(v) - (idx[i] + 1) * std::sin(u);
        (*J)(i, 2) = -p[0] * R[i] * std::sin(v) - std::sin(u);
      }
    }
  };
  auto rms_of = [&](const Vec& p) {
    Vec r;
    f(p, r, nullptr);
    return std::sqrt(r.squaredNorm() / static_cast<double>(m));
  };

  std::optional<Candidate> best;
  std::size_t starts = 0;
  for (double x0 : {5.0, 8.5, 12.0}) {
    for (double th0 : {-0.3, -0.467, -0.6}) {
      for (int k = 0; k < 4; ++k) {
        ++starts;
        Vec p(3);
        p << x0, th0, -kPi / 2 + k * kPi / 4;
        const double start_rms = rms_of(p);
        p = levenberg_marquardt(f, levenberg_marquardt(g, p));
        const double rms = rms_of(p);
        if (!p.allFinite() || !std::isfinite(rms) || rms > start_rms) continue;
        // Canonical form: x > 0, theta in [-pi, 0], delta in (-pi/2, pi/2].
        if (p[0] < 0) {
          p[0] = -p[0];
          p[1] += kPi;
        }
        p[1] = std::remainder(p[1], 2 * kPi);
        if (p[1] > 0) {
          p[1] = -p[1];
          p[2] = -p[2];
        }
        p[2] = fold_half_period(p[2]);
        const double off_axis = std::min(std::abs(p[1]), kPi - std::abs(p[1]));
        keep_best(best, {p, rms_of(p), off_axis * span < kPi / 2});
      }
    }
  }
  if (!best) raise_fit_failure(false, "ratio fit");
  if (best->degenerate) raise_fit_failure(true, "ratio fit");

  SingularityEstimate est;
  est.method = FitMethod::RatioFit;
  est.x_s_abs = best->p[0];
  est.theta = best->p[1];
  est.delta_phase = best->p[2];
  est.g_s_abs = 4 * std::pow(best->p[0], -1.5);
  est.g_s_arg = 1.5 * std::abs(best->p[1]);
  est.fit_rms = best->rms;
  est.points = m;
  est.starts = starts;
  return est;
}

CrossValidationReport cross_validate(const SingularityEstimate& est_a,
                                     const SingularityEstimate& est_b, double tolerance) {
  auto rel = [](double x, double y) {
    const double scale = std::max(std::abs(x), std::abs(y));
    return scale == 0 ? 0.0 : std::abs(x - y) / scale;
  };
  CrossValidationReport r;
  r.rel_diff_g_s_abs = rel(est_a.g_s_abs, est_b.g_s_abs);
  r.rel_diff_theta = rel(est_a.theta, est_b.theta);
  r.tolerance = tolerance;
  r.pass = r.rel_diff_g_s_abs <= tolerance && r.rel_diff_theta <= tolerance;
  return r;
}

std::string to_json(const SingularityEstimate& est, const std::optional<DeltaSequence>& source) {
  nlohmann::ordered_json j;
  auto put = [&](const char* key, const std::optional<double>& v) {
    j[key] = v ? nlohmann::ordered_json(format_double(*v)) : nlohmann::ordered_json(nullptr);
  };
  j["method"] = std::string(to_string(est.method));
  put("x_s_abs", est.x_s_abs);
  put("theta", est.theta);
  put("delta_phase", est.delta_phase);
  put("g_s_abs", est.g_s_abs);
  put("g_s_arg", est.g_s_arg);
  put("a", est.a);
  put("envelope_constant", est.envelope_constant());
  put("fit_rms", est.fit_rms);
  if (est.log_amplitude) put("log_amplitude", est.log_amplitude);
  if (est.log_amplitude_even) put("log_amplitude_even", est.log_amplitude_even);
  if (est.log_amplitude_odd) put("log_amplitude_odd", est.log_amplitude_odd);
  j["points"] = est.points;
  j["starts"] = est.starts;
  if (source) {
    j["reference_alpha0"] = to_decimal(source->reference_alpha0, source->reference_digits);
    j["reference_digits"] = source->reference_digits;
    j["reference_provenance"] = std::string(to_string(source->provenance));
  }
  return j.dump(2);
}

std::string to_json(const CrossValidationReport& report) {
  nlohmann::ordered_json j;
  j["rel_diff_g_s_abs"] = format_double(report.rel_diff_g_s_abs);
  j["rel_diff_theta"] = format_double(report.rel_diff_theta);
  j["tolerance"] = format_double(report.tolerance);
  j["result"] = report.pass ? "PASS" : "FAIL";
  return j.dump(2);
}

void write_ratios_csv(std::ostream& out, const std::vector<BigReal>& ratios,
                      const SingularityEstimate& est, const std::vector<std::string>& comments) {
  csv::write_comments(out, comments);
  csv::write_row(out, {"n", "R_n", "R_n_model"});
  for (std::size_t n = 0; n < ratios.size(); ++n) {
    std::string model;
    if (est.x_s_abs && est.delta_phase) {
      try {
        model = format_double(
            ratio_model(static_cast<long>(n), *est.x_s_abs, est.theta, *est.delta_phase));
      } catch (const IndexedError&) {
      }
    }
    csv::write_row(out, {std::to_string(n), to_decimal(ratios[n], 25), model});
  }
}

}  // namespace vptlab
