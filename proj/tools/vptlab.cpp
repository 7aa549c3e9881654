#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vptlab/asymptotics.hpp"
#include "vptlab/csv.hpp"
#include "vptlab/error.hpp"
#include "vptlab/oracle.hpp"
#include "vptlab/rs_series.hpp"
#include "vptlab/singularity.hpp"
#include "vptlab/variational.hpp"

#ifndef VPTLAB_DATA_DIR
#define VPTLAB_DATA_DIR "data"
#endif

using namespace vptlab;
namespace fs = std::filesystem;

namespace {

constexpr unsigned kMaxDigits = 2000;
const char* const kVersion = "vptlab 1.0";

// Resolved parameters of one command, rendered for hashing and headers.
using Settings = std::map<std::string, std::string>;

std::vector<std::string> header(const std::string& command, const Settings& settings,
                                const PrecisionPolicy& policy,
                                const std::vector<std::string>& constants) {
  const std::string canon = csv::canonical(settings);
  std::vector<std::string> out{std::string(kVersion) + " " + command,
                               "config_hash=" + csv::fnv1a_hex(command + "|" + canon),
                               "config=" + canon, "precision_policy=" + policy.describe()};
  out.insert(out.end(), constants.begin(), constants.end());
  return out;
}

nlohmann::ordered_json header_json(const std::vector<std::string>& lines) {
  auto j = nlohmann::ordered_json::array();
  for (const auto& l : lines) j.push_back(l);
  return j;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw Error(ErrorKind::Io, "write to " + path.string() + " failed");
}

void emit(const std::string& target, const std::string& text) {
  if (target == "-") {
    std::cout << text << std::flush;
  } else {
    write_file(target, text);
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return in;
}

std::string slurp(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::Validation, what);
}

BigReal parse_real(const std::string& text, unsigned digits, const std::string& name) {
  try {
    return to_real(text, digits);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Validation, name + ": not a decimal number: " + text);
  }
}

// Runs body(i) for i < count on up to `jobs` threads. The error of the
// lowest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned jobs, const Body& body) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), count));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// coefficients

struct CoefficientsArgs {
  unsigned order = 4;
  unsigned max_order = kDefaultMaxOrder;
  std::string out = "-";
};

void run_coefficients(const CoefficientsArgs& a) {
  const auto series = rs_coefficients(a.order, a.max_order);
  const Settings s{{"order", std::to_string(a.order)}, {"max_order", std::to_string(a.max_order)}};
  std::ostringstream os;
  csv::write_comments(os, header("coefficients", s, {},
                                 {"convention=" + std::string(RationalSeries::convention_note)}));
  write_coefficients_csv(os, series);
  emit(a.out, os.str());
}

// converge

struct ConvergeArgs {
  unsigned n_min = 1;
  unsigned n_max = 23;
  unsigned alphas = 0;
  unsigned digits = 40;
  unsigned reference_digits = 45;
  std::string strategy = "formula";
  std::string c = std::string(kDefaultGrowthConstant);
  std::string correction = std::string(kDefaultCorrectionConstant);
  std::string out_dir = ".";
  unsigned jobs = 1;
};

void run_converge(const ConvergeArgs& a) {
  require(a.n_min >= 1 && a.n_min <= a.n_max, "orders need 1 <= n-min <= n-max");
  require(a.n_max <= kDefaultMaxOrder, "n-max exceeds " + std::to_string(kDefaultMaxOrder));
  require(a.alphas <= a.n_max, "alphas must not exceed n-max");
  require(a.digits >= 5 && a.digits <= kMaxDigits, "digits out of range");
  const OmegaStrategy strategy = parse_omega_strategy(a.strategy);

  const OracleEnergy ref = alpha0_reference(a.reference_digits);
  const auto series = rs_coefficients(a.n_max);
  const PrecisionPolicy policy;
  const unsigned cfg_digits = std::max(60u, a.digits + 20);

  std::vector<ApproximantRecord> records(a.n_max - a.n_min + 1);
  parallel_for(records.size(), a.jobs, [&](std::size_t i) {
    const unsigned N = a.n_min + static_cast<unsigned>(i);
    try {
      auto cfg = VariationalConfig::make(to_real(4, cfg_digits), to_real(0L, cfg_digits), N,
                                         cfg_digits);
      cfg.c_constant = parse_real(a.c, cfg_digits, "c");
      cfg.correction_constant = parse_real(a.correction, cfg_digits, "correction");
      cfg.omega_strategy = strategy;
      records[i] = alpha_approximants(N, std::min(a.alphas, N), cfg, series, policy, a.digits, ref.energy);
    } catch (const Error& e) {
      throw IndexedError(e.kind(), N, "N=" + std::to_string(N) + ": " + e.what());
    }
  });
  const auto deltas = build_delta_sequence(records, ref.energy, ref.certified_digits);

  const Settings s{{"n_min", std::to_string(a.n_min)},
                   {"n_max", std::to_string(a.n_max)},
                   {"alphas", std::to_string(a.alphas)},
                   {"digits", std::to_string(a.digits)},
                   {"reference_digits", std::to_string(a.reference_digits)},
                   {"strategy", std::string(to_string(strategy))},
                   {"c", a.c},
                   {"correction", a.correction}};
  const auto head = header("converge", s, policy,
                           {"c=" + a.c, "correction=" + a.correction, "g=4", "omega=0"});
  auto head_a = head;
  head_a.push_back("reference_alpha0=" + to_decimal(ref.energy, ref.certified_digits));
  head_a.push_back("reference_digits=" + std::to_string(ref.certified_digits));
  std::ostringstream ra, rd;
  write_approximants_csv(ra, records, head_a);
  write_delta_csv(rd, deltas, head);
  write_file(fs::path(a.out_dir) / "approximants.csv", ra.str());
  write_file(fs::path(a.out_dir) / "deltas.csv", rd.str());
}

// locate

struct LocateArgs {
  std::string deltas = std::string(VPTLAB_DATA_DIR) + "/deltas.csv";
  std::string approximants = std::string(VPTLAB_DATA_DIR) + "/alphas_N200.csv";
  long n_first = 40;
  long n_last = 120;
  long ratio_n_min = 6;
  bool separate_parity = false;
  double tolerance = 0.10;
  std::string g = "1";
  std::string out_dir = ".";
};

void run_locate(const LocateArgs& a) {
  require(!a.deltas.empty() || !a.approximants.empty(), "locate needs deltas or approximants");
  require(a.n_first >= 1 && a.n_first < a.n_last, "need 1 <= n-first < n-last");
  require(a.tolerance > 0, "tolerance must be positive");
  constexpr unsigned digits = 60;

  std::optional<DeltaSequence> seq;
  std::optional<SingularityEstimate> osc, ratio;
  std::vector<BigReal> ratios;
  std::string deltas_text, approximants_text;
  if (!a.deltas.empty()) {
    deltas_text = slurp(a.deltas);
    std::istringstream in(deltas_text);
    seq = read_delta_csv(in, digits).restricted(a.n_first, a.n_last);
    OscillationFitOptions opt;
    opt.separate_parity = a.separate_parity;
    osc = fit_oscillation(*seq, opt);
  }
  if (!a.approximants.empty()) {
    approximants_text = slurp(a.approximants);
    std::istringstream in(approximants_text);
    const auto recs = read_approximants_csv(in, digits);
    require(!recs.empty(), a.approximants + ": no records");
    ratios = ratio_sequence(recs.back().alphas);
    ratio = fit_ratio_singularity(ratios, a.ratio_n_min);
  }

  // Inputs enter the hash by content, not by path.
  const Settings s{{"deltas", deltas_text.empty() ? "" : csv::fnv1a_hex(deltas_text)},
                   {"approximants",
                    approximants_text.empty() ? "" : csv::fnv1a_hex(approximants_text)},
                   {"n_first", std::to_string(a.n_first)},
                   {"n_last", std::to_string(a.n_last)},
                   {"ratio_n_min", std::to_string(a.ratio_n_min)},
                   {"separate_parity", a.separate_parity ? "true" : "false"},
                   {"tolerance", format_double(a.tolerance)},
                   {"g", a.g}};
  const auto& saddle = default_saddle();
  const auto head = header("locate", s, {},
                           {"c=" + to_decimal(saddle.c, 30), "gamma=" + to_decimal(saddle.gamma, 30),
                            "correction=" + std::string(kDefaultCorrectionConstant)});

  nlohmann::ordered_json doc;
  doc["header"] = header_json(head);
  if (osc) doc["oscillation"] = nlohmann::ordered_json::parse(to_json(*osc, seq));
  if (ratio) doc["ratio"] = nlohmann::ordered_json::parse(to_json(*ratio));
  if (osc && ratio) {
    doc["cross_validation"] =
        nlohmann::ordered_json::parse(to_json(cross_validate(*osc, *ratio, a.tolerance)));
  }
  write_file(fs::path(a.out_dir) / "locate.json", doc.dump(2) + "\n");

  if (osc) {
    const BigReal g = parse_real(a.g, digits, "g");
    const auto params = ConvergenceModelParams::make(
        to_real(format_double(osc->g_s_abs), digits), to_real(format_double(osc->theta), digits),
        round_to(saddle.c, digits), to_real(kDefaultCorrectionConstant, digits),
        round_to(saddle.gamma, digits));
    std::ostringstream os;
    write_model_curves_csv(os, a.n_first, a.n_last, g, params,
                           to_real(format_double(osc->delta_phase.value_or(0)), digits), head);
    write_file(fs::path(a.out_dir) / "model_curves.csv", os.str());
  }
  if (ratio) {
    std::ostringstream os;
    write_ratios_csv(os, ratios, *ratio, head);
    write_file(fs::path(a.out_dir) / "ratios.csv", os.str());
  }
}

// oracle

struct OracleArgs {
  std::string g_grid = "0,0.1,0.2,0.5,1,2,5,10";
  std::string omega = "1";
  unsigned digits = 30;
  unsigned order = 200;
  unsigned terms = 23;
  std::string out = "-";
  unsigned jobs = 1;
};

void run_oracle(const OracleArgs& a) {
  require(a.digits >= 5 && a.digits <= OracleOptions{}.max_digits, "digits out of range");
  require(a.terms >= 1 && a.terms <= a.order && a.order <= kDefaultMaxOrder,
          "need 1 <= terms <= order <= " + std::to_string(kDefaultMaxOrder));
  const unsigned work = a.digits + 20;
  const BigReal omega = parse_real(a.omega, work, "omega");
  require(omega >= 0, "omega must be nonnegative");
  std::vector<BigReal> gs;
  std::vector<std::string> g_text;
  for (const auto& t : csv::split(a.g_grid)) {
    require(!t.empty(), "empty entry in g grid");
    gs.push_back(parse_real(t, work, "g"));
    require(gs.back() >= 0, "g must be nonnegative");
    g_text.push_back(t);
  }
  require(!gs.empty(), "empty g grid");

  const auto series = rs_coefficients(a.order);
  auto cfg = VariationalConfig::make(to_real(4, 60), to_real(0L, 60), a.order);
  const PrecisionPolicy policy;
  const auto strong = alpha_approximants(a.order, a.terms - 1, cfg, series, policy, 40);

  std::vector<OracleRow> rows(gs.size());
  parallel_for(gs.size(), a.jobs, [&](std::size_t i) {
    PrecisionScope scope(work);
    OracleRow& r = rows[i];
    r.g = gs[i];
    r.omega = omega;
    r.oracle = ground_energy(gs[i], omega, a.digits);
    for (unsigned L : {2u, 3u}) {
      if (omega > 0) {
        r.sums.push_back(series_partial_sum(series, gs[i], omega, L));
      } else {
        r.sums.emplace_back();
      }
    }
    if (gs[i] > 0 && omega > 0) {
      r.sums.push_back(strong_coupling_partial_sum(strong.alphas, gs[i], omega, a.terms));
    } else {
      r.sums.emplace_back();
    }
  });

  const Settings s{{"g", a.g_grid},       {"omega", a.omega},
                   {"digits", std::to_string(a.digits)}, {"order", std::to_string(a.order)},
                   {"terms", std::to_string(a.terms)}};
  std::ostringstream os;
  write_oracle_csv(os, rows, {"weak_2", "weak_3", "strong_" + std::to_string(a.terms)},
                   header("oracle", s, policy,
                          {"c=" + std::string(kDefaultGrowthConstant),
                           "correction=" + std::string(kDefaultCorrectionConstant),
                           "strong_order=" + std::to_string(a.order)}));
  emit(a.out, os.str());
}

// constants

struct ConstantsArgs {
  unsigned digits = 30;
};

void run_constants(const ConstantsArgs& a) {
  require(a.digits >= 15 && a.digits <= 200, "digits must lie in [15, 200]");
  const unsigned work = a.digits + 10;
  const auto saddle = solve_gamma_c(work);
  const auto params = ConvergenceModelParams::make(
      to_real("0.160", work), to_real("-0.467", work), saddle.c,
      to_real(kDefaultCorrectionConstant, work), saddle.gamma);
  const Settings s{{"digits", std::to_string(a.digits)}};
  std::ostringstream os;
  csv::write_comments(os, header("constants", s, {}, {"g_s_abs=0.160", "theta=-0.467"}));
  auto fixed = [&](const BigReal& x) { return x.str(a.digits, std::ios_base::fixed); };
  os << "gamma = " << fixed(saddle.gamma) << "\n"
     << "c = " << fixed(saddle.c) << "\n"
     << "q = " << fixed(c1_exponent_constant(params)) << "\n"
     << "a = " << fixed(params.a) << "\n"
     << "a_cos_theta = " << fixed(envelope_exponent(params)) << "\n";
  std::cout << os.str() << std::flush;
}

// Error reporting

int exit_code(ErrorKind kind) {
  if (kind == ErrorKind::Io) return 4;
  return is_numerical(kind) ? 3 : 2;
}

int fail(const std::string& kind, const std::string& message, int code,
         std::optional<long> index = {}) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  if (index) j["index"] = *index;
  j["exit_code"] = code;
  std::cerr << j.dump() << std::endl;
  return code;
}

std::string normalize_key(std::string k) {
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

// Flat key=value config: entries become "--key value" arguments placed before
// the command-line ones, so explicit flags win.
std::vector<std::string> config_arguments(const std::string& path, const CLI::App& sub,
                                          const std::set<std::string>& known_elsewhere) {
  auto in = open_input(path);
  std::vector<std::string> out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#' || line[b] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Validation,
                  path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    auto trim = [](std::string s) {
      const auto f = s.find_first_not_of(" \t\r");
      if (f == std::string::npos) return std::string();
      return s.substr(f, s.find_last_not_of(" \t\r") - f + 1);
    };
    const std::string key = normalize_key(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config") continue;
    const auto* opt = sub.get_option_no_throw("--" + key);
    if (!opt) {
      if (known_elsewhere.count(key)) continue;
      throw Error(ErrorKind::Validation, path + ": unknown key " + key);
    }
    if (opt->get_type_size() == 0) {
      if (value == "true" || value == "1") out.push_back("--" + key);
    } else {
      out.push_back("--" + key);
      out.push_back(value);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational perturbation theory for the quartic anharmonic oscillator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value file; flags take precedence");
  };

  CoefficientsArgs ca;
  auto* coeff = app.add_subcommand("coefficients", "exact series coefficients E_0..E_L as CSV");
  coeff->add_option("-L,--order", ca.order, "highest order L")->capture_default_str();
  coeff->add_option("--max-order", ca.max_order, "resource limit on L")->capture_default_str();
  coeff->add_option("-o,--out", ca.out, "output file, - for stdout")->capture_default_str();
  add_config(coeff);

  ConvergeArgs cv;
  auto* conv = app.add_subcommand("converge", "strong-coupling approximants and Delta_N");
  conv->add_option("--n-min", cv.n_min, "first order")->capture_default_str();
  conv->add_option("-N,--n-max", cv.n_max, "last order")->capture_default_str();
  conv->add_option("--alphas", cv.alphas, "highest alpha_n per record (capped at N)")->capture_default_str();
  conv->add_option("--digits", cv.digits, "verified digits per alpha_n")->capture_default_str();
  conv->add_option("--reference-digits", cv.reference_digits, "oracle digits for alpha_0")
      ->capture_default_str();
  conv->add_option("--strategy", cv.strategy, "formula|stationary")
      ->check(CLI::IsMember({"formula", "stationary"}))
      ->capture_default_str();
  conv->add_option("--growth-constant", cv.c, "growth constant of sigma_N")->capture_default_str();
  conv->add_option("--correction", cv.correction, "finite-N correction of sigma_N")
      ->capture_default_str();
  conv->add_option("--out-dir", cv.out_dir, "directory for approximants.csv, deltas.csv")
      ->capture_default_str();
  conv->add_option("-j,--jobs", cv.jobs, "worker threads")->check(CLI::PositiveNumber);
  add_config(conv);

  LocateArgs la;
  auto* loc = app.add_subcommand("locate", "fit the leading singularity by both methods");
  loc->add_option("--deltas", la.deltas, "Delta_N CSV, empty to skip")->capture_default_str();
  loc->add_option("--approximants", la.approximants,
                  "approximant CSV; the last record's alphas feed the ratio fit, empty to skip")
      ->capture_default_str();
  loc->add_option("--n-first", la.n_first)->capture_default_str();
  loc->add_option("--n-last", la.n_last)->capture_default_str();
  loc->add_option("--ratio-n-min", la.ratio_n_min)->capture_default_str();
  loc->add_flag("--separate-parity", la.separate_parity, "separate even/odd amplitudes");
  loc->add_option("--tolerance", la.tolerance, "cross-validation tolerance")->capture_default_str();
  loc->add_option("--g", la.g, "coupling for the C_1 model curve")->capture_default_str();
  loc->add_option("--out-dir", la.out_dir)->capture_default_str();
  add_config(loc);

  OracleArgs oa;
  auto* orc = app.add_subcommand("oracle", "numerical ground energies against partial sums");
  orc->add_option("--g", oa.g_grid, "comma separated couplings")->capture_default_str();
  orc->add_option("--omega", oa.omega)->capture_default_str();
  orc->add_option("--digits", oa.digits, "oracle target digits")->capture_default_str();
  orc->add_option("--order", oa.order, "order N of the strong-coupling alphas")
      ->capture_default_str();
  orc->add_option("--terms", oa.terms, "terms of the strong-coupling sum")->capture_default_str();
  orc->add_option("-o,--out", oa.out, "output file, - for stdout")->capture_default_str();
  orc->add_option("-j,--jobs", oa.jobs, "worker threads")->check(CLI::PositiveNumber);
  add_config(orc);

  ConstantsArgs ka;
  auto* cst = app.add_subcommand("constants", "saddle constants and derived exponents");
  cst->add_option("--digits", ka.digits)->capture_default_str();
  add_config(cst);

  // Splice the config file into the argument list.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    CLI::App* active = nullptr;
    std::size_t pos = 0;
    for (; pos < args.size(); ++pos) {
      for (auto* sub : app.get_subcommands({})) {
        if (sub->get_name() == args[pos]) active = sub;
      }
      if (active) break;
    }
    std::optional<std::string> cfg;
    for (std::size_t i = pos + 1; active && i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) cfg = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) cfg = args[i].substr(9);
    }
    if (cfg) {
      std::set<std::string> known;
      for (auto* sub : app.get_subcommands({})) {
        for (const auto* opt : sub->get_options()) {
          for (const auto& n : opt->get_lnames()) known.insert(n);
        }
      }
      const auto extra = config_arguments(*cfg, *active, known);
      args.insert(args.begin() + static_cast<long>(pos) + 1, extra.begin(), extra.end());
    }
  } catch (const Error& e) {
    return fail(std::string(to_string(e.kind())), e.what(), exit_code(e.kind()));
  }

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("Validation", e.what(), 2);
  }

  try {
    if (*coeff) run_coefficients(ca);
    if (*conv) run_converge(cv);
    if (*loc) run_locate(la);
    if (*orc) run_oracle(oa);
    if (*cst) run_constants(ka);
  } catch (const IndexedError& e) {
    return fail(std::string(to_string(e.kind())), e.what(), exit_code(e.kind()), e.index());
  } catch (const Error& e) {
    return fail(std::string(to_string(e.kind())), e.what(), exit_code(e.kind()));
  } catch (const std::exception& e) {
    return fail("Internal", e.what(), 3);
  }
  return 0;
}
