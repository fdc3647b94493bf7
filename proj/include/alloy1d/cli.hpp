#pragma once

/// Command-line driver. `run` takes the argument list without the program
/// name, writes CSV to --out (or `out`) and diagnostics to `err`, and returns
/// the exit code: 0 success, 1 invalid input, 2 numeric failure.

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "alloy1d/acceptance.hpp"
#include "alloy1d/lyapunov.hpp"
#include "alloy1d/model_io.hpp"
#include "alloy1d/scattering.hpp"
#include "alloy1d/spectra.hpp"
#include "alloy1d/version.hpp"
#include "json.hpp"

namespace alloy1d::cli {

/// 12 significant digits, '.' decimal point, independent of the locale.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

class CsvWriter {
public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  CsvWriter& header(std::initializer_list<const char*> cols) {
    bool first = true;
    for (const char* c : cols) {
      os_ << (first ? "" : ",") << c;
      first = false;
    }
    os_ << '\n';
    return *this;
  }

  template <class... T>
  void row(const T&... fields) {
    bool first = true;
    ((os_ << (first ? "" : ","), put(fields), first = false), ...);
    os_ << '\n';
  }

private:
  void put(double x) { os_ << format_number(x); }
  void put(std::int64_t x) { os_ << x; }
  void put(int x) { os_ << x; }
  void put(const std::string& s) { os_ << s; }
  void put(const char* s) { os_ << s; }

  std::ostream& os_;
};

namespace detail {

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct EnergyGrid {
  double min = NAN, max = NAN, step = NAN;
  std::vector<double> list;

  void add_options(CLI::App* app) {
    app->add_option("--lambda-min", min, "First grid energy");
    app->add_option("--lambda-max", max, "Last grid energy");
    app->add_option("--lambda-step", step, "Grid spacing");
    app->add_option("--lambda-list", list, "Comma-separated energies")->delimiter(',');
  }

  std::vector<double> values() const {
    if (!list.empty()) return list;
    if (std::isnan(min) || std::isnan(max) || std::isnan(step))
      throw InvalidInput("give --lambda-list or all of --lambda-min, --lambda-max, --lambda-step");
    if (!(step > 0.0) || max < min) throw InvalidInput("energy grid needs --lambda-step > 0 and max >= min");
    std::vector<double> g;
    const auto n = static_cast<std::int64_t>(std::floor((max - min) / step + 1e-9));
    for (std::int64_t i = 0; i <= n; ++i) g.push_back(min + static_cast<double>(i) * step);
    return g;
  }
};

/// "a:b,c:d" -> intervals.
inline std::vector<Interval> parse_intervals(const std::string& s) {
  std::vector<Interval> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw InvalidInput("interval '" + part + "' must be written a:b");
    try {
      out.push_back({std::stod(part.substr(0, colon)), std::stod(part.substr(colon + 1))});
    } catch (const std::logic_error&) {
      throw InvalidInput("interval '" + part + "' is not numeric");
    }
  }
  return out;
}

}  // namespace detail

inline std::string usage() {
  return "usage: alloy1d <subcommand> [options]\n"
         "subcommands: bands scatter critical lyapunov ids thouless green goodbox wegner eigdecay selftest replay\n"
         "run 'alloy1d <subcommand> --help' for the options of one subcommand\n";
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

namespace detail {

struct Common {
  std::string model_path;
  std::uint64_t seed = 1;
  std::string out_path;
  std::string manifest_path;
  unsigned workers = 1;
};

inline ModelConfig prepared_model(const Common& c) {
  if (c.model_path.empty()) throw InvalidInput("--model is required");
  ModelConfig m = load_model(c.model_path);
  return m.mu.non_trivial() ? normalize_support(m) : m;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> original = args;
  if (args.empty()) {
    err << usage();
    return 1;
  }
  static const std::vector<std::string> known{"bands", "scatter", "critical", "lyapunov", "ids",      "thouless",
                                              "green", "goodbox", "wegner",   "eigdecay", "selftest", "replay"};
  if (args[0] != "--help" && args[0] != "-h" && std::find(known.begin(), known.end(), args[0]) == known.end()) {
    err << "unknown subcommand '" << args[0] << "'\n" << usage();
    return 1;
  }

  CLI::App app{"Random alloy-type Schroedinger operators on the line", "alloy1d"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  detail::Common common;
  auto add_common = [&](CLI::App* sub, bool with_model = true) {
    if (with_model) sub->add_option("--model", common.model_path, "Model JSON file");
    sub->add_option("--seed", common.seed, "Master seed");
    sub->add_option("--out", common.out_path, "Output CSV file (default: stdout)");
    sub->add_option("--manifest", common.manifest_path, "Manifest JSON file (default: <out>.manifest.json)");
    sub->add_option("--workers", common.workers, "Worker threads (results do not depend on it)");
  };

  // Parameters shared by several subcommands.
  double lmin = NAN, lmax = NAN, step = 0.01, edge_tol = 1e-6, root_tol = 1e-8;
  double lambda = NAN, gamma_bar = 0.05, sigma = 0.5, beta = 0.5, tolerance_scale = 1.0;
  std::int64_t steps = 10000, samples = 100, burn_in = 0, L = 45, sample_index = 0;
  std::vector<std::int64_t> Ls;
  std::vector<double> xs, ys;
  detail::EnergyGrid grid;
  double ids_min = 0.0, ids_max = 400.0, ids_step = 0.05, fit_step = 0.25;
  std::string fit = "-4:-1,1:9";
  std::string manifest_in;
  std::vector<int> only;

  auto* bands = app.add_subcommand("bands", "Bands and gaps of the background");
  add_common(bands);
  bands->add_option("--min", lmin, "Lower end of the scan range")->required();
  bands->add_option("--max", lmax, "Upper end of the scan range")->required();
  bands->add_option("--step", step, "Scan step");
  bands->add_option("--edge-tol", edge_tol, "Band-edge tolerance");

  auto* scatter = app.add_subcommand("scatter", "Scattering coefficients at grid energies");
  add_common(scatter);
  grid.add_options(scatter);
  scatter->add_option("--step", step, "Scan step of the band structure");
  scatter->add_option("--edge-tol", edge_tol, "Band-edge tolerance");

  auto* critical = app.add_subcommand("critical", "Exceptional energy set");
  add_common(critical);
  critical->add_option("--min", lmin, "Lower end of the scan range")->required();
  critical->add_option("--max", lmax, "Upper end of the scan range")->required();
  critical->add_option("--step", step, "Scan step");
  critical->add_option("--root-tol", root_tol, "Acceptance level for |b| at a root");
  critical->add_option("--edge-tol", edge_tol, "Band-edge tolerance");

  auto* lyap = app.add_subcommand("lyapunov", "Lyapunov exponent profile");
  add_common(lyap);
  grid.add_options(lyap);
  lyap->add_option("--steps", steps, "Cells per product");
  lyap->add_option("--samples", samples, "Independent products per energy");
  lyap->add_option("--burn-in", burn_in, "Cells applied before the growth rate is measured");

  auto* ids = app.add_subcommand("ids", "Integrated density of states");
  add_common(ids);
  grid.add_options(ids);
  ids->add_option("--L", L, "Box length");
  ids->add_option("--samples", samples, "Sample boxes");

  auto* thouless = app.add_subcommand("thouless", "Thouless identity check");
  add_common(thouless);
  thouless->add_option("--ids-min", ids_min, "First IDS grid energy");
  thouless->add_option("--ids-max", ids_max, "Last IDS grid energy");
  thouless->add_option("--ids-step", ids_step, "IDS grid spacing");
  thouless->add_option("--L", L, "Box length for the IDS");
  thouless->add_option("--samples", samples, "Samples for the IDS and the exponent");
  thouless->add_option("--steps", steps, "Cells per product for the exponent");
  thouless->add_option("--fit", fit, "Fit window as a:b[,c:d...]");
  thouless->add_option("--fit-step", fit_step, "Energy spacing inside the fit window");

  auto* green = app.add_subcommand("green", "Green's function of one sample box");
  add_common(green);
  green->add_option("--L", L, "Box length");
  green->add_option("--lambda", lambda, "Energy")->required();
  green->add_option("--x", xs, "Comma-separated x positions")->delimiter(',')->required();
  green->add_option("--y", ys, "Comma-separated y positions")->delimiter(',')->required();
  green->add_option("--sample-index", sample_index, "Configuration index under the seed");

  auto* goodbox = app.add_subcommand("goodbox", "Good-box fraction");
  add_common(goodbox);
  goodbox->add_option("--lambda", lambda, "Energy")->required();
  goodbox->add_option("--gamma-bar", gamma_bar, "Required decay rate");
  goodbox->add_option("--L", Ls, "Comma-separated box lengths (odd multiples of 3)")->delimiter(',')->required();
  goodbox->add_option("--samples", samples, "Sample boxes per length");

  auto* wegner = app.add_subcommand("wegner", "Wegner fraction");
  add_common(wegner);
  wegner->add_option("--lambda", lambda, "Energy")->required();
  wegner->add_option("--L", Ls, "Comma-separated box lengths")->delimiter(',')->required();
  wegner->add_option("--sigma", sigma, "Window exp(-sigma L^beta)");
  wegner->add_option("--beta", beta, "Exponent in (0, 1)");
  wegner->add_option("--samples", samples, "Sample boxes per length");

  auto* eigdecay = app.add_subcommand("eigdecay", "Eigenfunction decay rates of one sample box");
  add_common(eigdecay);
  eigdecay->add_option("--L", L, "Box length");
  eigdecay->add_option("--min", lmin, "Lower end of the eigenvalue window")->required();
  eigdecay->add_option("--max", lmax, "Upper end of the eigenvalue window")->required();
  eigdecay->add_option("--sample-index", sample_index, "Configuration index under the seed");

  auto* selftest = app.add_subcommand("selftest", "Run the acceptance suite");
  selftest->add_option("--workers", common.workers, "Worker threads");
  selftest->add_option("--tolerance-scale", tolerance_scale, "Multiplies every tolerance (test hook)");
  selftest->add_option("--only", only, "Criterion numbers to run")->delimiter(',');

  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("manifest", manifest_in, "Manifest JSON written by an earlier run")->required();
  replay->add_option("--out", common.out_path, "Output CSV file (default: stdout)");

  // Placeholder values of required options are not defaults.
  for (CLI::App* sub : app.get_subcommands({}))
    for (CLI::Option* opt : sub->get_options())
      if (opt->get_required()) opt->default_str("");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();

  try {
    if (name == "replay") {
      std::ifstream in(manifest_in);
      if (!in) throw InvalidInput("cannot open manifest '" + manifest_in + "'");
      nlohmann::json mf;
      try {
        in >> mf;
      } catch (const nlohmann::json::exception& e) {
        throw InvalidInput("manifest '" + manifest_in + "' is not valid JSON: " + e.what());
      }
      if (!mf.contains("argv") || !mf["argv"].is_array()) throw InvalidInput("manifest '" + manifest_in + "' has no argv");
      std::vector<std::string> stored;
      const auto& argv = mf["argv"];
      for (std::size_t i = 0; i < argv.size(); ++i) {
        const std::string a = argv[i].get<std::string>();
        if (a == "--out" || a == "--manifest") {
          ++i;
          continue;
        }
        stored.push_back(a);
      }
      if (!common.out_path.empty()) {
        stored.push_back("--out");
        stored.push_back(common.out_path);
      }
      return run(stored, out, err);
    }

    if (name == "selftest") {
      AcceptanceOptions o;
      o.tolerance_scale = tolerance_scale;
      o.workers = common.workers;
      o.only = only;
      const auto results = run_acceptance(o);
      print_acceptance(out, results);
      return all_passed(results) ? 0 : 2;
    }

    const std::string started = detail::utc_now();
    std::unique_ptr<std::ofstream> file;
    if (!common.out_path.empty()) {
      file = std::make_unique<std::ofstream>(common.out_path);
      if (!*file) throw InvalidInput("cannot write '" + common.out_path + "'");
    }
    std::ostream& os = file ? *file : out;
    CsvWriter csv(os);
    nlohmann::json results = nlohmann::json::object();
    const ModelConfig model = detail::prepared_model(common);
    const unsigned workers = common.workers;

    if (name == "bands") {
      const BandStructure bs = band_structure(model, lmin, lmax, step, edge_tol);
      struct Row {
        double left, right;
        bool band;
      };
      std::vector<Row> rows;
      for (const Interval& b : bs.bands) rows.push_back({b.left, b.right, true});
      for (const Interval& g : bs.gaps) rows.push_back({g.left, g.right, false});
      for (double t : bs.closed_gaps) rows.push_back({t, t, false});
      std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.left != b.left ? a.left < b.left : a.band < b.band;
      });
      csv.header({"band_index", "kind", "left", "right"});
      std::int64_t nb = 0, ng = 0;
      for (const Row& r : rows) csv.row(r.band ? nb++ : ng++, r.band ? "band" : "gap", r.left, r.right);
      results["bands"] = nb;
      results["gaps"] = ng;
    } else if (name == "scatter") {
      const std::vector<double> g = grid.values();
      const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
      const BandStructure bs = band_structure(model, *lo - 1.0, *hi + 1.0, step, edge_tol);
      csv.header({"lambda", "region", "branch_id", "a_re", "a_im", "b_re", "b_im", "a1", "b1", "a2", "b2"});
      for (double l : g) {
        const double D = discriminant(model, l);
        try {
          if (std::abs(D) < 2.0) {
            const ScatteringCoefficients s = band_coefficients(model, l, bs);
            csv.row(l, "band", s.branch_id, s.a.real(), s.a.imag(), s.b.real(), s.b.imag(), NAN, NAN, NAN, NAN);
          } else {
            const GapCoefficients c = gap_coefficients(model, l, bs);
            csv.row(l, "gap", 0, NAN, NAN, NAN, NAN, c.a1, c.b1, c.a2, c.b2);
          }
        } catch (const TooCloseToEdge&) {
          csv.row(l, "edge", 0, NAN, NAN, NAN, NAN, NAN, NAN, NAN, NAN);
        } catch (const SingularBasis&) {
          csv.row(l, "edge", 0, NAN, NAN, NAN, NAN, NAN, NAN, NAN, NAN);
        }
      }
    } else if (name == "critical") {
      CriticalSetOptions o;
      o.root_tol = root_tol;
      o.edge_tol = edge_tol;
      const CriticalSet cs = critical_set(model, lmin, lmax, step, o);
      csv.header({"lambda", "kind", "residual"});
      for (const CriticalEntry& e : cs.entries) csv.row(e.lambda, to_string(e.kind), e.residual);
      results["entries"] = cs.entries.size();
    } else if (name == "lyapunov") {
      SamplingOptions so;
      so.workers = workers;
      so.burn_in = burn_in;
      const auto prof = lyapunov_profile(model, grid.values(), steps, samples, common.seed, so);
      csv.header({"lambda", "mean", "std_error", "n_steps", "n_samples"});
      for (const LyapunovEstimate& e : prof) csv.row(e.lambda, e.mean, e.std_error, e.n_steps, e.n_samples);
    } else if (name == "ids") {
      const IDSTable t = ids_estimate(model, grid.values(), L, samples, common.seed, workers);
      csv.header({"lambda", "N", "stderr"});
      for (std::size_t i = 0; i < t.values.size(); ++i) csv.row(t.lambda_grid[i], t.values[i], t.std_errors[i]);
    } else if (name == "thouless") {
      const std::vector<Interval> window = detail::parse_intervals(fit);
      if (!(ids_step > 0.0) || !(fit_step > 0.0)) throw InvalidInput("--ids-step and --fit-step must be positive");
      std::vector<double> ids_grid;
      for (std::int64_t i = 0; ids_min + static_cast<double>(i) * ids_step <= ids_max + 1e-9; ++i)
        ids_grid.push_back(ids_min + static_cast<double>(i) * ids_step);
      std::vector<double> energies;
      for (const Interval& iv : window)
        for (std::int64_t i = 0; iv.left + static_cast<double>(i) * fit_step <= iv.right + 1e-9; ++i)
          energies.push_back(iv.left + static_cast<double>(i) * fit_step);
      const IDSTable t = ids_estimate(model, ids_grid, L, samples, common.seed, workers);
      SamplingOptions so;
      so.workers = workers;
      const auto gamma = lyapunov_profile(model, energies, steps, samples, derive_seed(common.seed, 1), so);
      const ThoulessResult th = thouless_check(gamma, t, window);
      csv.header({"lambda", "gamma", "integral", "residual"});
      for (const ThoulessRow& r : th.rows) csv.row(r.lambda, r.gamma, r.integral, r.residual);
      err << "alpha = " << format_number(th.alpha) << ", max_residual = " << format_number(th.max_residual) << "\n";
      if (th.tail_warning) err << "warning: spectrum above the IDS grid may contribute significantly\n";
      results["alpha"] = format_number(th.alpha);
      results["max_residual"] = format_number(th.max_residual);
    } else if (name == "green") {
      const Configuration c = box_configuration(model, L, common.seed, static_cast<std::uint64_t>(sample_index));
      const double half = 0.5 * static_cast<double>(L);
      for (double v : xs)
        if (std::abs(v) > half) throw InvalidInput("--x values must lie in [-L/2, L/2]");
      for (double v : ys)
        if (std::abs(v) > half) throw InvalidInput("--y values must lie in [-L/2, L/2]");
      const BoxSolutions sol(box_potential(model, c, L), lambda);
      csv.header({"x", "y", "G"});
      for (double x : xs)
        for (double y : ys) csv.row(x, y, sol(x, y));
    } else if (name == "goodbox") {
      csv.header({"L", "fraction"});
      for (std::int64_t l : Ls)
        csv.row(l, good_box_probability(model, lambda, gamma_bar, l, samples, common.seed, workers).fraction);
    } else if (name == "wegner") {
      csv.header({"L", "fraction"});
      for (std::int64_t l : Ls)
        csv.row(l, wegner_probability(model, lambda, l, sigma, beta, samples, common.seed, workers).fraction);
    } else if (name == "eigdecay") {
      const Configuration c = box_configuration(model, L, common.seed, static_cast<std::uint64_t>(sample_index));
      const PiecewisePotential box = box_potential(model, c, L);
      csv.header({"eigenvalue", "decay_rate"});
      for (double e : box_eigenvalues(box, lmin, lmax)) csv.row(e, eigenfunction_decay(box, e).decay_rate);
    }

    os.flush();
    std::string manifest_path = common.manifest_path;
    if (manifest_path.empty() && !common.out_path.empty()) manifest_path = common.out_path + ".manifest.json";
    if (!manifest_path.empty()) {
      nlohmann::json params = nlohmann::json::object();
      for (const CLI::Option* opt : sub->get_options()) {
        if (opt->count() == 0 || opt->get_name() == "--help") continue;
        params[opt->get_name()] = opt->results();
      }
      const nlohmann::json mf{{"subcommand", name},
                              {"model_path", common.model_path},
                              {"parameters", params},
                              {"master_seed", common.seed},
                              {"tool_version", kVersion},
                              {"argv", original},
                              {"started", started},
                              {"finished", detail::utc_now()},
                              {"results", results}};
      std::ofstream mfs(manifest_path);
      if (!mfs) throw InvalidInput("cannot write manifest '" + manifest_path + "'");
      mfs << mf.dump(2) << '\n';
    }
    return 0;
  } catch (const Error& e) {
    err << e.name() << ": " << e.message() << "\n";
    return e.is_numeric() ? 2 : 1;
  }
}

}  // namespace alloy1d::cli
