#include "tvparcor/cli.hpp"

#include "CLI11.hpp"
#include "tvparcor/errors.hpp"
#include "tvparcor/forecast.hpp"
#include "tvparcor/io.hpp"
#include "tvparcor/sim.hpp"
#include "tvparcor/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

namespace tvparcor::cli {

namespace {

using io::json;
namespace fs = std::filesystem;

struct Settings {
  std::string config;
  std::string series;
  std::string out;
  double grid_lo = 0.99;
  double grid_hi = 1.0;
  double grid_step = 0.001;
  double delta_f = 0.0;  // > 0 fixes the forward discount instead of searching
  double delta_b = 0.0;
  double c0 = 1.0;
  double n0 = 1.0;
  std::string s0 = "sample";
  double s0_scale = 1.0;
  double m0 = 0.0;
  int samples = 200;
  std::uint64_t seed = 0;
  std::string covariances = "auto";
  int order = 1;
  int p_max = 5;
  // spectra
  std::string bundle;
  int freqs = 200;
  std::string pairs;
  bool partial = false;
  int bands = 0;
  int t_stride = 1;
  std::string quantiles = "0.05,0.5,0.95";
  // forecast
  int horizon = 1;
  int paths = 1000;
  double interval = 0.0;
  // simulate
  std::string scenario = "bivar-tvvar2";
  double phi112 = 0.0;
  int t_len = 1024;
  int burn_in = 200;
  // ase / bench
  std::vector<std::string> estimate;
  std::vector<std::string> truth;
  std::string entries;
  std::string orders = "1,2,3";
  int repeats = 5;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not a number list: '" + s + "'");
    }
  }
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_doubles(s)) {
    if (v != std::floor(v)) throw UsageError("not an integer list: '" + s + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// "1,2;3,4" → {(0,1), (2,3)}
std::vector<std::pair<int, int>> parse_pairs(const std::string& s, int k) {
  std::vector<std::pair<int, int>> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto v = parse_ints(item);
    if (v.size() != 2 || v[0] < 1 || v[1] < 1 || v[0] > k || v[1] > k) {
      throw UsageError("bad pair '" + item + "' for " + std::to_string(k) + " components");
    }
    out.emplace_back(v[0] - 1, v[1] - 1);
  }
  return out;
}

std::vector<double> parse_probs(const std::string& s) {
  auto p = parse_doubles(s);
  if (p.empty()) throw UsageError("empty quantile list");
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError("quantiles must lie in [0, 1]");
  }
  if (!std::is_sorted(p.begin(), p.end())) throw UsageError("quantiles must be increasing");
  return p;
}

// Effective configuration of a subcommand, minus output locations.
json effective_config(const CLI::App& sub) {
  json j = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "out" || name == "config" ||
        name == "series") {
      continue;
    }
    std::vector<std::string> vals = opt->results();
    if (vals.empty()) {
      if (opt->get_expected_min() == 0) {
        j[name] = false;
        continue;
      }
      const std::string d = opt->get_default_str();
      if (d.empty()) continue;
      vals = {d};
    }
    if (opt->get_expected_min() == 0) {
      j[name] = true;
      continue;
    }
    json arr = json::array();
    for (const auto& v : vals) {
      char* end = nullptr;
      const long long n = std::strtoll(v.c_str(), &end, 10);
      if (!v.empty() && end == v.c_str() + v.size()) {
        arr.push_back(n);
        continue;
      }
      const double d = std::strtod(v.c_str(), &end);
      if (!v.empty() && end == v.c_str() + v.size()) {
        arr.push_back(d);
      } else {
        arr.push_back(v);
      }
    }
    j[name] = arr.size() == 1 ? arr[0] : arr;
  }
  return j;
}

mdlm::PriorSpec make_prior(const Settings& s, const TimeSeries& x, int state_dim) {
  Matrix s0 = s.s0 == "sample" ? x.sample_covariance() : Matrix::Identity(x.k(), x.k());
  s0 *= s.s0_scale;
  auto p = mdlm::PriorSpec::standard(state_dim, s0, s.c0, s.n0, s.m0);
  p.validate(state_dim, x.k());
  return p;
}

bool keep_covariances(const Settings& s, int k, int t_len) {
  if (s.covariances == "full") return true;
  if (s.covariances == "none") return false;
  const double k2 = static_cast<double>(k) * k;
  return k2 * k2 * t_len <= 2e7;
}

std::vector<double> make_grid(const Settings& s) {
  return selection::make_grid(s.grid_lo, s.grid_hi, s.grid_step);
}

void print_selection(std::ostream& out, const selection::SelectionReport& r, bool dic) {
  out << "order  delta_f  delta_b  loglik_f      loglik_b";
  if (dic) out << "      p_dic_cum  dic";
  out << '\n';
  for (const auto& e : r.entries) {
    char line[256];
    std::snprintf(line, sizeof line, "%5d  %.4f   %.4f   %-12.4f  %-12.4f", e.order, e.delta_f,
                  e.delta_b, e.loglik_f, e.loglik_b);
    out << line;
    if (dic) {
      std::snprintf(line, sizeof line, "  %-10.3f %.4f", e.p_dic_cum, e.dic);
      out << line;
    }
    out << '\n';
  }
}

json series_info(const Settings& s) {
  return {{"file", fs::path(s.series).filename().string()},
          {"sha256", io::sha256_hex(io::read_file(s.series))}};
}

// ---- commands ---------------------------------------------------------------

int cmd_simulate(const Settings& s, std::ostream& out) {
  sim::ScenarioSpec spec;
  spec.kind = sim::parse_kind(s.scenario);
  if (spec.kind == sim::ScenarioKind::Custom) throw UsageError("custom scenarios are library-only");
  spec.t_len = s.t_len;
  spec.seed = s.seed;
  spec.phi112 = s.phi112;
  spec.burn_in = s.burn_in;
  const auto result = sim::generate(spec);
  const auto& c = result.truth.coeffs;

  io::TensorSet set;
  io::Tensor coeffs{"coefficients", {c.range.size(), c.order, c.k, c.k}, {}, json::object()};
  for (const auto& at : c.forward)
    for (const auto& a : at)
      for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) coeffs.data.push_back(a(i, j));
  coeffs.attrs = {{"layout", "[t][j-1][i][l] = A_{t,j}(i,l)"}};
  set.add(std::move(coeffs));
  set.add(io::from_matrix("sigma", result.truth.sigma));
  auto [payload, index] = io::encode(set, "truth.bin");

  const fs::path dir(s.out);
  const std::string csv = io::format_series(result.series);
  json manifest = {{"format", "tvparcor-simulation"},
                   {"version", 1},
                   {"scenario", sim::to_string(spec.kind)},
                   {"t_len", spec.t_len},
                   {"k", c.k},
                   {"order", c.order},
                   {"seed", spec.seed},
                   {"phi112", spec.phi112},
                   {"burn_in", spec.burn_in},
                   {"series", {{"file", "series.csv"}, {"sha256", io::sha256_hex(csv)}}},
                   {"payload", index}};
  io::write_atomic(dir / "series.csv", csv);
  io::write_atomic(dir / "truth.bin", payload);
  io::write_json(dir / "manifest.json", manifest);
  out << "simulated " << sim::to_string(spec.kind) << ": T=" << spec.t_len << " K=" << c.k
      << " seed=" << spec.seed << " -> " << dir.string() << '\n';
  return 0;
}

sim::ScenarioTruth load_truth(const fs::path& dir) {
  const json m = io::read_json(dir / "manifest.json");
  const auto set = io::decode(io::read_file(dir / "truth.bin"), m.at("payload"));
  const auto& t = set.get("coefficients");
  if (t.shape.size() != 4) throw Error(ErrorCode::IntegrityError, "bad truth tensor");
  sim::ScenarioTruth truth;
  truth.coeffs.order = static_cast<int>(t.shape[1]);
  truth.coeffs.k = static_cast<int>(t.shape[2]);
  truth.coeffs.range = {0, static_cast<int>(t.shape[0]) - 1};
  const int k = truth.coeffs.k;
  std::size_t p = 0;
  for (std::int64_t ti = 0; ti < t.shape[0]; ++ti) {
    std::vector<Matrix> at;
    for (int j = 0; j < truth.coeffs.order; ++j) {
      Matrix a(k, k);
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) a(r, c) = t.data[p++];
      at.push_back(std::move(a));
    }
    truth.coeffs.forward.push_back(std::move(at));
  }
  truth.sigma = io::to_matrix(set.get("sigma"));
  return truth;
}

int cmd_fit(const Settings& s, const CLI::App& sub, bool select_order, std::ostream& out) {
  const TimeSeries x = io::read_series(s.series);
  x.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto prior = make_prior(s, x, x.k() * x.k());
  lattice::LatticeOptions lo;
  lo.keep_covariances = keep_covariances(s, x.k(), x.t_len());

  io::FitBundle bundle;
  bundle.config = effective_config(sub);
  bundle.config["command"] = select_order ? "select" : "fit";
  bundle.config["input"] = series_info(s);

  if (!select_order && (s.delta_f > 0.0 || s.delta_b > 0.0)) {
    const double df = s.delta_f > 0.0 ? s.delta_f : 1.0;
    const double db = s.delta_b > 0.0 ? s.delta_b : 1.0;
    bundle.parcor = lattice::fit(x, s.order, prior, df, db, lo);
    out << "fit: order " << s.order << " with fixed discounts " << df << " / " << db << '\n';
  } else {
    selection::SelectOptions so;
    so.n_samples = s.samples;
    so.seed = s.seed;
    so.compute_dic = select_order;
    so.lattice = lo;
    auto res = selection::select(x, select_order ? s.p_max : s.order, make_grid(s), prior, so);
    print_selection(out, res.report, select_order);
    bundle.parcor = std::move(res.fit);
    bundle.selection = std::move(res.report);
    out << (select_order ? "chosen order " : "fitted order ") << bundle.parcor->order << '\n';
  }
  bundle.parcor->labels = x.labels;
  bundle.timings = {{"fit_seconds", seconds_since(t0)}};
  io::save_bundle(s.out, bundle);
  out << "bundle -> " << s.out << '\n';
  return 0;
}

int cmd_baseline(const Settings& s, const CLI::App& sub, std::ostream& out) {
  const TimeSeries x = io::read_series(s.series);
  x.validate();
  baseline::BaselineOptions bo;
  bo.keep_covariances = s.covariances == "full";
  const auto prior = make_prior(s, x, s.order * x.k() * x.k());
  auto fit = baseline::fit_tvvar_dlm(x, s.order, prior, make_grid(s), bo);
  io::FitBundle bundle;
  bundle.config = effective_config(sub);
  bundle.config["command"] = "baseline-fit";
  bundle.config["input"] = series_info(s);
  bundle.timings = {{"baseline_fit_seconds", fit.wall_clock}};
  out << "baseline TV-VAR(" << fit.order << "): discount " << fit.discount << ", loglik "
      << fit.loglik << ", " << fit.wall_clock << " s\n";
  bundle.tvvar = std::move(fit);
  io::save_bundle(s.out, bundle);
  out << "bundle -> " << s.out << '\n';
  return 0;
}

io::Tensor grid_tensor(const std::string& name, const spectral::RealGrid& g) {
  return io::from_matrix(name, g.values);
}

int cmd_spectra(const Settings& s, std::ostream& out) {
  const auto bundle = io::load_bundle(s.bundle);
  const auto [coeffs, sigma] = io::bundle_coefficients(bundle);
  const int k = coeffs.k;
  if (s.freqs < 1) throw UsageError("--freqs must be positive");
  const auto grid = spectral::FrequencyGrid::uniform(s.freqs);
  spectral::SpectralOptions so;
  so.t_stride = s.t_stride;
  const auto field = spectral::spectral_matrix(coeffs, SymMatrix(sigma), grid, so);

  std::vector<std::pair<int, int>> pairs;
  std::vector<int> diag;
  if (s.pairs.empty()) {
    for (int i = 0; i < k; ++i) {
      diag.push_back(i);
      for (int j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
    }
  } else {
    pairs = parse_pairs(s.pairs, k);
    for (auto [i, j] : pairs) {
      if (i == j) throw UsageError("a pair needs two distinct components");
      for (int c : {i, j})
        if (std::find(diag.begin(), diag.end(), c) == diag.end()) diag.push_back(c);
    }
    std::sort(diag.begin(), diag.end());
  }

  io::TensorSet set;
  std::vector<double> times(field.times.begin(), field.times.end());
  set.add(io::from_doubles("times", times));
  set.add(io::from_doubles("omegas", grid.omegas));
  std::size_t clamps = 0;
  for (int i : diag) set.add(grid_tensor("log_g" + spectral::entry_label(i, i), spectral::log_spectrum(field, i)));
  for (auto [i, j] : pairs) {
    auto g = spectral::coherence(field, i, j);
    clamps += g.clamp_events;
    set.add(grid_tensor("rho2_" + spectral::entry_label(i, j), g));
  }
  if (s.partial) {
    const auto gs = spectral::partial_coherences(field, pairs);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      clamps += gs[p].clamp_events;
      set.add(grid_tensor("gamma2_" + spectral::entry_label(pairs[p].first, pairs[p].second), gs[p]));
    }
  }
  const auto diag_info = spectral::diagnose(field);
  json meta = {{"format", "tvparcor-spectra"},
               {"version", 1},
               {"k", k},
               {"source", bundle.kind()},
               {"times", {field.times.front(), field.times.back()}},
               {"t_stride", s.t_stride},
               {"grid_size", grid.size()},
               {"clamp_events", clamps},
               {"diagnostics",
                {{"max_hermitian_deviation", io::number(diag_info.max_hermitian_deviation)},
                 {"min_eigenvalue", io::number(diag_info.min_eigenvalue)},
                 {"min_diagonal", io::number(diag_info.min_diagonal)}}}};

  if (s.bands > 0) {
    if (!bundle.parcor) throw Error(ErrorCode::NotSmoothed, "bands need a PARCOR bundle");
    const auto probs = parse_probs(s.quantiles);
    const auto b = spectral::spectral_bands(*bundle.parcor, grid, s.bands, s.seed, probs, so);
    for (const auto& q : b.quantities) {
      io::Tensor t{"bands/" + q.name,
                   {static_cast<std::int64_t>(probs.size()), static_cast<std::int64_t>(b.times.size()),
                    static_cast<std::int64_t>(grid.size())},
                   {},
                   {{"probs", probs}}};
      for (const auto& m : q.quantiles) {
        const auto tm = io::from_matrix("", m);
        t.data.insert(t.data.end(), tm.data.begin(), tm.data.end());
      }
      set.add(std::move(t));
    }
    meta["bands"] = {{"n_samples", s.bands}, {"seed", s.seed}, {"probs", probs},
                     {"clamp_events", b.clamp_events}};
  }
  io::save_container(s.out, "spectra", set, meta);
  out << "spectra: " << field.times.size() << " times x " << grid.size() << " frequencies, K=" << k
      << (s.bands > 0 ? ", with bands" : "") << " -> " << s.out << '\n';
  return 0;
}

int cmd_forecast(const Settings& s, std::ostream& out) {
  const auto bundle = io::load_bundle(s.bundle);
  if (!bundle.parcor) throw Error(ErrorCode::InvalidArgument, "forecasting needs a PARCOR bundle");
  const TimeSeries x = io::read_series(s.series);
  const auto probs = parse_probs(s.quantiles);
  const auto fc = forecast::forecast_path(*bundle.parcor, x, s.horizon, s.paths, s.seed, probs);
  const int k = x.k();
  if (fc.has_bands) {
    for (std::size_t q = 1; q < fc.bands.size(); ++q)
      for (int h = 0; h < fc.horizon; ++h)
        for (int i = 0; i < k; ++i)
          if (fc.bands[q][static_cast<std::size_t>(h)](i) < fc.bands[q - 1][static_cast<std::size_t>(h)](i)) {
            throw Error(ErrorCode::NonFiniteState, "forecast quantiles are not nested");
          }
  }
  io::TensorSet set;
  set.add(io::from_vectors("point", fc.point));
  if (fc.has_bands) {
    io::Tensor t{"bands", {static_cast<std::int64_t>(probs.size()), fc.horizon, k}, {}, {{"probs", probs}}};
    for (const auto& q : fc.bands)
      for (const auto& v : q) t.data.insert(t.data.end(), v.data(), v.data() + v.size());
    set.add(std::move(t));
  }
  json meta = {{"format", "tvparcor-forecast"}, {"version", 1},       {"horizon", fc.horizon},
               {"k", k},                        {"probs", probs},     {"n_samples", fc.n_samples},
               {"seed", fc.seed},               {"explosive_paths", fc.explosive_paths},
               {"labels", x.labels}};
  if (s.interval > 0.0) meta["horizon_time"] = s.interval * fc.horizon;
  io::save_container(s.out, "forecast", set, meta);
  out << "forecast: " << fc.horizon << " steps, K=" << k;
  if (fc.has_bands) out << ", bands from " << fc.n_samples - static_cast<int>(fc.explosive_paths) << " paths";
  if (fc.explosive_paths) out << " (" << fc.explosive_paths << " explosive paths dropped)";
  out << " -> " << s.out << '\n';
  return 0;
}

struct StoredGrids {
  std::vector<int> times;
  spectral::FrequencyGrid grid;
  std::map<std::string, Matrix> values;
};

StoredGrids load_spectra(const fs::path& dir) {
  auto [meta, set] = io::load_container(dir, "spectra");
  StoredGrids g;
  for (double t : set.get("times").data) g.times.push_back(static_cast<int>(t));
  g.grid.omegas = set.get("omegas").data;
  for (const auto& t : set.tensors()) {
    if (t.shape.size() == 2) g.values.emplace(t.name, io::to_matrix(t));
  }
  return g;
}

// Truth grids for the estimate's times and frequencies, from a simulation
// directory or from another spectra directory.
StoredGrids load_truth_grids(const fs::path& dir, const StoredGrids& est) {
  if (!fs::exists(dir / "manifest.json")) return load_spectra(dir);
  const auto truth = load_truth(dir);
  const auto field = sim::true_spectrum(truth, est.grid, est.times);
  StoredGrids g{est.times, est.grid, {}};
  for (int i = 0; i < field.k; ++i) {
    g.values.emplace("log_g" + spectral::entry_label(i, i), spectral::log_spectrum(field, i).values);
    for (int j = i + 1; j < field.k; ++j) {
      g.values.emplace("rho2_" + spectral::entry_label(i, j), spectral::coherence(field, i, j).values);
    }
  }
  return g;
}

int cmd_ase(const Settings& s, std::ostream& out) {
  if (s.estimate.size() != s.truth.size() && s.truth.size() != 1) {
    throw UsageError("--truth takes one directory or one per --estimate directory");
  }
  std::vector<std::string> names;
  if (!s.entries.empty()) {
    std::stringstream ss(s.entries);
    std::string item;
    while (std::getline(ss, item, ';')) {
      const auto v = parse_ints(item);
      if (v.size() != 2 || v[0] < 1 || v[1] < 1) throw UsageError("bad entry '" + item + "'");
      const std::string lab = spectral::entry_label(v[0] - 1, v[1] - 1);
      names.push_back(v[0] == v[1] ? "log_g" + lab : "rho2_" + lab);
    }
  }
  std::map<std::string, std::vector<double>> scores;
  for (std::size_t r = 0; r < s.estimate.size(); ++r) {
    const auto est = load_spectra(s.estimate[r]);
    const auto tru = load_truth_grids(s.truth.size() == 1 ? s.truth[0] : s.truth[r], est);
    std::vector<std::string> use = names;
    if (use.empty()) {
      for (const auto& [name, _] : est.values)
        if (name.rfind("log_g", 0) == 0 || name.rfind("rho2_", 0) == 0) use.push_back(name);
    }
    for (const auto& name : use) {
      const auto e = est.values.find(name);
      const auto t = tru.values.find(name);
      if (e == est.values.end() || t == tru.values.end()) {
        throw Error(ErrorCode::RangeMismatch, "grid " + name + " missing from estimate or truth");
      }
      const spectral::RealGrid ge{est.times, est.grid, e->second, 0};
      const spectral::RealGrid gt{tru.times, tru.grid, t->second, 0};
      scores[name].push_back(sim::ase_grid(ge, gt));
    }
  }
  json table = json::object();
  out << "entry        mean          sd            n\n";
  for (const auto& [name, v] : scores) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    table[name] = {{"values", v}, {"mean", mean}, {"sd", sd}};
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %-13.6g %-13.6g %zu\n", name.c_str(), mean, sd, v.size());
    out << line;
  }
  if (!s.out.empty()) io::write_json(fs::path(s.out) / "ase.json", {{"entries", table}});
  return 0;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_bench(const Settings& s, std::ostream& out) {
  const TimeSeries x = io::read_series(s.series);
  x.validate();
  if (s.repeats < 1) throw UsageError("--repeats must be positive");
  const auto orders = parse_ints(s.orders);
  const auto grid = make_grid(s);
  const int k = x.k();
  json rows = json::array();
  out << "order  parcor_s     tvvar_s      ratio\n";
  for (int p : orders) {
    if (p < 1) throw UsageError("orders must be positive");
    std::vector<double> tp, tv;
    for (int r = 0; r < s.repeats; ++r) {
      // Both pipelines fit every order up to p, as order selection requires.
      auto t0 = std::chrono::steady_clock::now();
      selection::SelectOptions so;
      so.compute_dic = false;
      so.lattice.keep_covariances = false;
      selection::select(x, p, grid, make_prior(s, x, k * k), so);
      tp.push_back(seconds_since(t0));
      t0 = std::chrono::steady_clock::now();
      for (int q = 1; q <= p; ++q) baseline::fit_tvvar_dlm(x, q, make_prior(s, x, q * k * k), grid);
      tv.push_back(seconds_since(t0));
    }
    const double mp = median(tp), mv = median(tv);
    rows.push_back({{"order", p}, {"parcor_seconds", tp}, {"tvvar_seconds", tv},
                    {"parcor_median", mp}, {"tvvar_median", mv}, {"ratio", mv / mp}});
    char line[160];
    std::snprintf(line, sizeof line, "%5d  %-11.4f  %-11.4f  %.3f\n", p, mp, mv, mv / mp);
    out << line;
  }
  if (!s.out.empty()) {
    io::write_json(fs::path(s.out) / "bench.json",
                   {{"series", fs::path(s.series).filename().string()},
                    {"repeats", s.repeats}, {"grid", grid}, {"orders", rows}});
  }
  return 0;
}

// ---- argument plumbing ------------------------------------------------------

void add_fit_options(CLI::App* sub, Settings& s) {
  sub->add_option("--series,-i", s.series, "Input series (delimited text)")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--out,-o", s.out, "Output directory")->required();
  sub->add_option("--grid-lo", s.grid_lo, "Smallest discount in the grid")->capture_default_str();
  sub->add_option("--grid-hi", s.grid_hi, "Largest discount in the grid")->capture_default_str();
  sub->add_option("--grid-step", s.grid_step, "Discount grid step")->capture_default_str();
  sub->add_option("--c0", s.c0, "Prior state covariance scale, C0 = c0 I")->capture_default_str();
  sub->add_option("--n0", s.n0, "Prior degrees of freedom")->capture_default_str();
  sub->add_option("--s0", s.s0, "Prior noise covariance: sample or identity")
      ->check(CLI::IsMember({"sample", "identity"}))
      ->capture_default_str();
  sub->add_option("--s0-scale", s.s0_scale, "Multiplier applied to S0")->capture_default_str();
  sub->add_option("--m0", s.m0, "Prior state mean (every component)")->capture_default_str();
  sub->add_option("--seed", s.seed, "Random seed")->capture_default_str();
}

void add_cov_option(CLI::App* sub, Settings& s) {
  sub->add_option("--covariances", s.covariances, "Keep smoothed covariances: auto, full or none")
      ->check(CLI::IsMember({"auto", "full", "none"}))
      ->capture_default_str();
}

std::string flag_token(const std::string& key) {
  std::string k = key;
  std::replace(k.begin(), k.end(), '_', '-');
  return "--" + k;
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

std::vector<std::string> config_tokens(const json& v, const std::string& flag) {
  if (v.is_boolean()) return v.get<bool>() ? std::vector<std::string>{flag} : std::vector<std::string>{};
  auto scalar = [](const json& x) {
    if (x.is_string()) return x.get<std::string>();
    if (x.is_number_integer()) return std::to_string(x.get<long long>());
    if (x.is_number()) return io::format_double(x.get<double>());
    throw UsageError("unsupported config value " + x.dump());
  };
  if (v.is_array()) {
    std::vector<std::string> out{flag};
    for (const auto& x : v) out.push_back(scalar(x));
    return out;
  }
  return {flag, scalar(v)};
}

// Settings from the JSON config go in front of the command-line flags that are
// not already present; flags given on the command line win.
std::vector<std::string> merge_config(const std::vector<std::string>& args, CLI::App& app,
                                      std::ostream& err) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[0]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  json cfg;
  try {
    cfg = io::read_json(path);
  } catch (const Error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config must be a JSON object");
  std::vector<std::string> merged{args[0]};
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = flag_token(key);
    if (!sub->get_option_no_throw(flag)) {
      err << "warning: config key '" << key << "' does not apply to " << args[0] << '\n';
      continue;
    }
    if (given(args, flag)) continue;
    for (auto& tok : config_tokens(value, flag)) merged.push_back(std::move(tok));
  }
  merged.insert(merged.end(), args.begin() + 1, args.end());
  return merged;
}

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::ParseError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::NonFiniteInput:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Time-varying vector PARCOR models: fitting, order selection, spectra and forecasts",
               "tvparcor"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tvparcor 1.0");

  auto* simulate = app.add_subcommand("simulate", "Simulate a scenario with known spectra");
  simulate->add_option("--scenario", s.scenario, "bivar-tvvar2 or twenty-dim")
      ->check(CLI::IsMember({"bivar-tvvar2", "twenty-dim"}))
      ->capture_default_str();
  simulate->add_option("--phi112", s.phi112, "Cross-coupling of the bivariate design")->capture_default_str();
  simulate->add_option("--t", s.t_len, "Series length")->capture_default_str();
  simulate->add_option("--burn-in", s.burn_in, "Burn-in steps")->capture_default_str();
  simulate->add_option("--seed", s.seed, "Random seed")->capture_default_str();
  simulate->add_option("--out,-o", s.out, "Output directory")->required();

  auto* fit = app.add_subcommand("fit", "Fit a TV-VPARCOR model of fixed order");
  add_fit_options(fit, s);
  add_cov_option(fit, s);
  fit->add_option("--order,-p", s.order, "Model order")->required();
  fit->add_option("--delta-f", s.delta_f, "Fixed forward discount (skips the grid search)");
  fit->add_option("--delta-b", s.delta_b, "Fixed backward discount (skips the grid search)");

  auto* select = app.add_subcommand("select", "Choose the model order by DIC and fit it");
  add_fit_options(select, s);
  add_cov_option(select, s);
  select->add_option("--p-max", s.p_max, "Largest order considered")->capture_default_str();
  select->add_option("--samples", s.samples, "Monte-Carlo draws for p_DIC")->capture_default_str();

  auto* spectra = app.add_subcommand("spectra", "Spectral grids from a fit bundle");
  spectra->add_option("--bundle,-b", s.bundle, "Fit bundle directory")->required()->check(CLI::ExistingDirectory);
  spectra->add_option("--out,-o", s.out, "Output directory")->required();
  spectra->add_option("--freqs", s.freqs, "Number of frequencies in (0, 1/2)")->capture_default_str();
  spectra->add_option("--pairs", s.pairs, "Component pairs, e.g. 1,2;1,3 (default: all)");
  spectra->add_flag("--partial", s.partial, "Also emit squared partial coherences");
  spectra->add_option("--bands", s.bands, "Monte-Carlo draws for quantile bands (0: none)")->capture_default_str();
  spectra->add_option("--quantiles", s.quantiles, "Band probabilities")->capture_default_str();
  spectra->add_option("--t-stride", s.t_stride, "Evaluate every n-th time point")->capture_default_str();
  spectra->add_option("--seed", s.seed, "Random seed")->capture_default_str();

  auto* fc = app.add_subcommand("forecast", "h-step forecasts from a fit bundle");
  fc->add_option("--bundle,-b", s.bundle, "Fit bundle directory")->required()->check(CLI::ExistingDirectory);
  fc->add_option("--series,-i", s.series, "Series the bundle was fitted to")->required()->check(CLI::ExistingFile);
  fc->add_option("--out,-o", s.out, "Output directory")->required();
  fc->add_option("--horizon,-H", s.horizon, "Steps ahead")->capture_default_str();
  fc->add_option("--samples", s.paths, "Simulated paths for the bands (0: point only)")->capture_default_str();
  fc->add_option("--quantiles", s.quantiles, "Band probabilities")->capture_default_str();
  fc->add_option("--interval", s.interval, "Sampling interval, recorded as metadata");
  fc->add_option("--seed", s.seed, "Random seed")->capture_default_str();

  auto* base = app.add_subcommand("baseline-fit", "Fit the direct TV-VAR state-space model");
  add_fit_options(base, s);
  base->add_option("--order,-p", s.order, "Model order")->required();
  base->add_option("--covariances", s.covariances, "Keep smoothed covariances: none or full")
      ->check(CLI::IsMember({"auto", "full", "none"}))
      ->capture_default_str();

  auto* ase = app.add_subcommand("ase", "Average squared error of spectra against the truth");
  ase->add_option("--estimate,-e", s.estimate, "Spectra directories")->required()->delimiter(',');
  ase->add_option("--truth,-t", s.truth, "Simulation or spectra directories")->required()->delimiter(',');
  ase->add_option("--entries", s.entries, "Matrix entries, e.g. 1,1;2,2;1,2 (default: all stored)");
  ase->add_option("--out,-o", s.out, "Directory for ase.json");

  auto* bench = app.add_subcommand("bench", "Wall-clock of the PARCOR and TV-VAR pipelines");
  add_fit_options(bench, s);
  bench->get_option("--out")->required(false);
  bench->add_option("--orders", s.orders, "Orders to time")->capture_default_str();
  bench->add_option("--repeats", s.repeats, "Repeats per order (median reported)")->capture_default_str();

  for (auto* sub : app.get_subcommands({})) {
    sub->add_option("--config", s.config, "JSON file of option values; flags override it");
  }

  std::vector<std::string> argv;
  try {
    argv = merge_config(args, app, err);
    std::vector<std::string> rev(argv.rbegin(), argv.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    if (name == "simulate") return cmd_simulate(s, out);
    if (name == "fit") return cmd_fit(s, *sub, false, out);
    if (name == "select") return cmd_fit(s, *sub, true, out);
    if (name == "spectra") return cmd_spectra(s, out);
    if (name == "forecast") return cmd_forecast(s, out);
    if (name == "baseline-fit") return cmd_baseline(s, *sub, out);
    if (name == "ase") return cmd_ase(s, out);
    if (name == "bench") return cmd_bench(s, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace tvparcor::cli
