#include "tvparcor/sim.hpp"

#include "tvparcor/errors.hpp"
#include "tvparcor/rng.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>

namespace tvparcor::sim {

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::BivarTvvar2: return "bivar-tvvar2";
    case ScenarioKind::TwentyDimTvvar1: return "twenty-dim";
    case ScenarioKind::Custom: return "custom";
  }
  return "unknown";
}

ScenarioKind parse_kind(const std::string& name) {
  if (name == "bivar-tvvar2" || name == "bivar_tvvar2") return ScenarioKind::BivarTvvar2;
  if (name == "twenty-dim" || name == "twenty_dim_tvvar1") return ScenarioKind::TwentyDimTvvar1;
  if (name == "custom") return ScenarioKind::Custom;
  throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + name + "'");
}

void ScenarioSpec::validate() const {
  if (t_len < 10) throw Error(ErrorCode::InvalidArgument, "t_len must be >= 10");
  if (burn_in < 0) throw Error(ErrorCode::InvalidArgument, "burn_in must be >= 0");
  if (!std::isfinite(phi112)) throw Error(ErrorCode::NonFiniteInput, "phi112 is not finite");
  if (kind == ScenarioKind::Custom) {
    if (!custom) throw Error(ErrorCode::InvalidArgument, "custom scenario needs coefficients");
    const auto& c = custom->coeffs;
    if (c.range.lo != 0 || c.range.hi != t_len - 1 ||
        static_cast<int>(c.forward.size()) != t_len) {
      throw Error(ErrorCode::DimensionMismatch, "custom coefficients must cover [0, t_len-1]");
    }
    if (custom->sigma.rows() != c.k || custom->sigma.cols() != c.k) {
      throw Error(ErrorCode::DimensionMismatch, "custom sigma dimension");
    }
  }
}

namespace {

ScenarioTruth bivariate(int t_len, double phi112) {
  ScenarioTruth truth;
  truth.coeffs.order = 2;
  truth.coeffs.k = 2;
  truth.coeffs.range = {0, t_len - 1};
  truth.sigma = Matrix::Identity(2, 2);
  const double n = t_len;
  const double two_pi = 2.0 * std::numbers::pi;
  for (int idx = 0; idx < t_len; ++idx) {
    const double t = idx + 1;
    const double r1 = 0.1 / n * t + 0.85;
    const double r2 = -0.1 / n * t + 0.95;
    const double l1 = 15.0 / n * t + 5.0;
    const double l2 = -10.0 / n * t + 15.0;
    Matrix a1(2, 2), a2(2, 2);
    a1 << r1 * std::cos(two_pi / l1), phi112, 0.0, r2 * std::cos(two_pi / l2);
    a2 << -r1 * r1, 0.0, 0.0, -r2 * r2;
    truth.coeffs.forward.push_back({a1, a2});
  }
  return truth;
}

ScenarioTruth twenty_dim(int t_len) {
  constexpr int k = 20;
  ScenarioTruth truth;
  truth.coeffs.order = 1;
  truth.coeffs.k = k;
  truth.coeffs.range = {0, t_len - 1};
  truth.sigma = 0.1 * Matrix::Identity(k, k);
  const double slope = 0.2 / (t_len - 1);
  for (int idx = 0; idx < t_len; ++idx) {
    const double t = idx + 1;
    Matrix a = Matrix::Zero(k, k);
    for (int i = 0; i < 10; ++i) a(i, i) = 0.7 + slope * t;
    for (int i = 10; i < k; ++i) a(i, i) = -0.95 + slope * t;
    a(0, 4) = 0.9;
    a(1, 14) = 0.9;
    a(5, 11) = -0.9;
    a(14, 19) = -0.9;
    truth.coeffs.forward.push_back({a});
  }
  return truth;
}

}  // namespace

ScenarioTruth scenario_truth(const ScenarioSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case ScenarioKind::BivarTvvar2: return bivariate(spec.t_len, spec.phi112);
    case ScenarioKind::TwentyDimTvvar1: return twenty_dim(spec.t_len);
    case ScenarioKind::Custom: return *spec.custom;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scenario");
}

Simulation generate(const ScenarioSpec& spec) {
  Simulation out;
  out.truth = scenario_truth(spec);
  const auto& c = out.truth.coeffs;
  const int k = c.k;
  const auto p = static_cast<std::size_t>(c.order);
  const Matrix root = linalg::sym_sqrt(out.truth.sigma);
  auto eng = rng::derive(spec.seed, rng::Stream::Simulation, {});

  std::vector<Vector> hist(p, Vector::Zero(k));
  auto advance = [&](const std::vector<Matrix>& a) {
    Vector x = root * rng::standard_normal(eng, k);
    for (std::size_t j = 1; j <= p; ++j) x += a[j - 1] * hist[hist.size() - j];
    hist.push_back(x);
    return x;
  };
  for (int s = 0; s < spec.burn_in; ++s) {
    advance(c.forward.front());
    hist.erase(hist.begin());
  }
  Matrix values(spec.t_len, k);
  for (int t = 0; t < spec.t_len; ++t) {
    values.row(t) = advance(c.forward[static_cast<std::size_t>(t)]).transpose();
    hist.erase(hist.begin());
  }
  out.series = TimeSeries(std::move(values));
  for (int i = 1; i <= k; ++i) out.series.labels.push_back("x" + std::to_string(i));
  return out;
}

spectral::SpectralField true_spectrum(const ScenarioTruth& truth, const spectral::FrequencyGrid& grid,
                                      const std::vector<int>& times) {
  grid.validate();
  spectral::SpectralField f;
  f.k = truth.coeffs.k;
  f.grid = grid;
  f.times = times;
  f.sigma_used = truth.sigma;
  f.g.reserve(times.size() * grid.size());
  for (int t : times) {
    if (!truth.coeffs.range.contains(t)) {
      throw Error(ErrorCode::OutOfRange, "time " + std::to_string(t) + " outside the truth range");
    }
    for (double w : grid.omegas) {
      f.g.push_back(spectral::spectral_density(truth.coeffs.at(t), truth.sigma, w));
    }
  }
  return f;
}

spectral::SpectralField true_spectrum(const ScenarioTruth& truth, const spectral::FrequencyGrid& grid) {
  std::vector<int> times;
  for (int t = truth.coeffs.range.lo; t <= truth.coeffs.range.hi; ++t) times.push_back(t);
  return true_spectrum(truth, grid, times);
}

std::string AseEntry::name() const {
  const std::string ij = spectral::entry_label(i, j);
  return i == j ? "log_g" + ij : "rho2_" + ij;
}

std::vector<double> ase(const spectral::SpectralField& estimate, const spectral::SpectralField& truth,
                        const std::vector<AseEntry>& entries) {
  if (!(estimate.grid == truth.grid)) {
    throw Error(ErrorCode::RangeMismatch, "estimate and truth use different frequency grids");
  }
  if (estimate.k != truth.k) throw Error(ErrorCode::DimensionMismatch, "dimension mismatch");
  if (estimate.times.empty()) throw Error(ErrorCode::InvalidArgument, "empty estimate field");
  std::unordered_map<int, std::size_t> truth_index;
  for (std::size_t i = 0; i < truth.times.size(); ++i) truth_index.emplace(truth.times[i], i);
  for (const auto& e : entries) {
    if (e.i < 0 || e.j < 0 || e.i >= estimate.k || e.j >= estimate.k) {
      throw Error(ErrorCode::OutOfRange, "ASE entry outside the matrix");
    }
  }

  const std::size_t n_freq = estimate.grid.size();
  std::vector<double> out(entries.size(), 0.0);
  for (std::size_t ti = 0; ti < estimate.times.size(); ++ti) {
    const auto it = truth_index.find(estimate.times[ti]);
    if (it == truth_index.end()) {
      throw Error(ErrorCode::RangeMismatch,
                  "truth does not cover time " + std::to_string(estimate.times[ti]));
    }
    for (std::size_t l = 0; l < n_freq; ++l) {
      const CMatrix& ge = estimate.at(ti, l);
      const CMatrix& gt = truth.at(it->second, l);
      for (std::size_t e = 0; e < entries.size(); ++e) {
        const int i = entries[e].i;
        const int j = entries[e].j;
        double d;
        if (i == j) {
          const double a = ge(i, i).real();
          const double b = gt(i, i).real();
          if (!(a > 0.0) || !(b > 0.0)) {
            throw Error(ErrorCode::NonPositiveSpectrum, "diagonal spectrum is not positive");
          }
          d = std::log(a) - std::log(b);
        } else {
          d = spectral::coherence_value(ge, i, j) - spectral::coherence_value(gt, i, j);
        }
        out[e] += d * d;
      }
    }
  }
  const double n = static_cast<double>(estimate.times.size() * n_freq);
  for (double& v : out) v /= n;
  return out;
}

double ase_grid(const spectral::RealGrid& estimate, const spectral::RealGrid& truth) {
  if (!(estimate.grid == truth.grid)) {
    throw Error(ErrorCode::RangeMismatch, "estimate and truth use different frequency grids");
  }
  if (estimate.times.empty()) throw Error(ErrorCode::InvalidArgument, "empty estimate grid");
  std::unordered_map<int, Eigen::Index> truth_row;
  for (std::size_t i = 0; i < truth.times.size(); ++i) {
    truth_row.emplace(truth.times[i], static_cast<Eigen::Index>(i));
  }
  double sum = 0.0;
  for (std::size_t ti = 0; ti < estimate.times.size(); ++ti) {
    const auto it = truth_row.find(estimate.times[ti]);
    if (it == truth_row.end()) {
      throw Error(ErrorCode::RangeMismatch,
                  "truth does not cover time " + std::to_string(estimate.times[ti]));
    }
    sum += (estimate.values.row(static_cast<Eigen::Index>(ti)) - truth.values.row(it->second))
               .squaredNorm();
  }
  return sum / static_cast<double>(estimate.values.size());
}

}  // namespace tvparcor::sim
