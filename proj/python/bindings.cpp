#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tvparcor/errors.hpp"
#include "tvparcor/forecast.hpp"
#include "tvparcor/io.hpp"
#include "tvparcor/selection.hpp"
#include "tvparcor/sim.hpp"
#include "tvparcor/spectral.hpp"
#include "tvparcor/whittle.hpp"

namespace py = pybind11;
using namespace tvparcor;

namespace {

mdlm::PriorSpec prior_for(const TimeSeries& x, const std::string& s0, double c0) {
  const Matrix s = s0 == "identity" ? Matrix(Matrix::Identity(x.k(), x.k())) : x.sample_covariance();
  return mdlm::PriorSpec::standard(x.k() * x.k(), s, c0);
}

// (T, K, P, K) array flattened to a list of [A_1..A_P] per t.
py::dict coefficients_dict(const TvvarCoefficients& c) {
  std::vector<std::vector<Matrix>> forward = c.forward;
  py::dict d;
  d["range"] = py::make_tuple(c.range.lo, c.range.hi);
  d["forward"] = forward;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Time-varying vector PARCOR models";

  py::register_exception<Error>(m, "TvparcorError", PyExc_RuntimeError);

  py::class_<TimeSeries>(m, "TimeSeries")
      .def(py::init([](const Matrix& v) {
             TimeSeries x(v);
             x.validate();
             return x;
           }),
           py::arg("values"))
      .def_readonly("values", &TimeSeries::values)
      .def_readonly("labels", &TimeSeries::labels)
      .def_property_readonly("t_len", &TimeSeries::t_len)
      .def_property_readonly("k", &TimeSeries::k);

  m.def("read_series", [](const std::string& path) { return io::read_series(path); }, py::arg("path"));
  m.def("parse_series", &io::parse_series, py::arg("text"));

  m.def(
      "simulate",
      [](const std::string& scenario, int t_len, std::uint64_t seed, double phi112, int burn_in) {
        sim::ScenarioSpec spec;
        spec.kind = sim::parse_kind(scenario);
        spec.t_len = t_len;
        spec.seed = seed;
        spec.phi112 = phi112;
        spec.burn_in = burn_in;
        return sim::generate(spec).series.values;
      },
      py::arg("scenario") = "bivar-tvvar2", py::arg("t_len") = 1024, py::arg("seed") = 0,
      py::arg("phi112") = 0.0, py::arg("burn_in") = 200);

  m.def("make_grid", &selection::make_grid, py::arg("lo"), py::arg("hi"), py::arg("step"));

  py::class_<ParcorFit>(m, "ParcorFit")
      .def_readonly("order", &ParcorFit::order)
      .def_readonly("k", &ParcorFit::k)
      .def_readonly("t_len", &ParcorFit::t_len)
      .def_readonly("residual_noise", &ParcorFit::residual_noise)
      .def("forward_coefficients",
           [](const ParcorFit& f, int stage) { return f.forward.at(static_cast<std::size_t>(stage - 1)).coefficients; })
      .def("backward_coefficients",
           [](const ParcorFit& f, int stage) { return f.backward.at(static_cast<std::size_t>(stage - 1)).coefficients; })
      .def("discounts",
           [](const ParcorFit& f) {
             std::vector<std::pair<double, double>> out;
             for (int m = 0; m < f.order; ++m) {
               out.emplace_back(f.forward[m].discount.delta(0), f.backward[m].discount.delta(0));
             }
             return out;
           })
      .def("tvvar", [](const ParcorFit& f) { return coefficients_dict(whittle::parcor_to_tvvar(f)); });

  m.def(
      "fit",
      [](const TimeSeries& x, int order, double delta_f, double delta_b, const std::string& s0, double c0) {
        return lattice::fit(x, order, prior_for(x, s0, c0), delta_f, delta_b);
      },
      py::arg("x"), py::arg("order"), py::arg("delta_f") = 0.99, py::arg("delta_b") = 0.99,
      py::arg("s0") = "sample", py::arg("c0") = 1.0);

  m.def(
      "select",
      [](const TimeSeries& x, int p_max, const std::vector<double>& grid, int n_samples, std::uint64_t seed,
         const std::string& s0, double c0) {
        selection::SelectOptions opts;
        opts.n_samples = n_samples;
        opts.seed = seed;
        const auto res = selection::select(x, p_max, grid, prior_for(x, s0, c0), opts);
        return py::make_tuple(res.fit, io::to_json(res.report).dump());
      },
      py::arg("x"), py::arg("p_max"), py::arg("grid"), py::arg("n_samples") = 200, py::arg("seed") = 0,
      py::arg("s0") = "sample", py::arg("c0") = 1.0,
      "Returns the fit at the chosen order and the selection report as JSON text.");

  m.def(
      "spectra",
      [](const ParcorFit& fit, int n_freqs) {
        const auto grid = spectral::FrequencyGrid::uniform(n_freqs);
        const auto field =
            spectral::spectral_matrix(whittle::parcor_to_tvvar(fit), SymMatrix(fit.residual_noise), grid);
        py::dict d;
        d["times"] = field.times;
        d["omegas"] = grid.omegas;
        for (int i = 0; i < fit.k; ++i) {
          const std::string ii = spectral::entry_label(i, i);
          d[py::str("log_g" + ii)] = spectral::log_spectrum(field, i).values;
          for (int j = i + 1; j < fit.k; ++j) {
            const std::string ij = spectral::entry_label(i, j);
            d[py::str("rho2_" + ij)] = spectral::coherence(field, i, j).values;
            d[py::str("gamma2_" + ij)] = spectral::partial_coherence(field, i, j).values;
          }
        }
        return d;
      },
      py::arg("fit"), py::arg("n_freqs") = 200);

  m.def(
      "forecast",
      [](const ParcorFit& fit, const TimeSeries& x, int horizon, int n_samples, std::uint64_t seed,
         const std::vector<double>& probs) {
        const auto r = forecast::forecast_path(fit, x, horizon, n_samples, seed, probs);
        Matrix point(horizon, fit.k);
        for (int h = 0; h < horizon; ++h) point.row(h) = r.point[h].transpose();
        py::list bands;
        for (const auto& q : r.bands) {
          Matrix b(horizon, fit.k);
          for (int h = 0; h < horizon; ++h) b.row(h) = q[h].transpose();
          bands.append(b);
        }
        return py::make_tuple(point, bands);
      },
      py::arg("fit"), py::arg("x"), py::arg("horizon"), py::arg("n_samples") = 1000, py::arg("seed") = 0,
      py::arg("probs") = forecast::kDefaultProbs);

  m.def(
      "ase",
      [](const ParcorFit& fit, const std::string& scenario, int t_len, double phi112, int n_freqs) {
        sim::ScenarioSpec spec;
        spec.kind = sim::parse_kind(scenario);
        spec.t_len = t_len;
        spec.phi112 = phi112;
        const auto grid = spectral::FrequencyGrid::uniform(n_freqs);
        const auto est =
            spectral::spectral_matrix(whittle::parcor_to_tvvar(fit), SymMatrix(fit.residual_noise), grid);
        const auto truth = sim::true_spectrum(sim::scenario_truth(spec), grid, est.times);
        std::vector<sim::AseEntry> entries;
        for (int i = 0; i < fit.k; ++i) entries.push_back({i, i});
        for (int i = 0; i < fit.k; ++i)
          for (int j = i + 1; j < fit.k; ++j) entries.push_back({i, j});
        const auto vals = sim::ase(est, truth, entries);
        py::dict d;
        for (std::size_t e = 0; e < entries.size(); ++e) d[py::str(entries[e].name())] = vals[e];
        return d;
      },
      py::arg("fit"), py::arg("scenario"), py::arg("t_len"), py::arg("phi112") = 0.0, py::arg("n_freqs") = 200,
      "ASE of a fit against the generating spectra of a simulation scenario.");
}
