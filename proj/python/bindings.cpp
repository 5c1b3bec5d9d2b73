#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "photstat/errors.hpp"
#include "photstat/experiment.hpp"
#include "photstat/inference.hpp"
#include "photstat/io.hpp"
#include "photstat/photon_model.hpp"
#include "photstat/photon_stats.hpp"
#include "photstat/quadrature.hpp"
#include "photstat/random.hpp"
#include "photstat/subtraction.hpp"

namespace py = pybind11;
namespace ps = photstat;

namespace {

ps::QuadratureSample as_sample(std::vector<double> values) { return {std::move(values), std::nullopt, std::nullopt}; }

void export_errors(py::module_& m) {
  // Later registrations are tried first, so the base class goes first.
  auto& base = py::register_exception<ps::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ps::DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ps::RangeError>(m, "RangeError", base.ptr());
  py::register_exception<ps::TruncationError>(m, "TruncationError", base.ptr());
  py::register_exception<ps::UnsupportedKindError>(m, "UnsupportedKindError", base.ptr());
  py::register_exception<ps::ImpossibleSubtractionError>(m, "ImpossibleSubtractionError", base.ptr());
  py::register_exception<ps::SubVacuumError>(m, "SubVacuumError", base.ptr());
  py::register_exception<ps::InsufficientDataError>(m, "InsufficientDataError", base.ptr());
  py::register_exception<ps::BinningError>(m, "BinningError", base.ptr());
  py::register_exception<ps::FormatError>(m, "FormatError", base.ptr());
  py::register_exception<ps::NonConvergenceError>(m, "NonConvergenceError", base.ptr());
  py::register_exception<ps::CampaignError>(m, "CampaignError", base.ptr());
  py::register_exception<ps::InternalError>(m, "InternalError", base.ptr());
}

void export_model(py::module_& m) {
  py::class_<ps::PhotonModel>(m, "PhotonModel")
      .def_static("compound_poisson", &ps::PhotonModel::compound_poisson, py::arg("mu"), py::arg("a"))
      .def_static("poisson", &ps::PhotonModel::poisson, py::arg("mu"))
      .def_static("binomial_fock", &ps::PhotonModel::binomial_fock, py::arg("n"), py::arg("mu"))
      .def_static("hierarchy", &ps::PhotonModel::hierarchy, py::arg("mu"), py::arg("levels"))
      .def_static(
          "hierarchy_from_clusterization",
          [](double mu, const std::vector<double>& a_levels) {
            return ps::PhotonModel::hierarchy_from_clusterization(mu, a_levels);
          },
          py::arg("mu"), py::arg("a_levels"))
      .def_static("from_json", [](const std::string& text) { return ps::model_from_json(text); })
      .def_property_readonly("kind", [](const ps::PhotonModel& self) { return ps::to_string(self.kind()); })
      .def_property_readonly("mu", &ps::PhotonModel::mu)
      .def_property_readonly("a", &ps::PhotonModel::a)
      .def_property_readonly("levels", [](const ps::PhotonModel& self) {
        return std::vector<double>(self.levels().begin(), self.levels().end());
      })
      .def("with_mu", &ps::PhotonModel::with_mu)
      .def("to_json", [](const ps::PhotonModel& self) { return ps::model_to_json(self); })
      .def("__eq__", [](const ps::PhotonModel& l, const ps::PhotonModel& r) { return l == r; })
      .def("__repr__", &ps::PhotonModel::describe);

  m.def("truncation", &ps::truncation);
  m.def("pmf", &ps::pmf, py::arg("model"), py::arg("k"));
  m.def("pmf_table", &ps::pmf_table);
  m.def("pgf", &ps::pgf_eval, py::arg("model"), py::arg("z"));
  m.def("pgf_derivative", &ps::pgf_derivative, py::arg("model"), py::arg("order"), py::arg("z"));
  m.def("autocorrelation", &ps::autocorrelation, py::arg("model"), py::arg("m"));
  m.def("apply_loss", &ps::apply_loss, py::arg("model"), py::arg("transmission"));
  m.def("photon_moments", [](const ps::PhotonModel& model) {
    const ps::PhotonMoments pm = ps::moments(model);
    return py::make_tuple(pm.mean, pm.variance);
  });
}

void export_quadrature(py::module_& m) {
  m.def("quadrature_pdf", py::overload_cast<const ps::PhotonModel&, double>(&ps::quadrature_pdf));
  m.def("quadrature_cdf", py::overload_cast<const ps::PhotonModel&, double>(&ps::quadrature_cdf));
  m.def("quadrature_moments", [](const ps::PhotonModel& model) {
    const ps::QuadratureMoments q = ps::quadrature_moments(model);
    py::dict out;
    out["variance"] = q.variance;
    out["skewness"] = q.skewness;
    out["excess_kurtosis"] = q.excess_kurtosis;
    return out;
  });
  m.def(
      "sample_quadratures",
      [](const ps::PhotonModel& model, std::size_t count, std::uint64_t seed) {
        ps::Rng rng(seed);
        return ps::sample_quadratures(model, count, rng).values;
      },
      py::arg("model"), py::arg("count"), py::arg("seed"));
  m.def(
      "sample_photon_counts",
      [](const ps::PhotonModel& model, std::size_t count, std::uint64_t seed) {
        ps::Rng rng(seed);
        return ps::sample_photon_counts(model, count, rng);
      },
      py::arg("model"), py::arg("count"), py::arg("seed"));
}

void export_subtraction(py::module_& m) {
  py::class_<ps::SubtractionRecord>(m, "SubtractionRecord")
      .def_readonly("initial", &ps::SubtractionRecord::initial)
      .def_readonly("m", &ps::SubtractionRecord::m)
      .def_readonly("p", &ps::SubtractionRecord::p)
      .def_readonly("step_means", &ps::SubtractionRecord::step_means)
      .def_readonly("result", &ps::SubtractionRecord::result)
      .def("to_json", [](const ps::SubtractionRecord& self) { return ps::subtraction_to_json(self); });

  m.def("subtract_analytic", &ps::subtract_analytic, py::arg("model"), py::arg("m"));
  m.def("subtract_finite_chain", &ps::subtract_finite_chain, py::arg("model"), py::arg("m"), py::arg("p"));
  m.def(
      "mc_subtract",
      [](const std::vector<int>& counts, double p, std::uint64_t seed) {
        ps::Rng rng(seed);
        const ps::McSubtraction out = ps::mc_subtract(counts, p, rng);
        return py::make_tuple(out.surviving, out.acceptance);
      },
      py::arg("counts"), py::arg("p"), py::arg("seed"));
  m.def("log_g_from_means", [](double mu0, const std::vector<double>& means) {
    return ps::autocorr_from_means(mu0, means).log_g_values;
  });
}

void export_inference(py::module_& m) {
  py::class_<ps::FitResult>(m, "FitResult")
      .def_readonly("model", &ps::FitResult::model)
      .def_readonly("sigma_mu", &ps::FitResult::sigma_mu)
      .def_readonly("sigma_a", &ps::FitResult::sigma_a)
      .def_readonly("sigma_levels", &ps::FitResult::sigma_levels)
      .def_readonly("log_likelihood", &ps::FitResult::log_likelihood)
      .def_readonly("chi2_significance", &ps::FitResult::chi2_significance)
      .def_readonly("fidelity_vs_reference", &ps::FitResult::fidelity_vs_reference)
      .def_readonly("sample_size", &ps::FitResult::sample_size)
      .def_readonly("converged", &ps::FitResult::converged)
      .def_readonly("boundary_pinned", &ps::FitResult::boundary_pinned)
      .def_readonly("level1_sufficient", &ps::FitResult::level1_sufficient)
      .def_property_readonly("method", [](const ps::FitResult& self) { return ps::to_string(self.method); })
      .def("to_json", [](const ps::FitResult& self) { return ps::fit_to_json(self); });

  m.def("method_of_moments", [](std::vector<double> values) {
    const ps::MomentEstimate e = ps::method_of_moments(as_sample(std::move(values)));
    return py::make_tuple(e.mu_hat, e.a_hat);
  });
  m.def(
      "mle_fit",
      [](std::vector<double> values, std::optional<std::pair<double, double>> init,
         std::optional<ps::PhotonModel> reference) {
        ps::MleOptions options;
        options.init = init;
        options.reference = std::move(reference);
        return ps::mle_fit(as_sample(std::move(values)), options);
      },
      py::arg("values"), py::arg("init") = py::none(), py::arg("reference") = py::none());
  m.def(
      "fit_hierarchy2",
      [](std::vector<double> values, std::optional<double> fixed_a1) {
        ps::HierarchyFitOptions options;
        options.fixed_a1 = fixed_a1;
        return ps::fit_hierarchy2(as_sample(std::move(values)), options);
      },
      py::arg("values"), py::arg("fixed_a1") = py::none());
  m.def(
      "chi2_test",
      [](std::vector<double> values, const ps::PhotonModel& model, int fitted) {
        return ps::chi2_test(as_sample(std::move(values)), model, fitted);
      },
      py::arg("values"), py::arg("model"), py::arg("fitted_parameters") = 2);
  m.def("fidelity", &ps::fidelity);
}

void export_experiment(py::module_& m) {
  m.def(
      "campaign_report",
      [](const std::string& config_json) {
        const ps::CampaignConfig config = ps::campaign_config_from_json(config_json.empty() ? "{}" : config_json);
        return ps::campaign_report_csv(ps::run_campaign(config));
      },
      py::arg("config_json") = "");
}

}  // namespace

PYBIND11_MODULE(_photstat, m) {
  m.doc() = "Photon-number statistics, subtraction and quadrature reconstruction";
  export_errors(m);
  export_model(m);
  export_quadrature(m);
  export_subtraction(m);
  export_inference(m);
  export_experiment(m);
}
