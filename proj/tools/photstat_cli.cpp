// photstat command-line tool.
//
// Exit codes: 0 ok, 2 usage or validation, 3 fit did not converge,
// 4 model-domain failure during computation, 5 pipeline failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "photstat/errors.hpp"
#include "photstat/experiment.hpp"
#include "photstat/inference.hpp"
#include "photstat/io.hpp"
#include "photstat/photon_model.hpp"
#include "photstat/photon_stats.hpp"
#include "photstat/quadrature.hpp"
#include "photstat/random.hpp"
#include "photstat/subtraction.hpp"

namespace ps = photstat;

namespace {

enum Exit { kOk = 0, kUsage = 2, kNoConvergence = 3, kModelDomain = 4, kPipeline = 5 };

struct Globals {
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

struct ModelSpec {
  std::optional<double> mu;
  std::optional<double> a;
  std::optional<int> fock;
  std::vector<double> hierarchy;
  std::string model_file;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--mu", mu, "Mean photon number");
    cmd->add_option("--a", a, "Clusterization factor");
    cmd->add_option("--fock", fock, "Fock state photon number n (with --mu for the surviving mean)");
    cmd->add_option("--hierarchy", hierarchy, "Hierarchy levels b1,b2,... (with --mu)")->delimiter(',');
    cmd->add_option("--model", model_file, "Model JSON file");
  }

  // --mu alone selects the Poisson model.
  ps::PhotonModel build() const {
    const int specs = (a ? 1 : 0) + (fock ? 1 : 0) + (hierarchy.empty() ? 0 : 1) + (model_file.empty() ? 0 : 1);
    if (specs > 1) throw ps::DomainError("give exactly one model specification");
    if (!model_file.empty()) {
      if (mu) throw ps::DomainError("--model cannot be combined with --mu");
      return ps::read_model_file(model_file);
    }
    if (!mu) throw ps::DomainError("a model specification needs --mu (or --model)");
    if (a) return ps::PhotonModel::compound_poisson(*mu, *a);
    if (fock) return ps::PhotonModel::binomial_fock(*fock, *mu);
    if (!hierarchy.empty()) return ps::PhotonModel::hierarchy(*mu, hierarchy);
    return ps::PhotonModel::poisson(*mu);
  }
};

std::uint64_t resolve_seed(const Globals& g) {
  if (g.seed) return *g.seed;
  std::random_device device;
  const std::uint64_t seed = (static_cast<std::uint64_t>(device()) << 32) ^ device();
  std::cerr << "seed=" << seed << '\n';
  return seed;
}

void note(const Globals& g, const std::string& message) {
  if (!g.quiet) std::cerr << message << '\n';
}

// Runs `validate` then `compute`; errors thrown while validating map to the
// usage code, errors thrown while computing to the model-domain code.
template <typename Validate, typename Compute>
int guarded(Validate validate, Compute compute) {
  try {
    validate();
  } catch (const ps::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  try {
    return compute();
  } catch (const ps::NonConvergenceError& e) {
    std::cout << ps::fit_to_json(e.best(), 2) << '\n';
    std::cerr << "error: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const ps::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ps::InternalError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kPipeline;
  } catch (const ps::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kModelDomain;
  }
}

int run_model(const ModelSpec& spec, std::optional<int> pmf_k, std::optional<int> g_order, bool moments) {
  std::optional<ps::PhotonModel> model;
  return guarded(
      [&] {
        if ((pmf_k ? 1 : 0) + (g_order ? 1 : 0) + (moments ? 1 : 0) > 1) {
          throw ps::DomainError("choose at most one of --pmf, --g, --moments");
        }
        if (pmf_k && *pmf_k < 0) throw ps::DomainError("--pmf needs K >= 0");
        if (g_order && *g_order < 1) throw ps::DomainError("--g needs m >= 1");
        model = spec.build();
      },
      [&] {
        if (pmf_k) {
          for (int k = 0; k <= *pmf_k; ++k) std::cout << k << '\t' << ps::format_number(ps::pmf(*model, k)) << '\n';
        } else if (g_order) {
          const double g = *g_order == 1 ? 1.0 : ps::autocorrelation(*model, *g_order);
          std::cout << ps::format_number(g) << '\n';
        } else if (moments) {
          const ps::PhotonMoments pm = ps::moments(*model);
          const ps::QuadratureMoments qm = ps::quadrature_moments(*model);
          std::cout << "mean\t" << ps::format_number(pm.mean) << '\n'
                    << "variance\t" << ps::format_number(pm.variance) << '\n'
                    << "quadrature_variance\t" << ps::format_number(qm.variance) << '\n'
                    << "quadrature_skewness\t" << ps::format_number(qm.skewness) << '\n'
                    << "quadrature_excess_kurtosis\t" << ps::format_number(qm.excess_kurtosis) << '\n'
                    << "cutoff\t" << ps::truncation(*model) << '\n';
        } else {
          std::cout << ps::model_to_json(*model) << '\n';
        }
        return kOk;
      });
}

int run_subtract(const Globals& g, const ModelSpec& spec, int m, std::optional<double> p, bool mc, std::size_t pool,
                 const std::string& counts_out) {
  std::optional<ps::PhotonModel> model;
  return guarded(
      [&] {
        if (m < 1) throw ps::DomainError("--m must be >= 1");
        if (p && !(*p > 0.0 && *p < 1.0)) throw ps::DomainError("--p must lie in (0, 1)");
        if (mc && !p) throw ps::DomainError("--mc needs --p");
        if (mc && pool == 0) throw ps::DomainError("--pool must be positive");
        if (!counts_out.empty() && !mc) throw ps::DomainError("--counts-out needs --mc");
        model = spec.build();
      },
      [&] {
        if (!p) {
          std::cout << ps::subtraction_to_json(ps::subtract_analytic(*model, m), 2) << '\n';
          return kOk;
        }
        if (!mc) {
          std::cout << ps::subtraction_to_json(ps::subtract_finite_chain(*model, m, *p), 2) << '\n';
          return kOk;
        }
        ps::Rng rng(resolve_seed(g));
        // The result field holds the closed-form finite-p prediction; step
        // means are the empirical survivor means after each pass.
        ps::SubtractionRecord record = ps::subtract_finite_chain(*model, m, *p);
        std::vector<int> current = ps::sample_photon_counts(*model, pool, rng);
        std::vector<double> acceptance;
        record.step_means.clear();
        for (int pass = 0; pass < m; ++pass) {
          ps::McSubtraction step = ps::mc_subtract(current, *p, rng);
          if (step.surviving.empty()) throw ps::RangeError("no trials survived pass " + std::to_string(pass + 1));
          acceptance.push_back(step.acceptance);
          current = std::move(step.surviving);
          double sum = 0.0;
          for (int k : current) sum += k;
          record.step_means.push_back(sum / static_cast<double>(current.size()));
        }
        record.mc_acceptance = acceptance;
        if (!counts_out.empty()) {
          std::ofstream out(counts_out);
          if (!out) throw ps::FormatError("cannot write " + counts_out);
          ps::write_counts(out, current);
        }
        note(g, std::to_string(current.size()) + " of " + std::to_string(pool) + " trials survived");
        std::cout << ps::subtraction_to_json(record, 2) << '\n';
        return kOk;
      });
}

int run_sample(const Globals& g, const ModelSpec& spec, std::size_t count, const std::string& out_path,
               const std::string& counts_in, bool photon_counts) {
  std::optional<ps::PhotonModel> model;
  std::vector<int> counts;
  return guarded(
      [&] {
        if (!counts_in.empty()) {
          std::ifstream in(counts_in);
          if (!in) throw ps::FormatError("cannot open " + counts_in);
          counts = ps::read_counts(in);
          if (counts.empty()) throw ps::FormatError("photon count file is empty");
          if (photon_counts) throw ps::DomainError("--photon-counts cannot be combined with --counts");
          return;
        }
        if (count == 0) throw ps::DomainError("--n must be positive");
        model = spec.build();
      },
      [&] {
        const std::uint64_t seed = resolve_seed(g);
        ps::Rng rng(seed);
        if (photon_counts) {
          const std::vector<int> drawn = ps::sample_photon_counts(*model, count, rng);
          if (out_path.empty()) {
            ps::write_counts(std::cout, drawn);
          } else {
            std::ofstream out(out_path);
            if (!out) throw ps::FormatError("cannot write " + out_path);
            ps::write_counts(out, drawn);
          }
          return kOk;
        }
        ps::QuadratureSample sample;
        if (model) {
          sample = ps::sample_quadratures(*model, count, rng);
        } else {
          sample.values = ps::sample_quadratures_for_counts(counts, rng);
          sample.seed = seed;
        }
        if (out_path.empty()) {
          ps::write_samples_csv(std::cout, sample.values);
        } else {
          ps::write_samples(out_path, sample);
          note(g, "wrote " + std::to_string(sample.values.size()) + " readings to " + out_path);
        }
        return kOk;
      });
}

int run_fit(const std::string& input, const std::string& method, const std::string& reference_path,
            std::optional<double> fixed_a1, bool report, const std::string& state) {
  ps::QuadratureSample sample;
  std::optional<ps::PhotonModel> reference;
  return guarded(
      [&] {
        if (method != "mom" && method != "mle" && method != "h2") {
          throw ps::DomainError("--method must be mom, mle or h2");
        }
        if (fixed_a1 && method != "h2") throw ps::DomainError("--fixed-a1 applies only to --method h2");
        sample = ps::read_samples(input);
        if (!reference_path.empty()) reference = ps::read_model_file(reference_path);
      },
      [&] {
        std::optional<ps::FitResult> fit;
        if (method == "mom") {
          fit = ps::fit_moments(sample);
          if (reference) fit->fidelity_vs_reference = ps::fidelity(fit->model, *reference);
        } else if (method == "mle") {
          ps::MleOptions options;
          options.reference = reference;
          fit = ps::mle_fit(sample, options);
        } else {
          ps::HierarchyFitOptions options;
          options.fixed_a1 = fixed_a1;
          options.reference = reference;
          fit = ps::fit_hierarchy2(sample, options);
        }
        if (report) {
          std::cout << ps::kReportColumns << '\n' << ps::report_row(state, *fit) << '\n';
        } else {
          std::cout << ps::fit_to_json(*fit, 2) << '\n';
        }
        return kOk;
      });
}

int run_gtable(const ModelSpec& spec, int max_order, const std::vector<double>& chain,
               const std::vector<double>& sigmas) {
  std::optional<ps::PhotonModel> model;
  return guarded(
      [&] {
        if (chain.empty()) {
          if (max_order < 2) throw ps::DomainError("--max-order must be >= 2");
          model = spec.build();
          return;
        }
        if (chain.size() < 2) throw ps::DomainError("--chain needs mu0 and at least one subtracted mean");
        if (!sigmas.empty() && sigmas.size() != chain.size()) {
          throw ps::DomainError("--sigmas needs one entry per --chain entry");
        }
      },
      [&] {
        ps::CorrelationReport report;
        if (model) {
          report = ps::correlation_report(*model, max_order);
        } else {
          const std::vector<double> means(chain.begin() + 1, chain.end());
          if (sigmas.empty()) {
            report = ps::autocorr_from_means(chain.front(), means);
          } else {
            const std::vector<double> step_sigmas(sigmas.begin() + 1, sigmas.end());
            report = ps::autocorr_from_means(chain.front(), means, sigmas.front(), step_sigmas);
          }
        }
        std::cout << "order\tg\tln_g\tsigma_ln_g\n";
        for (std::size_t i = 0; i < report.orders.size(); ++i) {
          std::cout << report.orders[i] << '\t' << ps::format_number(report.g_values[i]) << '\t'
                    << ps::format_number(report.log_g_values[i]) << '\t' << ps::format_number(report.sigma_log_g[i])
                    << '\n';
        }
        return kOk;
      });
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ps::FormatError("cannot write " + path);
  out << text;
}

int run_campaign(const Globals& g, const std::string& config_path, const std::string& out_path) {
  ps::CampaignConfig config;
  return guarded(
      [&] {
        if (!config_path.empty()) config = ps::campaign_config_from_json(ps::read_text_file(config_path));
        if (g.seed) config.seed = *g.seed;
        config.validate();
      },
      [&] {
        try {
          const ps::CampaignResult result = ps::run_campaign(config);
          write_file(out_path, ps::campaign_report_csv(result));
          const ps::CorrelationReport& corr = result.correlations;
          if (!corr.orders.empty()) {
            std::cout << "ln_g" << corr.orders.back() << '=' << ps::format_number(corr.log_g_values.back()) << "±"
                      << ps::format_number(corr.sigma_log_g.back()) << '\n';
          }
          note(g, "wrote " + out_path);
          return kOk;
        } catch (const ps::CampaignError& e) {
          write_file(out_path + ".partial", ps::campaign_report_csv(e.partial()));
          std::cerr << "error: " << e.what() << "\npartial report written to " << out_path << ".partial\n";
          return kPipeline;
        }
      });
}

int run_compare(const std::string& input, const std::string& level1_path, const std::string& level2_path, int bins,
                const std::string& out_path) {
  ps::QuadratureSample sample;
  std::optional<ps::PhotonModel> level1;
  std::optional<ps::PhotonModel> level2;
  return guarded(
      [&] {
        if (bins < 5) throw ps::DomainError("--bins must be at least 5");
        sample = ps::read_samples(input);
        level1 = ps::read_model_file(level1_path);
        level2 = ps::read_model_file(level2_path);
      },
      [&] {
        const std::string csv = ps::comparison_csv(ps::compare_models(sample, *level1, *level2, bins));
        if (out_path.empty()) {
          std::cout << csv;
        } else {
          write_file(out_path, csv);
        }
        return kOk;
      });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photon-number statistics, subtraction and quadrature reconstruction"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals globals;
  app.add_option("--seed", globals.seed, "Random seed (drawn from entropy and reported when omitted)");
  app.add_flag("--quiet", globals.quiet, "Suppress diagnostics on stderr");

  auto* model_cmd = app.add_subcommand("model", "Photon-number distribution, correlations or moments");
  ModelSpec model_spec;
  model_spec.add_to(model_cmd);
  std::optional<int> pmf_k;
  std::optional<int> g_order;
  bool moments = false;
  model_cmd->add_option("--pmf", pmf_k, "Print P(k) for k = 0..K");
  model_cmd->add_option("--g", g_order, "Print g^(m)");
  model_cmd->add_flag("--moments", moments, "Print photon-number and quadrature moments");

  auto* subtract_cmd = app.add_subcommand("subtract", "Photon subtraction");
  ModelSpec subtract_spec;
  subtract_spec.add_to(subtract_cmd);
  int sub_m = 1;
  std::optional<double> sub_p;
  bool sub_mc = false;
  std::size_t sub_pool = 1000000;
  std::string counts_out;
  subtract_cmd->add_option("--m", sub_m, "Number of subtracted photons")->required();
  subtract_cmd->add_option("--p", sub_p, "Beam-splitter reflection probability (default: the p -> 0 limit)");
  subtract_cmd->add_flag("--mc", sub_mc, "Monte-Carlo conditioning of a photon-count pool");
  subtract_cmd->add_option("--pool", sub_pool, "Monte-Carlo pool size");
  subtract_cmd->add_option("--counts-out", counts_out, "Write surviving photon counts to this file");

  auto* sample_cmd = app.add_subcommand("sample", "Draw quadrature readings (or photon counts)");
  ModelSpec sample_spec;
  sample_spec.add_to(sample_cmd);
  std::size_t sample_n = 0;
  std::string sample_out;
  std::string counts_in;
  bool photon_counts = false;
  sample_cmd->add_option("--n", sample_n, "Number of readings");
  sample_cmd->add_option("--out", sample_out, "Output CSV (stdout when omitted)");
  sample_cmd->add_option("--counts", counts_in, "Photon counts file; one reading per count");
  sample_cmd->add_flag("--photon-counts", photon_counts, "Emit photon counts instead of quadratures");

  auto* fit_cmd = app.add_subcommand("fit", "Reconstruct model parameters from quadrature readings");
  std::string fit_input;
  std::string fit_method = "mle";
  std::string fit_reference;
  std::optional<double> fixed_a1;
  bool fit_report = false;
  std::string fit_state = "sample";
  fit_cmd->add_option("--input", fit_input, "Samples CSV")->required();
  fit_cmd->add_option("--method", fit_method, "mom, mle or h2");
  fit_cmd->add_option("--reference", fit_reference, "Reference model JSON for the fidelity");
  fit_cmd->add_option("--fixed-a1", fixed_a1, "Hold a_1 fixed in the h2 fit");
  fit_cmd->add_flag("--report", fit_report, "Emit a reconstruction-table CSV row instead of JSON");
  fit_cmd->add_option("--state", fit_state, "State label for --report");

  auto* gtable_cmd = app.add_subcommand("gtable", "Correlation functions g^(m)");
  ModelSpec gtable_spec;
  gtable_spec.add_to(gtable_cmd);
  int max_order = 11;
  std::vector<double> chain;
  std::vector<double> chain_sigmas;
  gtable_cmd->add_option("--max-order", max_order, "Highest order for a model");
  gtable_cmd->add_option("--chain", chain, "mu0,mu1,...: means after successive subtractions")->delimiter(',');
  gtable_cmd->add_option("--sigmas", chain_sigmas, "Standard deviations matching --chain")->delimiter(',');

  auto* campaign_cmd = app.add_subcommand("campaign", "Synthetic reconstruction campaign");
  std::string config_path;
  std::string campaign_out;
  campaign_cmd->add_option("--config", config_path, "Campaign JSON (defaults when omitted)");
  campaign_cmd->add_option("--out", campaign_out, "Report CSV")->required();

  auto* compare_cmd = app.add_subcommand("compare", "Histogram of readings against two models");
  std::string compare_input;
  std::string level1_path;
  std::string level2_path;
  int compare_bins = 40;
  std::string compare_out;
  compare_cmd->add_option("--input", compare_input, "Samples CSV")->required();
  compare_cmd->add_option("--level1", level1_path, "First model JSON")->required();
  compare_cmd->add_option("--level2", level2_path, "Second model JSON")->required();
  compare_cmd->add_option("--bins", compare_bins, "Number of bins");
  compare_cmd->add_option("--out", compare_out, "Output CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (model_cmd->parsed()) return run_model(model_spec, pmf_k, g_order, moments);
  if (subtract_cmd->parsed()) return run_subtract(globals, subtract_spec, sub_m, sub_p, sub_mc, sub_pool, counts_out);
  if (sample_cmd->parsed()) return run_sample(globals, sample_spec, sample_n, sample_out, counts_in, photon_counts);
  if (fit_cmd->parsed()) return run_fit(fit_input, fit_method, fit_reference, fixed_a1, fit_report, fit_state);
  if (gtable_cmd->parsed()) return run_gtable(gtable_spec, max_order, chain, chain_sigmas);
  if (campaign_cmd->parsed()) return run_campaign(globals, config_path, campaign_out);
  if (compare_cmd->parsed()) return run_compare(compare_input, level1_path, level2_path, compare_bins, compare_out);
  return kUsage;
}
