// wand: fit, summarize, check and simulate weighted Plackett-Luce mixtures.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wand/chain_state.hpp"
#include "wand/gibbs.hpp"
#include "wand/parallel.hpp"
#include "wand/predictive.hpp"
#include "wand/ranking_data.hpp"
#include "wand/simulate.hpp"
#include "wand/summaries.hpp"

namespace fs = std::filesystem;

namespace {

struct RunConfig {
  std::string data_path;
  std::string trace_path;
  std::string spec_path;
  std::string out_dir = ".";
  wand::Hyperparams hyper;
  wand::SweepConfig sweep;
  bool no_rescale = false;
  std::uint64_t seed = 1;
  std::size_t chains = 1;
  std::size_t condition_nr = 0;
  std::string mode = "auto";
  std::size_t samples_per_iter = 1;
  double cap = wand::kDefaultEnumerationCap;
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

fs::path chain_trace_path(const RunConfig& cfg, std::size_t chain) {
  return fs::path(cfg.out_dir) / ("trace_chain" + std::to_string(chain) + ".jsonl");
}

int cmd_fit(const RunConfig& cfg) {
  const wand::Dataset data = wand::load_dataset(cfg.data_path);
  wand::SweepConfig sweep = cfg.sweep;
  sweep.rescale_enabled = !cfg.no_rescale;
  sweep.validate();
  cfg.hyper.validate();
  fs::create_directories(cfg.out_dir);

  std::mutex log_mutex;
  std::vector<double> final_loglik(cfg.chains, 0.0);
  std::vector<std::size_t> records(cfg.chains, 0);
  wand::parallel_for(cfg.chains, std::min(cfg.chains, wand::worker_threads()), [&](std::size_t chain) {
    const std::uint64_t seed = wand::derive_seed(cfg.seed, chain);
    const fs::path path = chain_trace_path(cfg, chain);
    std::ofstream out = open_output(path);
    wand::TraceMetadata meta;
    meta.seed = seed;
    meta.hyper = cfg.hyper;
    meta.iterations = sweep.iterations;
    meta.burn_in = sweep.burn_in;
    meta.thin = sweep.thin;
    meta.rescale = sweep.rescale_enabled;
    meta.num_rankers = data.num_rankers();
    meta.num_entities = data.num_entities;
    wand::TraceWriter writer(out, meta);
    const std::size_t total = sweep.burn_in + sweep.iterations;
    const std::size_t report_every = std::max<std::size_t>(1, total / 10);
    wand::run_chain(data, cfg.hyper, sweep, seed, [&](const wand::TraceRecord& rec) {
      writer.write(rec);
      ++records[chain];
      final_loglik[chain] = rec.loglik;
      if (rec.iter % report_every < sweep.thin) {
        std::lock_guard<std::mutex> lock(log_mutex);
        std::cerr << "chain " << chain << ": sweep " << rec.iter << "/" << total << " N^r=" << rec.state.num_ranker_clusters()
                  << " loglik=" << rec.loglik << '\n';
      }
    });
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
  });
  for (std::size_t chain = 0; chain < cfg.chains; ++chain) {
    std::cerr << "chain " << chain << ": " << records[chain] << " records -> " << chain_trace_path(cfg, chain).string();
    if (records[chain] > 0) std::cerr << ", final complete-data loglik " << final_loglik[chain];
    std::cerr << '\n';
  }
  return 0;
}

int cmd_summarize(const RunConfig& cfg) {
  const wand::Trace trace = wand::load_trace(cfg.trace_path);
  if (trace.empty()) throw std::runtime_error("trace '" + cfg.trace_path + "' has no retained samples");
  std::optional<wand::Dataset> data;
  if (!cfg.data_path.empty()) data = wand::load_dataset(cfg.data_path);
  fs::create_directories(cfg.out_dir);
  const fs::path out_dir(cfg.out_dir);

  const auto delta = wand::ranker_dissimilarity(trace);
  delta.validate();
  {
    auto out = open_output(out_dir / "ranker_dissimilarity.csv");
    wand::write_dissimilarity_csv(out, delta, {});
  }
  if (delta.dim() >= 2) {
    auto out = open_output(out_dir / "ranker_dendrogram.csv");
    wand::write_merges_csv(out, wand::complete_linkage(delta));
  }
  {
    auto out = open_output(out_dir / "ranker_cluster_counts.csv");
    wand::write_count_distribution_csv(out, wand::ranker_cluster_count_distribution(trace));
  }
  {
    auto out = open_output(out_dir / "reliability.csv");
    wand::write_reliability_csv(out, wand::reliability_probabilities(trace));
  }
  {
    auto out = open_output(out_dir / "map_allocation.csv");
    wand::write_allocation_csv(out, wand::map_allocation(trace));
  }

  const std::size_t N = cfg.condition_nr;
  if (N > 0) {
    std::vector<std::string> labels;
    if (data) {
      for (std::size_t l = 0; l < data->num_entities; ++l) labels.push_back(data->label(static_cast<wand::EntityId>(l)));
    }
    for (std::size_t s = 0; s < N; ++s) {
      const std::string suffix = "_nr" + std::to_string(N) + "_cluster" + std::to_string(s) + ".csv";
      const auto ed = wand::entity_dissimilarity(trace, N, s);
      ed.validate();
      {
        auto out = open_output(out_dir / ("entity_dissimilarity" + suffix));
        wand::write_dissimilarity_csv(out, ed, labels);
      }
      if (ed.dim() >= 2) {
        auto out = open_output(out_dir / ("entity_dendrogram" + suffix));
        wand::write_merges_csv(out, wand::complete_linkage(ed));
      }
      {
        auto out = open_output(out_dir / ("entity_cluster_counts" + suffix));
        wand::write_count_distribution_csv(out, wand::entity_cluster_count_distribution(trace, N, s));
      }
      {
        auto out = open_output(out_dir / ("aggregate_ranking" + suffix));
        wand::write_aggregate_csv(out, wand::aggregate_ranking(trace, N, s), data ? &*data : nullptr);
      }
    }
  }
  std::cerr << "wrote summaries for " << trace.size() << " retained samples to " << out_dir.string() << '\n';
  return 0;
}

int cmd_ppc(const RunConfig& cfg) {
  const wand::Dataset data = wand::load_dataset(cfg.data_path);
  const wand::Trace trace = wand::load_trace(cfg.trace_path);
  if (trace.meta.num_rankers != data.num_rankers() || trace.meta.num_entities != data.num_entities) {
    throw std::runtime_error("trace was produced for " + std::to_string(trace.meta.num_rankers) + " rankers and " +
                             std::to_string(trace.meta.num_entities) + " entities, but the dataset has " +
                             std::to_string(data.num_rankers()) + " and " + std::to_string(data.num_entities));
  }
  if (trace.empty()) throw std::runtime_error("trace has no retained samples");
  wand::PredictiveOptions opts;
  if (cfg.mode != "auto") opts.method = wand::parse_predictive_method(cfg.mode);
  opts.samples_per_iter = cfg.samples_per_iter;
  opts.cap = cfg.cap;
  opts.seed = cfg.seed;
  opts.threads = wand::worker_threads();
  const auto report = wand::diagnostic_probabilities(trace, data, opts);
  fs::create_directories(cfg.out_dir);
  auto out = open_output(fs::path(cfg.out_dir) / "predictive_check.csv");
  wand::write_predictive_csv(out, report);
  std::cerr << "wrote predictive check for " << report.size() << " rankers\n";
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  std::ifstream in(cfg.spec_path);
  if (!in) throw std::runtime_error("cannot open generative spec '" + cfg.spec_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const auto spec = wand::parse_generative_spec(buf.str());
  const auto sim = wand::generate(spec, cfg.seed);
  fs::create_directories(cfg.out_dir);
  wand::save_dataset(sim.data, (fs::path(cfg.out_dir) / "dataset.json").string());
  auto out = open_output(fs::path(cfg.out_dir) / "truth.json");
  out << wand::serialize_truth(sim.truth) << '\n';
  std::cerr << "simulated " << sim.data.num_rankers() << " rankings over " << sim.data.num_entities << " entities\n";
  return 0;
}

void add_hyper_flags(CLI::App* app, RunConfig& cfg) {
  app->add_option("--a", cfg.hyper.a, "Gamma index of the skill base distribution")->check(CLI::PositiveNumber);
  app->add_option("--a-alpha", cfg.hyper.a_alpha, "Shape of the alpha prior")->check(CLI::PositiveNumber);
  app->add_option("--b-alpha", cfg.hyper.b_alpha, "Rate of the alpha prior")->check(CLI::PositiveNumber);
  app->add_option("--a-gamma", cfg.hyper.a_gamma, "Shape of the gamma_s prior")->check(CLI::PositiveNumber);
  app->add_option("--b-gamma", cfg.hyper.b_gamma, "Rate of the gamma_s prior")->check(CLI::PositiveNumber);
  app->add_option("--m-r", cfg.hyper.m_r, "Auxiliary ranker clusters per allocation step")->check(CLI::PositiveNumber);
  app->add_option("--m-e", cfg.hyper.m_e, "Auxiliary entity clusters per allocation step")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted Plackett-Luce mixtures under a nested Dirichlet process prior"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* fit = app.add_subcommand("fit", "Run MCMC chains and write trace files");
  fit->add_option("--data", cfg.data_path, "Dataset JSON")->required()->check(CLI::ExistingFile);
  fit->add_option("--out", cfg.out_dir, "Output directory for trace_chain<k>.jsonl");
  fit->add_option("--iters", cfg.sweep.iterations, "Post-burn-in sweeps");
  fit->add_option("--burnin", cfg.sweep.burn_in, "Burn-in sweeps");
  fit->add_option("--thin", cfg.sweep.thin, "Thinning interval")->check(CLI::PositiveNumber);
  fit->add_option("--seed", cfg.seed, "Base seed; chain k uses a seed derived from (seed, k)");
  fit->add_option("--chains", cfg.chains, "Independent chains")->check(CLI::PositiveNumber);
  fit->add_flag("--no-rescale", cfg.no_rescale, "Disable the skill rescaling step");
  add_hyper_flags(fit, cfg);

  auto* summarize = app.add_subcommand("summarize", "Posterior summaries from a trace");
  summarize->add_option("--trace", cfg.trace_path, "Trace file")->required()->check(CLI::ExistingFile);
  summarize->add_option("--data", cfg.data_path, "Dataset JSON (for entity labels)")->check(CLI::ExistingFile);
  summarize->add_option("--out", cfg.out_dir, "Output directory");
  summarize->add_option("--condition-nr", cfg.condition_nr, "Condition entity summaries on this many ranker clusters");

  auto* ppc = app.add_subcommand("ppc", "Posterior predictive diagnostic probabilities");
  ppc->add_option("--data", cfg.data_path, "Dataset JSON")->required()->check(CLI::ExistingFile);
  ppc->add_option("--trace", cfg.trace_path, "Trace file")->required()->check(CLI::ExistingFile);
  ppc->add_option("--out", cfg.out_dir, "Output directory");
  ppc->add_option("--mode", cfg.mode, "auto, full, truncated or approximate")
      ->check(CLI::IsMember({"auto", "full", "truncated", "approximate"}));
  ppc->add_option("--samples-per-iter", cfg.samples_per_iter, "Orderings drawn per retained sample (L)")
      ->check(CLI::PositiveNumber);
  ppc->add_option("--cap", cfg.cap, "Largest number of orderings to enumerate")->check(CLI::PositiveNumber);
  ppc->add_option("--seed", cfg.seed, "Seed for the Monte Carlo modes");

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset with ground truth");
  simulate->add_option("--spec", cfg.spec_path, "Generative spec JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", cfg.out_dir, "Output directory for dataset.json and truth.json");
  simulate->add_option("--seed", cfg.seed, "Seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) return cmd_fit(cfg);
    if (*summarize) return cmd_summarize(cfg);
    if (*ppc) return cmd_ppc(cfg);
    if (*simulate) return cmd_simulate(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
