#include "cayley/experiments.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "cayley/densities.hpp"

namespace cayley {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Table histogram_table(const Histogram& h, const std::string& reference_name,
                      const std::function<double(double)>& reference_pdf) {
  Table t;
  t.columns = {"bin_center", "count", "density", reference_name};
  const auto bins = static_cast<Index>(h.counts.size());
  t.data.resize(bins, 4);
  const double n = static_cast<double>(h.total());
  for (Index i = 0; i < bins; ++i) {
    const auto c = static_cast<double>(h.counts[static_cast<std::size_t>(i)]);
    t.data(i, 0) = h.bin_center(static_cast<std::size_t>(i));
    t.data(i, 1) = c;
    t.data(i, 2) = c / (n * h.bin_width());
    t.data(i, 3) = reference_pdf(t.data(i, 0));
  }
  t.attributes["lo"] = format_double(h.lo);
  t.attributes["hi"] = format_double(h.hi);
  return t;
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace

void SpikedDataSpec::validate() const {
  if (n < 1) throw DimensionError("n must be at least 1");
  const ManifoldDims dims(p, k);
  if (!(sigma2 > 0.0)) throw DimensionError("sigma2 must be positive");
  if (lambda.size() != k) throw DimensionError("lambda must have length k");
  for (Index j = 0; j < k; ++j) {
    if (!(lambda(j) > 0.0)) throw DimensionError("lambda entries must be positive");
    if (j > 0 && !(lambda(j) < lambda(j - 1))) throw DimensionError("lambda must be strictly decreasing");
  }
}

SpikedData simulate_spiked_data(const SpikedDataSpec& spec) {
  spec.validate();
  Rng frame_rng(spec.seed, 0);
  StiefelPoint q = haar_stiefel(spec.p, spec.k, frame_rng);
  const Matrix& qm = q.matrix();
  Matrix sigma = qm * spec.lambda.asDiagonal() * qm.transpose();
  sigma.diagonal().array() += 1.0;
  sigma *= spec.sigma2;
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
  const Matrix root =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  Rng data_rng(spec.seed, 1);
  const Matrix z = data_rng.normal_matrix(spec.n, spec.p);
  return SpikedData{z * root, std::move(q)};
}

ProposalConfig default_uniform_proposal(Index p) {
  ProposalConfig c;
  c.kind = ProposalKind::kLeapfrog;
  c.gradient = GradientMode::kFiniteDifference;
  c.scale = 0.5;
  c.leapfrog_steps = 8;
  const double pd = static_cast<double>(p);
  c.per_block_scales = std::make_pair(std::sqrt(2.0 / pd), std::sqrt(1.0 / pd));
  return c;
}

UniformExperimentOptions default_uniform_options(Index p) {
  UniformExperimentOptions o;
  o.proposal = default_uniform_proposal(p);
  return o;
}

Table draws_table(const SampleBatch& batch) {
  Table t;
  const auto n = static_cast<Index>(batch.coords_draws.size());
  const Index d = n > 0 ? batch.coords_draws.front().size() : 0;
  const Index pk = batch.p * batch.k;
  for (Index i = 0; i < d; ++i) t.columns.push_back("coord" + std::to_string(i));
  for (Index j = 0; j < batch.k; ++j) {
    for (Index i = 0; i < batch.p; ++i) t.columns.push_back("q" + std::to_string(i) + "_" + std::to_string(j));
  }
  t.data.resize(n, d + pk);
  for (Index r = 0; r < n; ++r) {
    const auto idx = static_cast<std::size_t>(r);
    t.data.row(r).head(d) = batch.coords_draws[idx].transpose();
    t.data.row(r).tail(pk) = Eigen::Map<const Vector>(batch.manifold_draws[idx].data(), pk).transpose();
  }
  t.attributes["p"] = std::to_string(batch.p);
  t.attributes["k"] = std::to_string(batch.k);
  t.attributes["manifold"] = manifold_name(batch.manifold);
  return t;
}

ExperimentReport run_uniform_experiment(Index p, Index k, std::size_t draws, std::uint64_t seed,
                                        const UniformExperimentOptions& options) {
  const auto t0 = Clock::now();
  const ManifoldDims dims(p, k);
  if (draws < 1) throw DimensionError("draws must be positive");
  const PullbackTarget target(uniform_log_density(Manifold::kStiefel), dims);
  RunConfig run;
  run.burn_in = options.burn_in;
  run.thin = options.thin;
  run.iterations = options.burn_in + draws * options.thin;
  run.seed = seed;
  run.adapt = options.adapt;
  run.target_acceptance = options.target_acceptance;
  const SampleBatch batch = run_chain(target, Vector::Zero(target.dim()), options.proposal, run);

  const std::size_t n = batch.coords_draws.size();
  std::vector<double> entry(n);
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) {
    entry[i] = batch.manifold_draws[i](0, 0);
    scaled[i] = scale_matrix_apply(batch.coords_draws[i], p, k)(0);
  }
  const EntryMarginal marginal(p, k);
  const double entry_ks = ks_statistic(entry, [&](double x) { return marginal.cdf(x); });
  const double scaled_ks = ks_statistic(scaled, normal_cdf);

  ExperimentReport r;
  r.name = "uniform";
  r.config = {{"p", p}, {"k", k}, {"draws", draws}, {"seed", seed}, {"proposal", to_json(options.proposal)},
              {"run", to_json(run)}, {"bins", options.bins}, {"save_draws", options.save_draws}};
  r.metrics["entry_ks"] = entry_ks;
  r.metrics["scaled_coordinate_ks"] = scaled_ks;
  r.metrics["acceptance_rate"] = batch.acceptance_rate;
  r.metrics["final_scale"] = batch.final_scale;
  r.metrics["draws"] = n;
  r.metrics["entry_ess"] = acf_ess(entry, 200).ess;
  r.metrics["scaled_coordinate_ess"] = acf_ess(scaled, 200).ess;

  Table trace;
  trace.columns = {"top_left_entry", "scaled_first_coordinate"};
  trace.data.resize(static_cast<Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    trace.data(static_cast<Index>(i), 0) = entry[i];
    trace.data(static_cast<Index>(i), 1) = scaled[i];
  }
  r.tables["trace"] = std::move(trace);
  r.tables["entry_histogram"] = histogram_table(histogram(entry, -1.0, 1.0, options.bins), "exact_pdf",
                                                [&](double x) { return marginal.pdf(x); });
  r.tables["scaled_histogram"] =
      histogram_table(histogram(scaled, -4.0, 4.0, options.bins), "normal_pdf", normal_pdf);
  if (options.save_draws) r.tables["draws"] = draws_table(batch);
  r.runtime_seconds = seconds_since(t0);
  return r;
}

ExperimentReport run_uniform_experiment(Index p, Index k, std::size_t draws, std::uint64_t seed) {
  return run_uniform_experiment(p, k, draws, seed, default_uniform_options(p));
}

BinghamExperimentOptions default_bingham_options() {
  BinghamExperimentOptions o;
  o.proposal.kind = ProposalKind::kLeapfrog;
  o.proposal.gradient = GradientMode::kFiniteDifference;
  o.proposal.scale = 0.05;
  o.proposal.leapfrog_steps = 8;
  return o;
}

RunConfig default_bingham_run(std::uint64_t seed) {
  RunConfig run;
  run.iterations = 12000;
  run.burn_in = 2000;
  run.thin = 1;
  run.seed = seed;
  run.adapt = true;
  run.target_acceptance = 0.7;
  return run;
}

ExperimentReport run_bingham_experiment(const SpikedDataSpec& spec, const RunConfig& run,
                                        const BinghamExperimentOptions& options) {
  const auto t0 = Clock::now();
  run.validate();
  options.proposal.validate();
  const SpikedData data = simulate_spiked_data(spec);
  const BinghamParams params = BinghamParams::from_data(data.y, spec.sigma2, spec.lambda);
  const ManifoldDims dims(spec.p, spec.k);
  const PullbackTarget target(bingham_log_density(params), dims);
  const Matrix mode = params.mode_frame();

  Rng init_rng(run.seed, 0x1217);
  const StiefelPoint haar = haar_stiefel(spec.p, spec.k, init_rng);
  const std::vector<Vector> inits = {init_from_manifold(StiefelPoint(mode)), init_from_manifold(haar)};
  const std::vector<std::string> init_names = {"mode_frame", "haar"};
  const std::vector<SampleBatch> chains = run_chains(target, inits, options.proposal, run);

  const std::size_t n_chains = chains.size();
  const auto k = static_cast<std::size_t>(spec.k);
  // angles[c][j][t]
  std::vector<std::vector<std::vector<double>>> angles(n_chains, std::vector<std::vector<double>>(k));
  for (std::size_t c = 0; c < n_chains; ++c) {
    for (const Matrix& q : chains[c].manifold_draws) {
      const Vector th = principal_angles(q, mode);
      for (std::size_t j = 0; j < k; ++j) angles[c][j].push_back(th(static_cast<Index>(j)));
    }
  }

  ExperimentReport r;
  r.name = "bingham";
  r.config = {{"data", to_json(spec)},
              {"run", to_json(run)},
              {"proposal", to_json(options.proposal)},
              {"bins", options.bins},
              {"max_lag", options.max_lag},
              {"chains", init_names},
              {"save_draws", options.save_draws}};

  const double half_pi = 0.5 * std::numbers::pi;
  std::vector<std::vector<Histogram>> hists(n_chains);
  nlohmann::json per_chain = nlohmann::json::array();
  Table acf_table;
  acf_table.columns = {"lag"};
  std::vector<std::vector<double>> acfs;
  for (std::size_t c = 0; c < n_chains; ++c) {
    nlohmann::json m;
    m["init"] = init_names[c];
    m["acceptance_rate"] = chains[c].acceptance_rate;
    m["final_scale"] = chains[c].final_scale;
    std::vector<double> means;
    std::vector<double> ess;
    for (std::size_t j = 0; j < k; ++j) {
      const auto& th = angles[c][j];
      double s = 0.0;
      for (double x : th) s += x;
      means.push_back(s / static_cast<double>(th.size()));
      ess.push_back(acf_ess(th, options.max_lag).ess);
      hists[c].push_back(histogram(th, 0.0, half_pi, options.bins));
    }
    const ChainDiagnostics d1 = acf_ess(angles[c][0], options.max_lag);
    m["theta_mean"] = means;
    m["theta_ess"] = ess;
    m["theta1_lag1_acf"] = d1.acf.size() > 1 ? d1.acf[1] : 0.0;
    per_chain.push_back(m);
    acf_table.columns.push_back("theta1_acf_chain" + std::to_string(c));
    acfs.push_back(d1.acf);
  }
  r.metrics["chains"] = per_chain;
  std::vector<double> tv;
  for (std::size_t j = 0; j < k; ++j) tv.push_back(total_variation(hists[0][j], hists[1][j]));
  r.metrics["theta_tv_between_chains"] = tv;
  r.metrics["theta1_tv"] = tv[0];

  const std::size_t lags = acfs.front().size();
  acf_table.data.resize(static_cast<Index>(lags), static_cast<Index>(1 + n_chains));
  for (std::size_t h = 0; h < lags; ++h) {
    acf_table.data(static_cast<Index>(h), 0) = static_cast<double>(h);
    for (std::size_t c = 0; c < n_chains; ++c) {
      acf_table.data(static_cast<Index>(h), static_cast<Index>(c + 1)) = h < acfs[c].size() ? acfs[c][h] : 0.0;
    }
  }
  r.tables["theta1_acf"] = std::move(acf_table);

  Table trace;
  trace.columns = {"chain", "draw"};
  for (std::size_t j = 0; j < k; ++j) trace.columns.push_back("theta" + std::to_string(j + 1));
  std::size_t rows = 0;
  for (const auto& ch : chains) rows += ch.coords_draws.size();
  trace.data.resize(static_cast<Index>(rows), static_cast<Index>(2 + k));
  Index row = 0;
  for (std::size_t c = 0; c < n_chains; ++c) {
    for (std::size_t t = 0; t < angles[c][0].size(); ++t, ++row) {
      trace.data(row, 0) = static_cast<double>(c);
      trace.data(row, 1) = static_cast<double>(t);
      for (std::size_t j = 0; j < k; ++j) trace.data(row, static_cast<Index>(2 + j)) = angles[c][j][t];
    }
  }
  r.tables["theta_trace"] = std::move(trace);

  Table ht;
  ht.columns = {"bin_center"};
  for (std::size_t c = 0; c < n_chains; ++c) {
    for (std::size_t j = 0; j < k; ++j) {
      ht.columns.push_back("chain" + std::to_string(c) + "_theta" + std::to_string(j + 1));
    }
  }
  ht.data.resize(static_cast<Index>(options.bins), static_cast<Index>(1 + n_chains * k));
  for (std::size_t b = 0; b < options.bins; ++b) {
    ht.data(static_cast<Index>(b), 0) = hists[0][0].bin_center(b);
    for (std::size_t c = 0; c < n_chains; ++c) {
      for (std::size_t j = 0; j < k; ++j) {
        ht.data(static_cast<Index>(b), static_cast<Index>(1 + c * k + j)) =
            static_cast<double>(hists[c][j].counts[b]);
      }
    }
  }
  ht.attributes["lo"] = "0";
  ht.attributes["hi"] = format_double(half_pi);
  r.tables["theta_histograms"] = std::move(ht);

  if (options.save_draws) {
    for (std::size_t c = 0; c < n_chains; ++c) r.tables["draws_chain" + std::to_string(c)] = draws_table(chains[c]);
  }
  r.runtime_seconds = seconds_since(t0);
  return r;
}

ExperimentReport run_bingham_experiment(const SpikedDataSpec& spec, const RunConfig& run) {
  return run_bingham_experiment(spec, run, default_bingham_options());
}

ExperimentReport run_normal_approx_experiment(Index k, const std::vector<Index>& p_grid,
                                              std::size_t replicates, std::uint64_t seed) {
  const auto t0 = Clock::now();
  if (p_grid.empty()) throw DimensionError("p_grid must not be empty");
  if (replicates < 1) throw DimensionError("replicates must be positive");
  for (Index p : p_grid) ManifoldDims(p, k);

  const std::size_t jobs = p_grid.size() * replicates;
  std::vector<CouplingResult> results(jobs);
  parallel_for(jobs, [&](std::size_t job) {
    const std::size_t g = job / replicates;
    const std::size_t rep = job % replicates;
    Rng rng(seed, (static_cast<std::uint64_t>(g) << 32) | rep);
    results[job] = coupling_epsilon(p_grid[g], k, rng);
  });

  ExperimentReport r;
  r.name = "normal-approx";
  r.config = {{"k", k}, {"p_grid", p_grid}, {"replicates", replicates}, {"seed", seed}};
  nlohmann::json per_p = nlohmann::json::array();
  std::vector<double> medians;
  Table eps;
  eps.columns = {"p", "replicate", "epsilon"};
  eps.data.resize(static_cast<Index>(jobs), 3);
  for (std::size_t g = 0; g < p_grid.size(); ++g) {
    std::vector<double> e;
    for (std::size_t rep = 0; rep < replicates; ++rep) {
      const std::size_t job = g * replicates + rep;
      e.push_back(results[job].epsilon);
      eps.data(static_cast<Index>(job), 0) = static_cast<double>(p_grid[g]);
      eps.data(static_cast<Index>(job), 1) = static_cast<double>(rep);
      eps.data(static_cast<Index>(job), 2) = results[job].epsilon;
    }
    medians.push_back(median(e));
    per_p.push_back({{"p", p_grid[g]}, {"median_epsilon", medians.back()}, {"p90_epsilon", quantile(e, 0.9)}});
  }
  bool decreasing = true;
  for (std::size_t g = 1; g < medians.size(); ++g) decreasing = decreasing && medians[g] < medians[g - 1];
  r.metrics["per_p"] = per_p;
  r.metrics["medians_strictly_decreasing"] = decreasing;

  std::vector<double> pooled;
  for (std::size_t rep = 0; rep < replicates; ++rep) {
    const Vector& z = results[rep].z;
    pooled.insert(pooled.end(), z.data(), z.data() + z.size());
  }
  r.metrics["z_pooled_ks"] = ks_statistic(pooled, normal_cdf);
  r.metrics["z_pooled_count"] = pooled.size();
  r.metrics["z_pooled_p"] = p_grid.front();
  Table zt;
  zt.columns = {"z"};
  zt.data = Eigen::Map<const Vector>(pooled.data(), static_cast<Index>(pooled.size()));
  r.tables["epsilon"] = std::move(eps);
  r.tables["z_pooled"] = std::move(zt);
  r.runtime_seconds = seconds_since(t0);
  return r;
}

nlohmann::json to_json(const ProposalConfig& c) {
  nlohmann::json j = {{"kind", proposal_kind_name(c.kind)},
                      {"scale", c.scale},
                      {"leapfrog_steps", c.leapfrog_steps},
                      {"fd_step", c.fd_step},
                      {"gradient", gradient_mode_name(c.gradient)}};
  if (c.per_block_scales) {
    j["per_block_scales"] = {c.per_block_scales->first, c.per_block_scales->second};
  } else {
    j["per_block_scales"] = nullptr;
  }
  return j;
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"iterations", c.iterations}, {"burn_in", c.burn_in},   {"thin", c.thin},
          {"seed", c.seed},             {"adapt", c.adapt},       {"target_acceptance", c.target_acceptance}};
}

nlohmann::json to_json(const SpikedDataSpec& s) {
  return {{"n", s.n},
          {"p", s.p},
          {"k", s.k},
          {"sigma2", s.sigma2},
          {"lambda", std::vector<double>(s.lambda.data(), s.lambda.data() + s.lambda.size())},
          {"seed", s.seed}};
}

}  // namespace cayley
