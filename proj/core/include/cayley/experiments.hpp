#pragma once

// End-to-end studies: uniform sampling on V(k,p), the spiked-covariance
// Bingham posterior, and the normal approximation of Cayley coordinates.

#include <cstdint>
#include <vector>

#include "cayley/diagnostics.hpp"
#include "cayley/matrix_io.hpp"
#include "cayley/sampler.hpp"

namespace cayley {

struct SpikedDataSpec {
  Index n = 100;
  Index p = 50;
  Index k = 3;
  double sigma2 = 1.0;
  Vector lambda = (Vector(3) << 5.0, 3.0, 1.5).finished();
  std::uint64_t seed = 0;

  void validate() const;
};

struct SpikedData {
  Matrix y;
  StiefelPoint q_true;
};

/// Q_true ~ Haar, then rows of Y i.i.d. N(0, sigma2 (Q Lambda Q^T + I)).
SpikedData simulate_spiked_data(const SpikedDataSpec& spec);

/// Leapfrog with finite-difference gradients and per-block scales
/// sqrt(2/p), sqrt(1/p), which match the spread of uniform coordinates.
ProposalConfig default_uniform_proposal(Index p);

struct UniformExperimentOptions {
  ProposalConfig proposal;
  std::size_t burn_in = 1000;
  std::size_t thin = 2;
  bool adapt = true;
  double target_acceptance = 0.7;
  std::size_t bins = 40;
  /// Also store every retained draw (coordinates, then vec(Q)).
  bool save_draws = false;
};

UniformExperimentOptions default_uniform_options(Index p);

/// Top-left entry against its exact marginal, and sqrt(p/2) phi_1 (k > 1) or
/// sqrt(p) phi_1 (k = 1) against N(0, 1).
ExperimentReport run_uniform_experiment(Index p, Index k, std::size_t draws, std::uint64_t seed,
                                        const UniformExperimentOptions& options);
ExperimentReport run_uniform_experiment(Index p, Index k, std::size_t draws, std::uint64_t seed);

struct BinghamExperimentOptions {
  ProposalConfig proposal;
  std::size_t bins = 30;
  std::size_t max_lag = 50;
  bool save_draws = false;
};

BinghamExperimentOptions default_bingham_options();
RunConfig default_bingham_run(std::uint64_t seed);

/// Two chains, one started at the mode frame (top-k eigenvectors of Y^T Y)
/// and one at a Haar frame; columnwise angles to the mode frame are
/// summarized per chain.
ExperimentReport run_bingham_experiment(const SpikedDataSpec& spec, const RunConfig& run,
                                        const BinghamExperimentOptions& options);
ExperimentReport run_bingham_experiment(const SpikedDataSpec& spec, const RunConfig& run);

/// Median and 90th percentile of the coupling error per p, a strict
/// monotonicity verdict, and a pooled KS test of the z coordinates at the
/// first grid point.
ExperimentReport run_normal_approx_experiment(Index k, const std::vector<Index>& p_grid,
                                              std::size_t replicates, std::uint64_t seed);

/// Draws table: one row per retained draw, coordinates then vec(Q).
Table draws_table(const SampleBatch& batch);

nlohmann::json to_json(const ProposalConfig& c);
nlohmann::json to_json(const RunConfig& c);
nlohmann::json to_json(const SpikedDataSpec& s);

}  // namespace cayley
