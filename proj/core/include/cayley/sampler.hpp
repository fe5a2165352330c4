#pragma once

// Markov chain Monte Carlo in Cayley coordinates. The chain targets the
// pullback density g(C(x)) J(x) on R^d (Stiefel) or on the Grassmann domain,
// and draws are mapped back to frames with the forward Cayley map.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cayley/densities.hpp"
#include "cayley/rng.hpp"

namespace cayley {

enum class ProposalKind { kRandomWalk, kLeapfrog };

/// How the leapfrog integrator obtains the gradient of the log target.
enum class GradientMode {
  /// Central differences of the block log-Jacobian, plus the analytic
  /// gradient of log g when the density supplies one.
  kFiniteDifference,
  /// Analytic gradient of log g plus the gradient of the independent normal
  /// approximation log J(x) ~ -x^T Pi^2 x / 2. Only the trajectory uses it;
  /// the Metropolis correction uses the exact target, so the chain is exact.
  kGaussianApproximation,
};

const char* proposal_kind_name(ProposalKind k);
ProposalKind parse_proposal_kind(const std::string& s);
const char* gradient_mode_name(GradientMode m);
GradientMode parse_gradient_mode(const std::string& s);

struct ProposalConfig {
  ProposalKind kind = ProposalKind::kRandomWalk;
  /// Random-walk standard deviation, or leapfrog step size.
  double scale = 0.1;
  /// Relative scales for the b block and the A block.
  std::optional<std::pair<double, double>> per_block_scales;
  int leapfrog_steps = 10;
  double fd_step = 1e-5;
  GradientMode gradient = GradientMode::kFiniteDifference;

  void validate() const;
};

struct RunConfig {
  /// Total number of transitions, burn-in included.
  std::size_t iterations = 1000;
  std::size_t burn_in = 0;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  /// Robbins-Monro adaptation of the global scale during burn-in.
  bool adapt = true;
  double target_acceptance = 0.3;

  void validate() const;
};

/// The pullback log density seen by the sampler.
class PullbackTarget {
 public:
  PullbackTarget(LogDensity g, ManifoldDims dims);

  Manifold manifold() const { return g_.manifold; }
  const ManifoldDims& dims() const { return dims_; }
  const LogDensity& density() const { return g_; }
  /// d_V or d_G.
  Index dim() const;
  /// Length of the b block (zero on the Grassmann manifold).
  Index skew_dim() const;

  /// -infinity outside the Grassmann domain.
  double log_density(const Vector& x) const;
  double log_jacobian(const Vector& x) const;
  bool in_domain(const Vector& x) const;
  Matrix to_manifold(const Vector& x) const;
  Vector gradient(const Vector& x, GradientMode mode, double fd_step) const;
  /// Per-coordinate proposal scales (relative, before the global scale).
  Vector coordinate_scales(const std::optional<std::pair<double, double>>& per_block) const;

 private:
  Vector log_g_gradient(const Vector& x) const;

  LogDensity g_;
  ManifoldDims dims_;
};

struct ChainState {
  Vector coords;
  double log_target = 0.0;
  std::size_t accept_count = 0;
  std::size_t step_count = 0;
  /// Acceptance probability of the last transition.
  double last_acceptance = 0.0;
};

struct SampleBatch {
  Manifold manifold = Manifold::kStiefel;
  Index p = 0;
  Index k = 0;
  std::vector<Vector> coords_draws;
  std::vector<Matrix> manifold_draws;
  /// Post burn-in acceptance rate.
  double acceptance_rate = 0.0;
  /// Scale in force after adaptation.
  double final_scale = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  ProposalConfig proposal;
  RunConfig run;
};

ChainState make_state(const PullbackTarget& target, Vector coords);
/// Recomputes the log target and compares with the cached value.
bool state_is_coherent(const ChainState& state, const PullbackTarget& target, double tol = 1e-10);

/// Log acceptance ratio log pi(x') - log pi(x) + log q(x | x') - log q(x' | x).
double mh_log_ratio(double log_target_new, double log_target_old, double log_q_reverse,
                    double log_q_forward);
/// Log density of a diagonal Gaussian random-walk proposal `to` given `from`.
double gaussian_proposal_log_density(const Vector& to, const Vector& from, const Vector& sd);

/// One random-walk Metropolis-Hastings transition.
ChainState mh_step(const ChainState& state, const PullbackTarget& target,
                   const ProposalConfig& proposal, Rng& rng);
/// One Metropolis-corrected leapfrog (HMC) transition.
ChainState leapfrog_step(const ChainState& state, const PullbackTarget& target,
                         const ProposalConfig& proposal, Rng& rng);

struct PhasePoint {
  Vector position;
  Vector momentum;
  /// False if the trajectory left the domain of the target.
  bool valid = true;
};

/// Leapfrog integration with kinetic energy sum(scales^2 * momentum^2) / 2.
PhasePoint leapfrog_integrate(const PullbackTarget& target, PhasePoint start, double step_size,
                              int steps, const Vector& scales, GradientMode mode, double fd_step);
double hamiltonian(const PullbackTarget& target, const PhasePoint& z, const Vector& scales);

/// Runs one chain on stream `stream` of the configured seed.
SampleBatch run_chain(const PullbackTarget& target, const Vector& init,
                      const ProposalConfig& proposal, const RunConfig& run,
                      std::uint64_t stream = 0);

/// Runs one chain per initial point, chain c on stream c. Chains run in
/// parallel, capped by the CAYLEY_THREADS environment variable.
std::vector<SampleBatch> run_chains(const PullbackTarget& target, const std::vector<Vector>& inits,
                                    const ProposalConfig& proposal, const RunConfig& run);

/// Thread cap from CAYLEY_THREADS (default: hardware concurrency, at least 1).
unsigned thread_limit();

/// Calls body(i) for i in [0, n) on up to thread_limit() threads. The first
/// exception (by index) is rethrown after all work finishes.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

Vector init_from_manifold(const StiefelPoint& q);
Vector init_from_manifold(const GrassmannPoint& q);

}  // namespace cayley
