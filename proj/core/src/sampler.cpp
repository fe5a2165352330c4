#include "cayley/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <thread>

#include "cayley/jacobian.hpp"

namespace cayley {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Relative spread of the per-transition leapfrog step size.
constexpr double kStepJitter = 0.2;

double adaptation_gain(std::size_t t) { return std::pow(static_cast<double>(t) + 1.0, -0.6); }

bool accept(double log_ratio, Rng& rng) {
  if (std::isnan(log_ratio)) return false;
  if (log_ratio >= 0.0) {
    rng.uniform();
    return true;
  }
  return std::log(rng.uniform()) < log_ratio;
}

}  // namespace

const char* proposal_kind_name(ProposalKind k) {
  return k == ProposalKind::kRandomWalk ? "random-walk-gaussian" : "leapfrog";
}

ProposalKind parse_proposal_kind(const std::string& s) {
  if (s == "random-walk-gaussian" || s == "random-walk" || s == "rw") return ProposalKind::kRandomWalk;
  if (s == "leapfrog" || s == "hmc") return ProposalKind::kLeapfrog;
  throw DimensionError("unknown proposal kind '" + s + "'");
}

const char* gradient_mode_name(GradientMode m) {
  return m == GradientMode::kFiniteDifference ? "finite-difference" : "gaussian-approximation";
}

GradientMode parse_gradient_mode(const std::string& s) {
  if (s == "finite-difference" || s == "fd") return GradientMode::kFiniteDifference;
  if (s == "gaussian-approximation" || s == "gaussian") return GradientMode::kGaussianApproximation;
  throw DimensionError("unknown gradient mode '" + s + "'");
}

void ProposalConfig::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DimensionError("proposal scale must be positive");
  if (per_block_scales) {
    const auto [sb, sa] = *per_block_scales;
    if (!(sb > 0.0) || !(sa > 0.0) || !std::isfinite(sb) || !std::isfinite(sa)) {
      throw DimensionError("per-block scales must be positive");
    }
  }
  if (leapfrog_steps < 1) throw DimensionError("leapfrog_steps must be at least 1");
  if (!(fd_step > 0.0) || !std::isfinite(fd_step)) throw DimensionError("fd_step must be positive");
}

void RunConfig::validate() const {
  if (iterations < 1) throw DimensionError("iterations must be positive");
  if (burn_in >= iterations) throw DimensionError("burn_in must be smaller than iterations");
  if (thin < 1) throw DimensionError("thin must be positive");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw DimensionError("target_acceptance must lie in (0, 1)");
  }
}

PullbackTarget::PullbackTarget(LogDensity g, ManifoldDims dims) : g_(std::move(g)), dims_(dims) {
  if (!g_.log_g) throw DimensionError("target density has no log_g");
}

Index PullbackTarget::dim() const {
  return manifold() == Manifold::kStiefel ? dims_.stiefel_dim() : dims_.grassmann_dim();
}

Index PullbackTarget::skew_dim() const {
  return manifold() == Manifold::kStiefel ? dims_.skew_dim() : 0;
}

bool PullbackTarget::in_domain(const Vector& x) const {
  if (!x.allFinite()) return false;
  if (manifold() == Manifold::kStiefel) return true;
  return grassmann_domain_margin(GrassmannCoords(dims_, x)) > 0.0;
}

double PullbackTarget::log_density(const Vector& x) const {
  if (x.size() != dim()) throw DimensionError("coordinate vector has the wrong length");
  if (manifold() == Manifold::kStiefel) return pullback_log_density(g_, StiefelCoords(dims_, x));
  return pullback_log_density(g_, GrassmannCoords(dims_, x));
}

double PullbackTarget::log_jacobian(const Vector& x) const {
  if (manifold() == Manifold::kStiefel) return log_jacobian_block_stiefel(StiefelCoords(dims_, x));
  const GrassmannCoords psi(dims_, x);
  if (!(grassmann_domain_margin(psi) > 0.0)) return kNegInf;
  return log_jacobian_block_grassmann(psi);
}

Matrix PullbackTarget::to_manifold(const Vector& x) const {
  if (manifold() == Manifold::kStiefel) return cayley_forward_stiefel(StiefelCoords(dims_, x)).matrix();
  return cayley_forward_grassmann(GrassmannCoords(dims_, x)).matrix();
}

Vector PullbackTarget::log_g_gradient(const Vector& x) const {
  const Matrix q = to_manifold(x);
  const Matrix w = g_.gradient(q);
  if (manifold() == Manifold::kStiefel) return derivative_transpose_apply(StiefelCoords(dims_, x), w);
  return derivative_transpose_apply(GrassmannCoords(dims_, x), w);
}

Vector PullbackTarget::gradient(const Vector& x, GradientMode mode, double fd_step) const {
  const Index d = dim();
  Vector grad = Vector::Zero(d);
  const bool analytic = g_.has_gradient();
  auto central = [&](auto&& f) {
    Vector xp = x;
    for (Index i = 0; i < d; ++i) {
      const double xi = x(i);
      xp(i) = xi + fd_step;
      const double up = f(xp);
      xp(i) = xi - fd_step;
      const double down = f(xp);
      xp(i) = xi;
      grad(i) += (up - down) / (2.0 * fd_step);
    }
  };
  if (analytic) grad += log_g_gradient(x);
  if (mode == GradientMode::kFiniteDifference) {
    if (analytic) {
      grad += manifold() == Manifold::kStiefel
                  ? log_jacobian_gradient_stiefel(StiefelCoords(dims_, x), fd_step)
                  : log_jacobian_gradient_grassmann(GrassmannCoords(dims_, x), fd_step);
    } else {
      central([&](const Vector& y) { return log_density(y); });
    }
    return grad;
  }
  if (!analytic) {
    central([&](const Vector& y) {
      if (!in_domain(y)) return kNegInf;
      return g_(to_manifold(y));
    });
  }
  const double p = static_cast<double>(dims_.p());
  const Index nb = skew_dim();
  grad.head(nb) -= (0.5 * p) * x.head(nb);
  grad.tail(d - nb) -= p * x.tail(d - nb);
  return grad;
}

Vector PullbackTarget::coordinate_scales(
    const std::optional<std::pair<double, double>>& per_block) const {
  Vector s = Vector::Ones(dim());
  if (per_block) {
    const Index nb = skew_dim();
    s.head(nb).setConstant(per_block->first);
    s.tail(dim() - nb).setConstant(per_block->second);
  }
  return s;
}

ChainState make_state(const PullbackTarget& target, Vector coords) {
  ChainState s;
  if (coords.size() != target.dim()) throw DimensionError("initial coordinates have the wrong length");
  if (!target.in_domain(coords)) throw DomainError("initial coordinates are outside the domain");
  s.log_target = target.log_density(coords);
  if (!std::isfinite(s.log_target)) throw NumericalError("initial log target is not finite");
  s.coords = std::move(coords);
  return s;
}

bool state_is_coherent(const ChainState& state, const PullbackTarget& target, double tol) {
  const double fresh = target.log_density(state.coords);
  return std::abs(fresh - state.log_target) <= tol * std::max(1.0, std::abs(fresh));
}

double mh_log_ratio(double log_target_new, double log_target_old, double log_q_reverse,
                    double log_q_forward) {
  if (log_target_new == kNegInf) return kNegInf;
  return (log_target_new - log_target_old) + (log_q_reverse - log_q_forward);
}

double gaussian_proposal_log_density(const Vector& to, const Vector& from, const Vector& sd) {
  const Vector z = (to - from).cwiseQuotient(sd);
  constexpr double kHalfLog2Pi = 0.91893853320467274178;
  return -0.5 * z.squaredNorm() - sd.array().log().sum() - kHalfLog2Pi * static_cast<double>(z.size());
}

ChainState mh_step(const ChainState& state, const PullbackTarget& target,
                   const ProposalConfig& proposal, Rng& rng) {
  const Vector sd = proposal.scale * target.coordinate_scales(proposal.per_block_scales);
  const Vector eps = rng.normal_vector(target.dim());
  Vector next = state.coords + sd.cwiseProduct(eps);
  const double lt = target.in_domain(next) ? target.log_density(next) : kNegInf;
  // The random walk is symmetric, so the proposal terms cancel.
  const double log_r = mh_log_ratio(lt, state.log_target, 0.0, 0.0);
  ChainState out = state;
  out.step_count += 1;
  out.last_acceptance = std::isnan(log_r) ? 0.0 : std::min(1.0, std::exp(log_r));
  if (accept(log_r, rng)) {
    out.coords = std::move(next);
    out.log_target = lt;
    out.accept_count += 1;
  }
  return out;
}

PhasePoint leapfrog_integrate(const PullbackTarget& target, PhasePoint z, double step_size,
                              int steps, const Vector& scales, GradientMode mode, double fd_step) {
  const Vector mass_inv = scales.cwiseAbs2();
  auto grad_at = [&](const Vector& x, Vector& g) {
    g = target.gradient(x, mode, fd_step);
    return g.allFinite();
  };
  Vector g;
  if (!target.in_domain(z.position) || !grad_at(z.position, g)) {
    z.valid = false;
    return z;
  }
  z.momentum += 0.5 * step_size * g;
  for (int l = 0; l < steps; ++l) {
    z.position += step_size * mass_inv.cwiseProduct(z.momentum);
    if (!target.in_domain(z.position) || !grad_at(z.position, g)) {
      z.valid = false;
      return z;
    }
    z.momentum += (l + 1 < steps ? 1.0 : 0.5) * step_size * g;
  }
  return z;
}

double hamiltonian(const PullbackTarget& target, const PhasePoint& z, const Vector& scales) {
  if (!z.valid || !target.in_domain(z.position)) return std::numeric_limits<double>::infinity();
  const double kinetic = 0.5 * scales.cwiseProduct(z.momentum).squaredNorm();
  return -target.log_density(z.position) + kinetic;
}

ChainState leapfrog_step(const ChainState& state, const PullbackTarget& target,
                         const ProposalConfig& proposal, Rng& rng) {
  if (proposal.kind != ProposalKind::kLeapfrog) throw DimensionError("leapfrog_step needs a leapfrog proposal");
  const Vector scales = target.coordinate_scales(proposal.per_block_scales);
  PhasePoint start;
  start.position = state.coords;
  start.momentum = rng.normal_vector(target.dim()).cwiseQuotient(scales);
  const double eps = proposal.scale * (1.0 + kStepJitter * (2.0 * rng.uniform() - 1.0));
  const double kinetic0 = 0.5 * scales.cwiseProduct(start.momentum).squaredNorm();
  const PhasePoint end = leapfrog_integrate(target, start, eps, proposal.leapfrog_steps, scales,
                                            proposal.gradient, proposal.fd_step);
  double lt = kNegInf;
  double kinetic1 = 0.0;
  if (end.valid) {
    lt = target.log_density(end.position);
    kinetic1 = 0.5 * scales.cwiseProduct(end.momentum).squaredNorm();
  }
  // Momentum terms play the role of the proposal densities.
  const double log_r = mh_log_ratio(lt, state.log_target, -kinetic1, -kinetic0);
  ChainState out = state;
  out.step_count += 1;
  out.last_acceptance = std::isnan(log_r) ? 0.0 : std::min(1.0, std::exp(log_r));
  if (accept(log_r, rng)) {
    out.coords = end.position;
    out.log_target = lt;
    out.accept_count += 1;
  }
  return out;
}

SampleBatch run_chain(const PullbackTarget& target, const Vector& init,
                      const ProposalConfig& proposal, const RunConfig& run, std::uint64_t stream) {
  proposal.validate();
  run.validate();
  Rng rng(run.seed, stream);
  ChainState state = make_state(target, init);
  ProposalConfig prop = proposal;
  double log_scale = std::log(prop.scale);

  SampleBatch batch;
  batch.manifold = target.manifold();
  batch.p = target.dims().p();
  batch.k = target.dims().k();
  batch.seed = run.seed;
  batch.stream = stream;
  batch.run = run;
  const std::size_t kept = (run.iterations - run.burn_in + run.thin - 1) / run.thin;
  batch.coords_draws.reserve(kept);
  batch.manifold_draws.reserve(kept);

  std::size_t accepted_after_burn = 0;
  for (std::size_t t = 0; t < run.iterations; ++t) {
    const bool burning = t < run.burn_in;
    const std::size_t before = state.accept_count;
    state = prop.kind == ProposalKind::kRandomWalk ? mh_step(state, target, prop, rng)
                                                   : leapfrog_step(state, target, prop, rng);
    if (burning) {
      if (run.adapt) {
        log_scale += adaptation_gain(t) * (state.last_acceptance - run.target_acceptance);
        log_scale = std::clamp(log_scale, -30.0, 10.0);
        prop.scale = std::exp(log_scale);
      }
      continue;
    }
    accepted_after_burn += state.accept_count - before;
    if ((t - run.burn_in) % run.thin == 0) {
      batch.coords_draws.push_back(state.coords);
      batch.manifold_draws.push_back(target.to_manifold(state.coords));
    }
  }
  batch.acceptance_rate =
      static_cast<double>(accepted_after_burn) / static_cast<double>(run.iterations - run.burn_in);
  batch.final_scale = prop.scale;
  batch.proposal = prop;
  return batch;
}

unsigned thread_limit() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CAYLEY_THREADS")) {
    unsigned v = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), v);
    if (ec == std::errc() && *ptr == '\0' && v > 0) return v;
  }
  return hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(thread_limit(), n);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<SampleBatch> run_chains(const PullbackTarget& target, const std::vector<Vector>& inits,
                                    const ProposalConfig& proposal, const RunConfig& run) {
  std::vector<SampleBatch> out(inits.size());
  parallel_for(inits.size(), [&](std::size_t c) { out[c] = run_chain(target, inits[c], proposal, run, c); });
  return out;
}

Vector init_from_manifold(const StiefelPoint& q) { return cayley_inverse_stiefel(q).values(); }

Vector init_from_manifold(const GrassmannPoint& q) { return cayley_inverse_grassmann(q).values(); }

}  // namespace cayley
