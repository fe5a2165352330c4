#include "cli.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cayley/experiments.hpp"
#include "cayley/jacobian.hpp"

namespace cayley::cli {

namespace {

using nlohmann::json;

const std::vector<std::string> kCommands = {"sample",           "jacobian",          "uniform-exp",
                                            "bingham-exp",      "normal-approx-exp", "roundtrip-check"};

struct Options {
  std::string manifold = "stiefel";
  Index p = 0;
  Index k = 0;
  std::string target = "uniform";
  std::string data_path;
  std::string coords_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::uint64_t data_seed = 0;

  std::size_t iters = 12000;
  std::size_t burn = 2000;
  std::size_t thin = 1;
  bool no_adapt = false;
  double target_acceptance = 0.3;
  std::string proposal = "random-walk-gaussian";
  double scale = 0.1;
  std::string block_scales;
  int leapfrog_steps = 10;
  double fd_step = 1e-5;
  std::string gradient = "finite-difference";
  std::string init = "zero";
  std::size_t chains = 1;

  Index n = 100;
  double sigma2 = 1.0;
  std::string lambda = "5,3,1.5";

  std::size_t draws = 10000;
  std::size_t bins = 40;
  std::size_t max_lag = 50;
  std::string p_grid = "50,200,800";
  std::size_t replicates = 50;
  bool save_draws = false;
  bool record_runtime = false;

  std::size_t instances = 100;
  double coord_scale = 1.0;
};

// Options of one subcommand, in registration order, for the manifest.
struct Registry {
  CLI::App* app = nullptr;
  std::vector<std::pair<std::string, std::function<json()>>> fields;
  std::map<std::string, CLI::Option*> options;

  template <class T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help) {
    CLI::Option* o = app->add_option("--" + name, var, help)->capture_default_str();
    fields.emplace_back(name, [&var] { return json(var); });
    options[name] = o;
    return o;
  }
  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    CLI::Option* o = app->add_flag("--" + name, var, help);
    fields.emplace_back(name, [&var] { return json(var); });
    options[name] = o;
    return o;
  }
  CLI::Option* list(const std::string& name, std::string& var, const std::string& help);
  bool given(const std::string& name) const {
    auto it = options.find(name);
    return it != options.end() && it->second->count() > 0;
  }
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    std::string cell = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    cell.erase(0, cell.find_first_not_of(' '));
    cell.erase(cell.find_last_not_of(' ') + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
      throw DimensionError("--" + what + ": expected a comma-separated list of numbers, got '" + text + "'");
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

CLI::Option* Registry::list(const std::string& name, std::string& var, const std::string& help) {
  CLI::Option* o = app->add_option("--" + name, var, help)->capture_default_str();
  fields.emplace_back(name, [&var, name] {
    if (var.empty()) return json(nullptr);
    return json(parse_list(var, name));
  });
  options[name] = o;
  return o;
}

std::vector<Index> parse_index_list(const std::string& text, const std::string& what) {
  std::vector<Index> out;
  for (double v : parse_list(text, what)) {
    if (v != std::floor(v) || v < 1) throw DimensionError("--" + what + ": entries must be positive integers");
    out.push_back(static_cast<Index>(v));
  }
  return out;
}

std::string escape(std::string s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out;
}

int report_error(std::ostream& err, const char* category, const std::string& message, int code) {
  err << "error category=" << category << " message=\"" << escape(message) << "\"\n";
  return code;
}

std::string json_to_arg(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + json_to_arg(v[i]);
    return s;
  }
  return v.dump();
}

// Config values become ordinary flags placed before the explicit ones, so
// that explicit flags take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      if (i + 1 >= args.size()) throw DimensionError("--config needs a file argument");
      path = args[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      path = a.substr(9);
    } else {
      rest.push_back(a);
    }
  }
  if (!path) return rest;
  json doc;
  try {
    doc = json::parse(read_text_file(*path));
  } catch (const json::exception& e) {
    throw InputError("config '" + *path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw InputError("config '" + *path + "' must hold a JSON object");
  std::string command;
  if (!rest.empty() && std::find(kCommands.begin(), kCommands.end(), rest.front()) != kCommands.end()) {
    command = rest.front();
    rest.erase(rest.begin());
  } else if (doc.contains("command")) {
    command = doc["command"].get<std::string>();
  } else {
    throw DimensionError("no command given");
  }
  std::vector<std::string> out = {command};
  for (const auto& [key, value] : doc.items()) {
    if (key == "command" || key == "config" || value.is_null()) continue;
    if (value.is_boolean()) {
      out.push_back("--" + key + "=" + (value.get<bool>() ? "true" : "false"));
    } else {
      out.push_back("--" + key);
      out.push_back(json_to_arg(value));
    }
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

ProposalConfig proposal_from(const Options& o) {
  ProposalConfig c;
  c.kind = parse_proposal_kind(o.proposal);
  c.scale = o.scale;
  c.leapfrog_steps = o.leapfrog_steps;
  c.fd_step = o.fd_step;
  c.gradient = parse_gradient_mode(o.gradient);
  if (!o.block_scales.empty()) {
    const auto v = parse_list(o.block_scales, "block-scales");
    if (v.size() != 2) throw DimensionError("--block-scales needs two values: b-block,A-block");
    c.per_block_scales = std::make_pair(v[0], v[1]);
  }
  c.validate();
  return c;
}

RunConfig run_from(const Options& o) {
  RunConfig r;
  r.iterations = o.iters;
  r.burn_in = o.burn;
  r.thin = o.thin;
  r.seed = o.seed;
  r.adapt = !o.no_adapt;
  r.target_acceptance = o.target_acceptance;
  r.validate();
  return r;
}

SpikedDataSpec spiked_from(const Options& o, std::uint64_t data_seed) {
  SpikedDataSpec s;
  s.n = o.n;
  s.p = o.p;
  s.k = o.k;
  s.sigma2 = o.sigma2;
  const auto l = parse_list(o.lambda, "lambda");
  s.lambda = Eigen::Map<const Vector>(l.data(), static_cast<Index>(l.size()));
  s.seed = data_seed;
  s.validate();
  return s;
}

void write_manifest(const std::filesystem::path& dir, const std::string& command, const Registry& reg) {
  json m;
  m["command"] = command;
  for (const auto& [name, get] : reg.fields) m[name] = get();
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

struct Context {
  Options o;
  Registry reg;
  std::ostream* out = nullptr;
};

int cmd_sample(Context& ctx) {
  const Options& o = ctx.o;
  const ManifoldDims dims(o.p, o.k);
  const Manifold manifold = parse_manifold(o.manifold);
  const ProposalConfig proposal = proposal_from(o);
  const RunConfig run = run_from(o);
  if (o.chains < 1) throw DimensionError("--chains must be positive");
  if (o.init != "zero" && o.init != "haar" && o.init != "mode") {
    throw DimensionError("--init must be zero, haar or mode");
  }
  LogDensity g;
  std::optional<Matrix> mode;
  if (o.target == "uniform") {
    if (o.init == "mode") throw DimensionError("--init mode needs the bingham target");
    g = uniform_log_density(manifold);
  } else if (o.target == "bingham") {
    const bool from_file = !o.data_path.empty();
    const bool simulated = ctx.reg.given("n");
    if (!from_file && !simulated) {
      throw DimensionError("bingham target needs --data <csv> or a simulated data spec (--n ...)");
    }
    const auto l = parse_list(o.lambda, "lambda");
    Vector lambda = Eigen::Map<const Vector>(l.data(), static_cast<Index>(l.size()));
    Matrix y;
    if (from_file) {
      y = read_matrix_csv(o.data_path).values;
      if (y.cols() != o.p) throw InputError("data matrix has " + std::to_string(y.cols()) + " columns, expected p");
    } else {
      y = simulate_spiked_data(spiked_from(o, o.data_seed)).y;
    }
    const BinghamParams params = BinghamParams::from_data(y, o.sigma2, lambda);
    if (params.lambda().size() != o.k) throw DimensionError("--lambda must have k entries");
    mode = params.mode_frame();
    g = bingham_log_density(params, manifold);
  } else {
    throw DimensionError("unknown target '" + o.target + "' (expected uniform or bingham)");
  }
  const PullbackTarget target(g, dims);

  std::vector<Vector> inits;
  for (std::size_t c = 0; c < o.chains; ++c) {
    Matrix q;
    if (o.init == "zero") {
      inits.push_back(Vector::Zero(target.dim()));
      continue;
    }
    if (o.init == "mode") {
      q = *mode;
    } else {
      Rng rng(o.seed, 0x1217 + c);
      q = haar_stiefel(o.p, o.k, rng).matrix();
    }
    if (manifold == Manifold::kStiefel) {
      inits.push_back(init_from_manifold(StiefelPoint(q)));
    } else {
      inits.push_back(init_from_manifold(canonicalize_grassmann(StiefelPoint(q))));
    }
  }
  const std::vector<SampleBatch> batches = run_chains(target, inits, proposal, run);

  ExperimentReport report;
  report.name = "sample";
  report.config = {{"manifold", o.manifold}, {"p", o.p},         {"k", o.k}, {"target", o.target},
                   {"proposal", to_json(proposal)}, {"run", to_json(run)}, {"chains", o.chains},
                   {"init", o.init}};
  json per_chain = json::array();
  for (std::size_t c = 0; c < batches.size(); ++c) {
    per_chain.push_back({{"acceptance_rate", batches[c].acceptance_rate},
                         {"final_scale", batches[c].final_scale},
                         {"draws", batches[c].coords_draws.size()}});
    report.tables[batches.size() == 1 ? "draws" : "draws_chain" + std::to_string(c)] = draws_table(batches[c]);
  }
  report.metrics["chains"] = per_chain;
  const std::filesystem::path dir(o.out_dir);
  write_report(report, dir, {o.record_runtime});
  write_manifest(dir, "sample", ctx.reg);
  for (std::size_t c = 0; c < batches.size(); ++c) {
    *ctx.out << "chain " << c << ": draws=" << batches[c].coords_draws.size()
             << " acceptance_rate=" << format_double(batches[c].acceptance_rate) << "\n";
  }
  return kOk;
}

int cmd_jacobian(Context& ctx) {
  const Options& o = ctx.o;
  const ManifoldDims dims(o.p, o.k);
  const Manifold manifold = parse_manifold(o.manifold);
  if (o.coords_path.empty()) throw DimensionError("jacobian needs --coords <csv>");
  const Matrix coords = read_matrix_csv(o.coords_path).values;
  const Index d = manifold == Manifold::kStiefel ? dims.stiefel_dim() : dims.grassmann_dim();
  if (coords.cols() != d) {
    throw InputError("coordinate file has " + std::to_string(coords.cols()) + " columns, expected " +
                     std::to_string(d));
  }
  Matrix table(coords.rows(), 3);
  for (Index r = 0; r < coords.rows(); ++r) {
    const Vector x = coords.row(r).transpose();
    double block = 0.0;
    double naive = 0.0;
    if (manifold == Manifold::kStiefel) {
      const StiefelCoords phi(dims, x);
      block = log_jacobian_block_stiefel(phi);
      naive = log_jacobian_naive(derivative_stiefel(phi));
    } else {
      const GrassmannCoords psi(dims, x);
      block = log_jacobian_block_grassmann(psi);
      naive = log_jacobian_naive(derivative_grassmann(psi));
    }
    table(r, 0) = static_cast<double>(r);
    table(r, 1) = block;
    table(r, 2) = naive;
  }
  *ctx.out << "row,block,naive\n";
  for (Index r = 0; r < table.rows(); ++r) {
    *ctx.out << r << ',' << format_double(table(r, 1)) << ',' << format_double(table(r, 2)) << '\n';
  }
  if (!o.out_dir.empty()) {
    const std::filesystem::path dir(o.out_dir);
    write_matrix_csv(dir / "jacobian.csv", table,
                     {{"columns", "row;block;naive"}, {"manifold", o.manifold}, {"p", std::to_string(o.p)},
                      {"k", std::to_string(o.k)}});
    write_manifest(dir, "jacobian", ctx.reg);
  }
  return kOk;
}

void print_metrics(std::ostream& out, const ExperimentReport& r) {
  out << r.name << " " << r.metrics.dump() << "\n";
  out << "runtime_seconds " << r.runtime_seconds << "\n";
}

int cmd_uniform(Context& ctx) {
  const Options& o = ctx.o;
  const ManifoldDims dims(o.p, o.k);
  UniformExperimentOptions opt = default_uniform_options(o.p);
  opt.burn_in = o.burn;
  opt.thin = o.thin;
  opt.bins = o.bins;
  opt.save_draws = o.save_draws;
  if (o.thin < 1) throw DimensionError("--thin must be positive");
  const ExperimentReport r = run_uniform_experiment(o.p, o.k, o.draws, o.seed, opt);
  write_report(r, o.out_dir, {o.record_runtime});
  write_manifest(o.out_dir, "uniform-exp", ctx.reg);
  print_metrics(*ctx.out, r);
  return kOk;
}

int cmd_bingham(Context& ctx) {
  const Options& o = ctx.o;
  const SpikedDataSpec spec = spiked_from(o, o.data_seed);
  RunConfig run = default_bingham_run(o.seed);
  run.iterations = o.iters;
  run.burn_in = o.burn;
  run.thin = o.thin;
  run.validate();
  BinghamExperimentOptions opt = default_bingham_options();
  opt.bins = o.bins;
  opt.max_lag = o.max_lag;
  opt.save_draws = o.save_draws;
  const ExperimentReport r = run_bingham_experiment(spec, run, opt);
  write_report(r, o.out_dir, {o.record_runtime});
  write_manifest(o.out_dir, "bingham-exp", ctx.reg);
  print_metrics(*ctx.out, r);
  return kOk;
}

int cmd_normal(Context& ctx) {
  const Options& o = ctx.o;
  const ExperimentReport r =
      run_normal_approx_experiment(o.k, parse_index_list(o.p_grid, "p-grid"), o.replicates, o.seed);
  write_report(r, o.out_dir, {o.record_runtime});
  write_manifest(o.out_dir, "normal-approx-exp", ctx.reg);
  print_metrics(*ctx.out, r);
  return kOk;
}

int cmd_roundtrip(Context& ctx) {
  const Options& o = ctx.o;
  const ManifoldDims dims(o.p, o.k);
  const Manifold manifold = parse_manifold(o.manifold);
  if (o.instances < 1) throw DimensionError("--instances must be positive");
  double coords_err = 0.0;
  double frame_err = 0.0;
  for (std::size_t i = 0; i < o.instances; ++i) {
    Rng rng(o.seed, i);
    const StiefelPoint haar = haar_stiefel(o.p, o.k, rng);
    if (manifold == Manifold::kStiefel) {
      const StiefelCoords phi(dims, o.coord_scale * rng.normal_vector(dims.stiefel_dim()));
      const Vector back = cayley_inverse_stiefel(cayley_forward_stiefel(phi)).values();
      coords_err = std::max(coords_err, (back - phi.values()).cwiseAbs().maxCoeff());
      const Matrix q = cayley_forward_stiefel(cayley_inverse_stiefel(haar)).matrix();
      frame_err = std::max(frame_err, (q - haar.matrix()).cwiseAbs().maxCoeff());
    } else {
      const GrassmannPoint q0 = canonicalize_grassmann(haar);
      const GrassmannCoords psi = cayley_inverse_grassmann(q0);
      const Matrix q = cayley_forward_grassmann(psi).matrix();
      frame_err = std::max(frame_err, (q - q0.matrix()).cwiseAbs().maxCoeff());
      const Vector back = cayley_inverse_grassmann(cayley_forward_grassmann(psi)).values();
      coords_err = std::max(coords_err, (back - psi.values()).cwiseAbs().maxCoeff());
    }
  }
  const bool pass = coords_err <= 1e-10 && frame_err <= 1e-10;
  *ctx.out << "roundtrip manifold=" << o.manifold << " p=" << o.p << " k=" << o.k << " instances=" << o.instances
           << " max_coords_error=" << format_double(coords_err) << " max_frame_error=" << format_double(frame_err)
           << " " << (pass ? "PASS" : "FAIL") << "\n";
  if (!o.out_dir.empty()) {
    ExperimentReport r;
    r.name = "roundtrip-check";
    r.config = {{"manifold", o.manifold}, {"p", o.p}, {"k", o.k}, {"instances", o.instances}, {"seed", o.seed}};
    r.metrics = {{"max_coords_error", coords_err}, {"max_frame_error", frame_err}, {"pass", pass}};
    write_report(r, o.out_dir);
    write_manifest(o.out_dir, "roundtrip-check", ctx.reg);
  }
  if (!pass) throw NumericalError("round-trip error exceeds 1e-10");
  return kOk;
}

void add_common(Registry& r, Options& o, bool with_manifold) {
  if (with_manifold) r.add("manifold", o.manifold, "stiefel or grassmann");
  r.add("p", o.p, "ambient dimension")->required();
  r.add("k", o.k, "number of columns")->required();
}

void add_sampler(Registry& r, Options& o) {
  r.add("iters", o.iters, "total iterations, burn-in included");
  r.add("burn", o.burn, "burn-in iterations");
  r.add("thin", o.thin, "keep every thin-th draw");
  r.flag("no-adapt", o.no_adapt, "disable scale adaptation during burn-in");
  r.add("target-acceptance", o.target_acceptance, "adaptation target");
  r.add("proposal", o.proposal, "random-walk-gaussian or leapfrog");
  r.add("scale", o.scale, "initial random-walk scale or leapfrog step");
  r.list("block-scales", o.block_scales, "relative scales b-block,A-block");
  r.add("leapfrog-steps", o.leapfrog_steps, "leapfrog steps per proposal");
  r.add("fd-step", o.fd_step, "finite-difference step");
  r.add("gradient", o.gradient, "finite-difference or gaussian-approximation");
}

void add_spiked(Registry& r, Options& o) {
  r.add("n", o.n, "number of observations");
  r.add("sigma2", o.sigma2, "noise variance");
  r.list("lambda", o.lambda, "spike strengths, strictly decreasing");
  r.add("data-seed", o.data_seed, "seed for simulated data (default: --seed)");
}

}  // namespace

int parse_and_dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.out = &out;
  Options& o = ctx.o;
  try {
    std::vector<std::string> args = expand_config(raw_args);

    // Command-specific defaults.
    const std::string command = args.empty() ? std::string() : args.front();
    if (command == "uniform-exp") {
      o.burn = 1000;
      o.thin = 2;
    } else if (command == "bingham-exp") {
      o.p = 50;
      o.k = 3;
      o.bins = 30;
    } else if (command == "normal-approx-exp") {
      o.k = 3;
    }

    CLI::App app{"Cayley-transform parametrizations of Stiefel and Grassmann manifolds: sampling, "
                 "Jacobians and experiments",
                 "cayley"};
    app.require_subcommand(1);
    app.add_option("--config", "JSON file of option values; explicit flags take precedence");
    std::map<std::string, Registry> regs;
    std::map<std::string, std::function<int(Context&)>> handlers;
    auto sub = [&](const std::string& name, const std::string& help) {
      CLI::App* s = app.add_subcommand(name, help);
      s->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
      Registry& r = regs[name];
      r.app = s;
      return std::ref(r);
    };

    {
      Registry& r = sub("sample", "run an MCMC chain and write draws");
      add_common(r, o, true);
      r.add("target", o.target, "uniform or bingham");
      r.add("data", o.data_path, "n x p data matrix (CSV) for the bingham target; takes precedence over --n");
      add_spiked(r, o);
      add_sampler(r, o);
      r.add("init", o.init, "zero, haar or mode");
      r.add("chains", o.chains, "independent chains (streams 0..chains-1)");
      r.add("seed", o.seed, "random seed")->required();
      r.add("out", o.out_dir, "output directory")->required();
      r.flag("record-runtime", o.record_runtime, "store wall-clock time in report.json");
      handlers["sample"] = cmd_sample;
    }
    {
      Registry& r = sub("jacobian", "log-Jacobian per coordinate row, block and naive");
      add_common(r, o, true);
      r.add("coords", o.coords_path, "CSV with one coordinate vector per row")->required();
      r.add("out", o.out_dir, "optional output directory");
      handlers["jacobian"] = cmd_jacobian;
    }
    {
      Registry& r = sub("uniform-exp", "uniform sampling study");
      add_common(r, o, false);
      r.add("draws", o.draws, "retained draws");
      r.add("burn", o.burn, "burn-in iterations");
      r.add("thin", o.thin, "keep every thin-th draw");
      r.add("bins", o.bins, "histogram bins");
      r.flag("save-draws", o.save_draws, "also write every draw");
      r.add("seed", o.seed, "random seed")->required();
      r.add("out", o.out_dir, "output directory")->required();
      r.flag("record-runtime", o.record_runtime, "store wall-clock time in report.json");
      handlers["uniform-exp"] = cmd_uniform;
    }
    {
      Registry& r = sub("bingham-exp", "spiked-covariance Bingham posterior study");
      r.add("p", o.p, "ambient dimension");
      r.add("k", o.k, "number of columns");
      add_spiked(r, o);
      r.add("iters", o.iters, "total iterations, burn-in included");
      r.add("burn", o.burn, "burn-in iterations");
      r.add("thin", o.thin, "keep every thin-th draw");
      r.add("bins", o.bins, "histogram bins");
      r.add("max-lag", o.max_lag, "largest autocorrelation lag");
      r.flag("save-draws", o.save_draws, "also write every draw");
      r.add("seed", o.seed, "random seed")->required();
      r.add("out", o.out_dir, "output directory")->required();
      r.flag("record-runtime", o.record_runtime, "store wall-clock time in report.json");
      handlers["bingham-exp"] = cmd_bingham;
    }
    {
      Registry& r = sub("normal-approx-exp", "coupling of Cayley coordinates with Gaussians");
      r.add("k", o.k, "number of columns");
      r.list("p-grid", o.p_grid, "comma-separated ambient dimensions");
      r.add("replicates", o.replicates, "replicates per p");
      r.add("seed", o.seed, "random seed")->required();
      r.add("out", o.out_dir, "output directory")->required();
      r.flag("record-runtime", o.record_runtime, "store wall-clock time in report.json");
      handlers["normal-approx-exp"] = cmd_normal;
    }
    {
      Registry& r = sub("roundtrip-check", "forward/inverse Cayley round trips on random instances");
      add_common(r, o, true);
      r.add("instances", o.instances, "random instances");
      r.add("coord-scale", o.coord_scale, "standard deviation of random coordinates");
      r.add("seed", o.seed, "random seed")->required();
      r.add("out", o.out_dir, "optional output directory");
      handlers["roundtrip-check"] = cmd_roundtrip;
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
      return report_error(err, "usage", e.what(), kUsage);
    }
    for (auto& [name, reg] : regs) {
      if (!reg.app->parsed()) continue;
      if (!reg.given("data-seed")) o.data_seed = o.seed;
      ctx.reg = reg;
      return handlers[name](ctx);
    }
    return report_error(err, "usage", "no command given", kUsage);
  } catch (const Error& e) {
    const int code = e.category() == ErrorCategory::kUsage   ? kUsage
                     : e.category() == ErrorCategory::kInput ? kInput
                                                             : kNumerical;
    return report_error(err, category_name(e.category()), e.what(), code);
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error(err, "input", e.what(), kInput);
  } catch (const std::exception& e) {
    return report_error(err, "internal", e.what(), kInternal);
  }
}

int parse_and_dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_and_dispatch(args, std::cout, std::cerr);
}

}  // namespace cayley::cli
