#include "srlpm/cli/app.hpp"

#include "srlpm/altmin.hpp"
#include "srlpm/cli/manifest.hpp"
#include "srlpm/dense_oracle.hpp"
#include "srlpm/graph_io.hpp"
#include "srlpm/io.hpp"
#include "srlpm/metrics.hpp"
#include "srlpm/quadmin.hpp"
#include "srlpm/rsvd.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace srlpm::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

class UsageError : public Error {
 public:
  using Error::Error;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void report_error(std::ostream& err, const std::string& kind,
                  const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

// ---------------------------------------------------------------- graphs

struct GraphArgs {
  std::string path;
  bool symmetrize = false;
  bool drop_self_loops = true;
};

struct LoadedGraph {
  NormalizedAdjacency a;
  std::vector<std::uint64_t> raw_ids;  // empty for binary dumps
};

void add_graph_options(CLI::App* sub, GraphArgs& g) {
  sub->add_option("--graph", g.path, "SNAP edge list or SRLG1 graph dump")
      ->required();
  sub->add_flag("--symmetrize", g.symmetrize,
                "also insert the reverse of every edge");
  sub->add_flag("--drop-self-loops,!--keep-self-loops", g.drop_self_loops,
                "remove edges i -> i (default on)");
}

bool starts_with_magic(const std::string& path, const char* magic) {
  std::ifstream in(path, std::ios::binary);
  char buf[5] = {};
  return in.read(buf, 5) && std::memcmp(buf, magic, 5) == 0;
}

void require_file(const std::string& path, const std::string& what) {
  if (!fs::is_regular_file(path)) {
    throw Error(what + " '" + path + "' does not exist or is not a file");
  }
}

LoadedGraph load_graph(const GraphArgs& g) {
  require_file(g.path, "graph");
  LoadedGraph out;
  if (starts_with_magic(g.path, "SRLG1")) {
    if (g.symmetrize) {
      throw UsageError("--symmetrize only applies to edge-list input");
    }
    std::ifstream in(g.path, std::ios::binary);
    out.a = read_graph(in);
    return out;
  }
  const EdgeList el = read_edge_list_file(g.path);
  out.a = build_adjacency(el, {g.symmetrize, g.drop_self_loops});
  out.raw_ids = el.raw_ids;
  return out;
}

json graph_json(const GraphArgs& g, const NormalizedAdjacency& a) {
  return {{"path", g.path},
          {"symmetrize", g.symmetrize},
          {"drop_self_loops", g.drop_self_loops},
          {"n", a.n()},
          {"nnz", a.nnz()}};
}

// Dense index -> raw id, one pair per line.
void write_id_map(const std::string& path, const std::vector<std::uint64_t>& ids) {
  write_file_atomic(path, [&](std::ostream& out) {
    out << "# index raw_id\n";
    for (std::size_t i = 0; i < ids.size(); ++i) out << i << ' ' << ids[i] << '\n';
  });
}

std::string id_map_path_for(const std::string& output) { return output + ".ids"; }

void check_rank(Index rank, Index n) {
  if (rank < 1 || rank > n) {
    throw UsageError("rank " + std::to_string(rank) + " outside [1, " +
                     std::to_string(n) + "]");
  }
}

void check_top_n(const std::vector<Index>& top_ns, Index n) {
  if (top_ns.empty()) throw UsageError("--top-n needs at least one value");
  for (Index t : top_ns) {
    if (t < 1 || t >= n) {
      throw UsageError("--top-n " + std::to_string(t) +
                       " must lie in [1, n - 1] with n = " + std::to_string(n));
    }
  }
}

RunManifest start_manifest(const std::string& subcommand,
                           const std::vector<std::string>& args) {
  RunManifest m;
  m.subcommand = subcommand;
  m.argv = args;
  return m;
}

void add_input(RunManifest& m, const std::string& path) {
  m.inputs.push_back({path, git_blob_sha1(path)});
}

// ---------------------------------------------------------------- solvers

struct SolverArgs {
  std::string solver;
  Index rank = 0;
  std::uint64_t seed = 0;
  double c = kDefaultDecay;
  int outer = 20;
  int inner = 5;
  int newton_iters = 30;
  int gmres_iters = 15;
  double gmres_tol = 1e-6;
  double init_scale = 0.0;  // 0: solver default
  Index oversample = 10;
  double tol = 1e-6;
  int max_iter = 30;
};

void add_solver_options(CLI::App* sub, SolverArgs& s, bool with_rank) {
  sub->add_option("solver", s.solver, "altmin | quadmin | rsvd")
      ->required()
      ->check(CLI::IsMember({"altmin", "quadmin", "rsvd"}));
  if (with_rank) sub->add_option("--rank", s.rank, "factor rank r")->required();
  sub->add_option("--c", s.c, "decay constant")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--outer", s.outer, "altmin outer iterations")
      ->capture_default_str();
  sub->add_option("--inner", s.inner, "altmin inner updates per block")
      ->capture_default_str();
  sub->add_option("--newton-iters", s.newton_iters, "quadmin Newton steps")
      ->capture_default_str();
  sub->add_option("--gmres-iters", s.gmres_iters,
                  "quadmin GMRES iterations per Newton step")
      ->capture_default_str();
  sub->add_option("--gmres-tol", s.gmres_tol, "quadmin GMRES relative tolerance")
      ->capture_default_str();
  sub->add_option("--init-scale", s.init_scale,
                  "quadmin start standard deviation (default 1/sqrt(r))")
      ->check(CLI::PositiveNumber);
  sub->add_option("--oversample", s.oversample, "rsvd oversampling p")
      ->capture_default_str();
  sub->add_option("--tol", s.tol, "relative stopping tolerance")
      ->capture_default_str();
  sub->add_option("--max-iter", s.max_iter, "rsvd iterations")
      ->capture_default_str();
}

AltMinConfig altmin_config(const SolverArgs& s, Index rank, std::uint64_t seed) {
  AltMinConfig cfg;
  cfg.rank = rank;
  cfg.outer_iters = s.outer;
  cfg.inner_iters = s.inner;
  cfg.seed = seed;
  cfg.stop_tol = s.tol;
  cfg.c = s.c;
  return cfg;
}

QuadMinConfig quadmin_config(const SolverArgs& s, Index rank,
                             std::uint64_t seed) {
  QuadMinConfig cfg;
  cfg.rank = rank;
  cfg.newton_iters = s.newton_iters;
  cfg.gmres_iters = s.gmres_iters;
  cfg.gmres_tol = s.gmres_tol;
  cfg.seed = seed;
  if (s.init_scale > 0.0) cfg.init_scale = s.init_scale;
  cfg.c = s.c;
  cfg.step_tol = s.tol;
  return cfg;
}

RsvdConfig rsvd_config(const SolverArgs& s, Index rank, std::uint64_t seed) {
  RsvdConfig cfg;
  cfg.rank = rank;
  cfg.oversample = s.oversample;
  cfg.max_iters = s.max_iter;
  cfg.seed = seed;
  cfg.stop_tol = s.tol;
  cfg.c = s.c;
  return cfg;
}

json solver_json(const SolverArgs& s, Index rank, std::uint64_t seed) {
  json j = {{"solver", s.solver}, {"rank", rank}, {"seed", seed}, {"c", s.c},
            {"tol", s.tol}};
  if (s.solver == "altmin") {
    j["outer"] = s.outer;
    j["inner"] = s.inner;
  } else if (s.solver == "quadmin") {
    j["newton_iters"] = s.newton_iters;
    j["gmres_iters"] = s.gmres_iters;
    j["gmres_tol"] = s.gmres_tol;
    j["init_scale"] = s.init_scale > 0.0 ? json(s.init_scale) : json();
  } else {
    j["oversample"] = s.oversample;
    j["max_iter"] = s.max_iter;
  }
  return j;
}

// Checks every config field the solver would reject, as a usage error.
void validate_solver(const SolverArgs& s, Index rank, Index n) {
  check_rank(rank, n);
  try {
    if (s.solver == "altmin") {
      validate(altmin_config(s, rank, 0), n);
    } else if (s.solver == "quadmin") {
      validate(quadmin_config(s, rank, 0), n);
    } else {
      validate(rsvd_config(s, rank, 0), n);
    }
  } catch (const DimensionError& e) {
    throw UsageError(e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

struct SolveOutcome {
  AnyFactor factor;
  std::string trace_csv;
  std::string summary;
  std::optional<std::string> failure;
  std::vector<std::string> warnings;
};

struct TraceOptions {
  bool exact_residual = false;  // quadmin
  Index residual_samples = 0;   // altmin
};

SolveOutcome run_solver(const SolverArgs& s, const NormalizedAdjacency& a,
                        Index rank, std::uint64_t seed,
                        const TraceOptions& trace) {
  SolveOutcome out;
  std::ostringstream csv;
  csv << std::setprecision(17);
  if (s.solver == "altmin") {
    const AltMinConfig cfg = altmin_config(s, rank, seed);
    std::optional<ShiftMatrix> b;
    if (trace.residual_samples > 0) b = build_shift(a, s.c);
    csv << "outer,u_change,v_change,pinv_rank_deficient";
    if (b) csv << ",frobenius_residual,frobenius_squared_se";
    csv << "\n";
    auto observer = [&](const AltMinIterate& it, const FactorPair& f) {
      csv << it.outer << ',' << it.u_change << ',' << it.v_change << ','
          << (it.pinv_rank_deficient ? 1 : 0);
      if (b) {
        FrobeniusOptions opts;
        opts.mode = FrobeniusOptions::Mode::sampled;
        opts.samples = trace.residual_samples;
        opts.seed = seed;
        const FrobeniusResidual r =
            frobenius_residual(Approximation(f), a, *b, s.c, opts);
        csv << ',' << r.value << ',' << r.squared_standard_error.value_or(0.0);
      }
      csv << "\n";
    };
    AltMinResult res = run_altmin(a, cfg, observer);
    out.summary = "outer iterations " + std::to_string(res.outer_done) +
                  (res.converged ? ", converged" : ", iteration limit reached");
    out.failure = res.failure;
    out.factor = std::move(res.factors);
  } else if (s.solver == "quadmin") {
    QuadMinConfig cfg = quadmin_config(s, rank, seed);
    if (trace.exact_residual) cfg.residual_mode = ResidualMode::exact_dense;
    csv << "iter,grad_norm,step_norm,gmres_residual,f_exact\n";
    auto observer = [&](const QuadMinIterate& it, const SymmetricFactor&) {
      csv << it.iter << ',' << it.grad_norm << ',' << it.step_norm << ','
          << it.gmres_residual << ',';
      if (it.f_exact) csv << *it.f_exact;
      csv << "\n";
    };
    QuadMinResult res = run_quadmin(a, cfg, observer);
    out.summary = "newton steps " + std::to_string(res.trace.size()) +
                  (res.converged ? ", converged" : ", iteration limit reached");
    out.failure = res.failure;
    out.factor = std::move(res.factor);
  } else {
    const RsvdConfig cfg = rsvd_config(s, rank, seed);
    csv << "iter,sigma_change,sigma_max,sigma_min\n";
    auto observer = [&](const RsvdIterate& it, const SpectralFactor&) {
      csv << it.iter << ',' << it.sigma_change << ',' << it.sigma_max << ','
          << it.sigma_min << "\n";
    };
    RsvdResult res = run_rsvd(a, cfg, observer);
    out.summary = "iterations " + std::to_string(res.trace.size()) +
                  (res.converged ? ", converged" : ", iteration limit reached");
    if (res.collapsed_rank) {
      out.warnings.push_back("singular values collapsed; achieved rank " +
                             std::to_string(*res.collapsed_rank));
    }
    out.factor = std::move(res.factor);
  }
  out.trace_csv = csv.str();
  return out;
}

void write_factor_file(const std::string& path, const AnyFactor& f, double c) {
  write_file_atomic(path, [&](std::ostream& os) { write_factors(os, f, c); });
}

void write_text(const std::string& path, const std::string& text) {
  write_file_atomic(path, [&](std::ostream& os) { os << text; });
}

std::string csv_field(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

std::string dataset_name(const std::string& path) {
  return fs::path(path).stem().string();
}

// ---------------------------------------------------------------- commands

struct Context {
  const std::vector<std::string>& args;
  std::ostream& out;
  std::ostream& err;
};

struct DenseArgs {
  GraphArgs graph;
  double c = kDefaultDecay;
  double tol = 1e-12;
  int max_iter = 1000;
  std::string out;
};

int cmd_dense(const DenseArgs& d, Context& ctx) {
  const auto t0 = Clock::now();
  const LoadedGraph g = load_graph(d.graph);
  require_dense_allowed(g.a.n(), "dense reference solve");
  FixedPointOptions opts;
  opts.c = d.c;
  opts.tol = d.tol;
  opts.max_iter = d.max_iter;
  const DenseSimilarity s = solve_fixed_point(g.a, opts);

  RunManifest m = start_manifest("dense", ctx.args);
  m.dataset = d.graph.path;
  add_input(m, d.graph.path);
  m.config = {{"graph", graph_json(d.graph, g.a)},
              {"c", d.c},
              {"tol", d.tol},
              {"max_iter", d.max_iter},
              {"iterations", s.iterations},
              {"final_step", s.residual_c},
              {"converged", s.converged}};
  write_file_atomic(d.out, [&](std::ostream& os) { write_dense(os, s.values, d.c); });
  m.outputs.push_back(d.out);
  if (!g.raw_ids.empty()) {
    write_id_map(id_map_path_for(d.out), g.raw_ids);
    m.outputs.push_back(id_map_path_for(d.out));
  }
  m.wall_time_s = seconds_since(t0);
  write_manifest(manifest_path_for(d.out), m);

  ctx.out << "n " << s.n() << " iterations " << s.iterations << " final_step "
          << num(s.residual_c) << (s.converged ? " converged" : " not converged")
          << "\n";
  if (!s.converged) {
    report_error(ctx.err, "warning",
                 "iteration limit reached before the step fell to tol");
  }
  return kExitOk;
}

struct SolveArgs {
  GraphArgs graph;
  SolverArgs solver;
  TraceOptions trace;
  std::string out;
};

int cmd_solve(const SolveArgs& s, Context& ctx) {
  const auto t0 = Clock::now();
  const LoadedGraph g = load_graph(s.graph);
  validate_solver(s.solver, s.solver.rank, g.a.n());
  if (s.trace.exact_residual) require_dense_allowed(g.a.n(), "exact residual trace");

  SolveOutcome res = run_solver(s.solver, g.a, s.solver.rank, s.solver.seed, s.trace);
  const double solve_time = seconds_since(t0);

  RunManifest m = start_manifest("solve", ctx.args);
  m.dataset = s.graph.path;
  add_input(m, s.graph.path);
  m.config = {{"graph", graph_json(s.graph, g.a)},
              {"solver", solver_json(s.solver, s.solver.rank, s.solver.seed)},
              {"exact_residual", s.trace.exact_residual},
              {"residual_samples", s.trace.residual_samples}};
  write_factor_file(s.out, res.factor, s.solver.c);
  m.outputs.push_back(s.out);
  const std::string trace_path = s.out + ".trace.csv";
  write_text(trace_path, res.trace_csv);
  m.outputs.push_back(trace_path);
  if (!g.raw_ids.empty()) {
    write_id_map(id_map_path_for(s.out), g.raw_ids);
    m.outputs.push_back(id_map_path_for(s.out));
  }
  m.wall_time_s = solve_time;
  write_manifest(manifest_path_for(s.out), m);

  ctx.out << s.solver.solver << " n " << g.a.n() << " rank " << s.solver.rank
          << ": " << res.summary << ", " << num(solve_time) << " s\n";
  for (const auto& w : res.warnings) report_error(ctx.err, "warning", w);
  if (res.failure) {
    report_error(ctx.err, "divergence", *res.failure);
    return kExitFailure;
  }
  return kExitOk;
}

struct EvalArgs {
  std::string reference;
  std::string factors;
  std::vector<Index> top_n{10};
  std::string dataset;
  std::string out;
  std::string csv;
};

int cmd_eval(const EvalArgs& e, Context& ctx) {
  const auto t0 = Clock::now();
  require_file(e.reference, "reference");
  require_file(e.factors, "factor file");
  const FactorFile f = load_factors(e.factors);
  const DenseDump ref = load_dense(e.reference);
  if (ref.values.rows() != f.n()) {
    throw Error("reference has n = " + std::to_string(ref.values.rows()) +
                " but factors have n = " + std::to_string(f.n()));
  }
  check_top_n(e.top_n, f.n());
  const Approximation approx = f.approximation();

  EvalReport report;
  report.solver = to_string(f.kind());
  report.rank = f.rank();
  report.c = f.c;
  report.dataset = e.dataset.empty() ? dataset_name(e.reference) : e.dataset;
  report.chebyshev_error = chebyshev_error(ref.values, approx);
  report.psi = psi_many(ref.values, approx, e.top_n);
  report.wall_time_s = seconds_since(t0);

  // Prefer the solver's own seed and wall time when its manifest is around.
  const std::string solve_manifest = manifest_path_for(e.factors);
  if (fs::exists(solve_manifest)) {
    const RunManifest sm = read_manifest(solve_manifest);
    if (sm.subcommand == "solve") {
      const json& solver = sm.config.at("solver");
      report.seed = solver.at("seed").get<std::uint64_t>();
      report.wall_time_s = sm.wall_time_s;
      if (e.dataset.empty() && !sm.dataset.empty()) {
        report.dataset = dataset_name(sm.dataset);
      }
    }
  }

  const std::string text = to_json(report).dump(2) + "\n";
  RunManifest m = start_manifest("eval", ctx.args);
  m.dataset = report.dataset;
  add_input(m, e.reference);
  add_input(m, e.factors);
  m.config = {{"top_n", e.top_n}};
  if (!e.out.empty()) {
    write_text(e.out, text);
    m.outputs.push_back(e.out);
  } else {
    ctx.out << text;
  }
  if (!e.csv.empty()) {
    // Appending is not atomic by nature; the row is written in one call.
    const bool fresh = !fs::exists(e.csv) || fs::file_size(e.csv) == 0;
    std::ofstream os(e.csv, std::ios::app);
    if (!os) throw Error("cannot open '" + e.csv + "' for appending");
    if (fresh) os << csv_header(report) << "\n";
    os << csv_row(report) << "\n";
    if (!os.flush()) throw Error("write failed for '" + e.csv + "'");
    m.outputs.push_back(e.csv);
  }
  m.wall_time_s = seconds_since(t0);
  if (!e.out.empty()) write_manifest(manifest_path_for(e.out), m);
  return kExitOk;
}

struct SweepArgs {
  GraphArgs graph;
  SolverArgs solver;
  std::string reference;
  std::vector<Index> ranks;
  std::vector<std::uint64_t> seeds{0};
  std::vector<Index> top_n{10};
  int jobs = 1;
  bool keep_factors = false;
  std::string out;
};

struct Cell {
  Index rank = 0;
  std::uint64_t seed = 0;
  double chebyshev_error = 0.0;
  std::map<Index, double> psi;
  double wall_time = 0.0;
  std::optional<std::string> error;
};

int cmd_sweep(const SweepArgs& s, Context& ctx) {
  const auto t0 = Clock::now();
  if (s.ranks.empty()) throw UsageError("--ranks needs at least one value");
  if (s.seeds.empty()) throw UsageError("--seeds needs at least one value");
  if (s.jobs < 1) throw UsageError("--jobs must be at least 1");
  require_file(s.reference, "reference");
  const LoadedGraph g = load_graph(s.graph);
  const Index n = g.a.n();
  for (Index r : s.ranks) validate_solver(s.solver, r, n);
  check_top_n(s.top_n, n);
  const DenseDump ref = load_dense(s.reference);
  if (ref.values.rows() != n) {
    throw Error("reference has n = " + std::to_string(ref.values.rows()) +
                " but graph has n = " + std::to_string(n));
  }

  const std::string cell_dir = s.out + ".cells";
  std::vector<Cell> cells;
  for (Index r : s.ranks) {
    for (std::uint64_t seed : s.seeds) cells.push_back({r, seed, 0.0, {}, 0.0, {}});
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      Cell& cell = cells[i];
      try {
        const auto c0 = Clock::now();
        SolveOutcome res = run_solver(s.solver, g.a, cell.rank, cell.seed, {});
        cell.wall_time = seconds_since(c0);
        if (res.failure) throw DivergenceError(*res.failure);
        const Approximation approx = std::visit(
            [](const auto& f) { return Approximation(f); }, res.factor);
        cell.chebyshev_error = chebyshev_error(ref.values, approx);
        cell.psi = psi_many(ref.values, approx, s.top_n);
        if (s.keep_factors) {
          write_factor_file(cell_dir + "/r" + std::to_string(cell.rank) + "_s" +
                                std::to_string(cell.seed) + ".srlf",
                            res.factor, s.solver.c);
        }
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  };
  const int threads = std::min<int>(s.jobs, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << std::setprecision(17) << "rank,seed,chebyshev_error";
  for (Index t : s.top_n) csv << ",psi" << t;
  csv << ",wall_time,status\n";
  int failed = 0;
  for (const Cell& cell : cells) {
    csv << cell.rank << ',' << cell.seed << ',';
    if (cell.error) {
      ++failed;
      csv << std::string(s.top_n.size(), ',') << ',' << cell.wall_time << ','
          << "failed: " << csv_field(*cell.error) << "\n";
      report_error(ctx.err, "cell",
                   "rank " + std::to_string(cell.rank) + " seed " +
                       std::to_string(cell.seed) + ": " + *cell.error);
      continue;
    }
    csv << cell.chebyshev_error;
    for (Index t : s.top_n) csv << ',' << cell.psi.at(t);
    csv << ',' << cell.wall_time << ",ok\n";
  }
  write_text(s.out, csv.str());

  RunManifest m = start_manifest("sweep", ctx.args);
  m.dataset = s.graph.path;
  add_input(m, s.graph.path);
  add_input(m, s.reference);
  json solver = solver_json(s.solver, 0, 0);
  solver.erase("rank");
  solver.erase("seed");
  m.config = {{"graph", graph_json(s.graph, g.a)},
              {"solver", solver},
              {"ranks", s.ranks},
              {"seeds", s.seeds},
              {"top_n", s.top_n},
              {"jobs", s.jobs},
              {"failed_cells", failed}};
  m.outputs.push_back(s.out);
  if (s.keep_factors) m.outputs.push_back(cell_dir);
  m.wall_time_s = seconds_since(t0);
  write_manifest(manifest_path_for(s.out), m);

  ctx.out << cells.size() - static_cast<std::size_t>(failed) << " of "
          << cells.size() << " cells ok\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

struct SpectrumArgs {
  std::string reference;
  std::vector<Index> ranks;
  std::string out;
};

int cmd_spectrum(const SpectrumArgs& s, Context& ctx) {
  const auto t0 = Clock::now();
  require_file(s.reference, "reference");
  const DenseDump ref = load_dense(s.reference);
  const Index n = ref.values.rows();
  for (Index r : s.ranks) {
    if (r < 0 || r > n) {
      throw UsageError("rank " + std::to_string(r) + " outside [0, " +
                       std::to_string(n) + "]");
    }
  }
  const Vector plain = singular_spectrum(ref.values, false);
  const Vector shifted = singular_spectrum(ref.values, true);

  std::ostringstream csv;
  csv << std::setprecision(17) << "index,sigma,sigma_shift\n";
  bool dominated = true;
  for (Index k = 0; k < n; ++k) {
    csv << k + 1 << ',' << plain(k) << ',' << shifted(k) << "\n";
    if (k >= 1 && shifted(k) > plain(k)) dominated = false;
  }

  RunManifest m = start_manifest("spectrum", ctx.args);
  m.dataset = dataset_name(s.reference);
  add_input(m, s.reference);
  m.config = {{"ranks", s.ranks}};
  write_text(s.out, csv.str());
  m.outputs.push_back(s.out);
  if (!s.ranks.empty()) {
    const std::vector<double> errors = truncated_svd_errors(ref.values, s.ranks);
    std::ostringstream tcsv;
    tcsv << std::setprecision(17) << "rank,chebyshev_error\n";
    for (std::size_t i = 0; i < errors.size(); ++i) {
      tcsv << s.ranks[i] << ',' << errors[i] << "\n";
    }
    const std::string path = s.out + ".truncated.csv";
    write_text(path, tcsv.str());
    m.outputs.push_back(path);
  }
  m.wall_time_s = seconds_since(t0);
  write_manifest(manifest_path_for(s.out), m);

  ctx.out << "n " << n << " sigma_1(S) " << num(plain(0)) << " sigma_1(S-I) "
          << num(shifted(0)) << " shift dominated beyond index 1: "
          << (dominated ? "yes" : "no") << "\n";
  return kExitOk;
}

struct GraphDumpArgs {
  GraphArgs graph;
  std::string out;
};

int cmd_graph(const GraphDumpArgs& d, Context& ctx) {
  const auto t0 = Clock::now();
  const LoadedGraph g = load_graph(d.graph);
  RunManifest m = start_manifest("graph", ctx.args);
  m.dataset = d.graph.path;
  add_input(m, d.graph.path);
  m.config = {{"graph", graph_json(d.graph, g.a)}};
  write_file_atomic(d.out, [&](std::ostream& os) { write_graph(os, g.a); });
  m.outputs.push_back(d.out);
  if (!g.raw_ids.empty()) {
    write_id_map(id_map_path_for(d.out), g.raw_ids);
    m.outputs.push_back(id_map_path_for(d.out));
  }
  m.wall_time_s = seconds_since(t0);
  write_manifest(manifest_path_for(d.out), m);
  ctx.out << "n " << g.a.n() << " nnz " << g.a.nnz() << "\n";
  return kExitOk;
}

int run_parsed(const std::vector<std::string>& args, Context& ctx, int depth);

struct ReplayArgs {
  std::string manifest;
  bool skip_hash_check = false;
};

int cmd_replay(const ReplayArgs& r, Context& ctx, int depth) {
  require_file(r.manifest, "manifest");
  const RunManifest m = read_manifest(r.manifest);
  if (!r.skip_hash_check) {
    for (const auto& in : m.inputs) {
      require_file(in.path, "input");
      const std::string now = git_blob_sha1(in.path);
      if (now != in.sha1) {
        throw Error("input '" + in.path + "' changed since the manifest was "
                    "written (sha1 " + in.sha1 + ", now " + now + ")");
      }
    }
  }
  if (m.argv.empty() || m.argv.front() == "replay") {
    throw ParseError("manifest '" + r.manifest + "' holds no replayable command");
  }
  return run_parsed(m.argv, ctx, depth + 1);
}

int run_parsed(const std::vector<std::string>& args, Context& outer, int depth) {
  Context ctx{args, outer.out, outer.err};
  CLI::App app("Low-parametric SimRank: dense reference, factored solvers, "
               "evaluation and sweeps",
               "srlpm");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  DenseArgs dense;
  auto* dense_cmd = app.add_subcommand("dense", "dense fixed-point reference solve");
  add_graph_options(dense_cmd, dense.graph);
  dense_cmd->add_option("--c", dense.c, "decay constant")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  dense_cmd->add_option("--tol", dense.tol, "Chebyshev step tolerance")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  dense_cmd->add_option("--max-iter", dense.max_iter, "iteration limit")
      ->capture_default_str();
  dense_cmd->add_option("--out", dense.out, "SRDS1 output path")->required();

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "run a factored solver");
  add_graph_options(solve_cmd, solve.graph);
  add_solver_options(solve_cmd, solve.solver, true);
  solve_cmd->add_option("--seed", solve.solver.seed, "random seed")
      ->capture_default_str();
  solve_cmd->add_flag("--exact-residual", solve.trace.exact_residual,
                      "quadmin: record the exact f in the trace (dense)");
  solve_cmd->add_option("--residual-samples", solve.trace.residual_samples,
                        "altmin: sampled Frobenius residual per outer iteration");
  solve_cmd->add_option("--out", solve.out, "SRLF1 output path")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "compare factors with a dense reference");
  eval_cmd->add_option("--reference", eval.reference, "SRDS1 dense reference")
      ->required();
  eval_cmd->add_option("--factors", eval.factors, "SRLF1 factor file")->required();
  eval_cmd->add_option("--top-n", eval.top_n, "N values for Psi(N)")
      ->delimiter(',')
      ->capture_default_str();
  eval_cmd->add_option("--dataset", eval.dataset, "dataset label for the report");
  eval_cmd->add_option("--out", eval.out, "JSON report path (stdout if absent)");
  eval_cmd->add_option("--csv", eval.csv, "append a CSV row to this file");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "solver x rank x seed grid with evaluation");
  add_graph_options(sweep_cmd, sweep.graph);
  add_solver_options(sweep_cmd, sweep.solver, false);
  sweep_cmd->add_option("--reference", sweep.reference, "SRDS1 dense reference")
      ->required();
  sweep_cmd->add_option("--ranks", sweep.ranks, "ranks, comma separated")
      ->delimiter(',')
      ->required();
  sweep_cmd->add_option("--seeds", sweep.seeds, "seeds, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--top-n", sweep.top_n, "N values for Psi(N)")
      ->delimiter(',')
      ->capture_default_str();
  sweep_cmd->add_option("--jobs", sweep.jobs, "cells run in parallel")
      ->capture_default_str();
  sweep_cmd->add_flag("--keep-factors", sweep.keep_factors,
                      "write each cell's factors under <out>.cells/");
  sweep_cmd->add_option("--out", sweep.out, "aggregated CSV path")->required();

  SpectrumArgs spectrum;
  auto* spectrum_cmd =
      app.add_subcommand("spectrum", "singular values of S and S - I");
  spectrum_cmd->add_option("--reference", spectrum.reference, "SRDS1 dense reference")
      ->required();
  spectrum_cmd->add_option("--ranks", spectrum.ranks,
                           "ranks for truncated-SVD Chebyshev errors")
      ->delimiter(',');
  spectrum_cmd->add_option("--out", spectrum.out, "CSV output path")->required();

  GraphDumpArgs graph;
  auto* graph_cmd = app.add_subcommand("graph", "write the normalized adjacency as SRLG1");
  add_graph_options(graph_cmd, graph.graph);
  graph_cmd->add_option("--out", graph.out, "SRLG1 output path")->required();

  ReplayArgs replay;
  auto* replay_cmd = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay_cmd->add_option("--manifest", replay.manifest, "manifest JSON")->required();
  replay_cmd->add_flag("--skip-hash-check", replay.skip_hash_check,
                       "do not verify input hashes");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    // Also --help and --help-all.
    return app.exit(e, ctx.out, ctx.err);
  } catch (const CLI::ParseError& e) {
    report_error(ctx.err, "usage", e.what());
    return kExitUsage;
  }

  if (depth > 1) throw ParseError("replay nesting too deep");
  if (*dense_cmd) return cmd_dense(dense, ctx);
  if (*solve_cmd) return cmd_solve(solve, ctx);
  if (*eval_cmd) return cmd_eval(eval, ctx);
  if (*sweep_cmd) return cmd_sweep(sweep, ctx);
  if (*spectrum_cmd) return cmd_spectrum(spectrum, ctx);
  if (*graph_cmd) return cmd_graph(graph, ctx);
  return cmd_replay(replay, ctx, depth);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Context ctx{args, out, err};
  try {
    return run_parsed(args, ctx, 0);
  } catch (const UsageError& e) {
    report_error(err, "usage", e.what());
    return kExitUsage;
  } catch (const ParseError& e) {
    report_error(err, "parse", e.what());
  } catch (const CapacityError& e) {
    report_error(err, "capacity", e.what());
  } catch (const DimensionError& e) {
    report_error(err, "dimension", e.what());
  } catch (const Error& e) {
    report_error(err, "runtime", e.what());
  } catch (const std::bad_alloc&) {
    report_error(err, "memory", "allocation failed");
  } catch (const std::exception& e) {
    report_error(err, "runtime", e.what());
  }
  return kExitFailure;
}

}  // namespace srlpm::cli
