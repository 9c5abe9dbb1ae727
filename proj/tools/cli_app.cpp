#include "cli_app.hpp"

#include "lowrank/errors.hpp"
#include "lowrank/geometry.hpp"
#include "lowrank/harness.hpp"
#include "lowrank/kernels.hpp"
#include "lowrank/matrix_io.hpp"
#include "lowrank/measurements.hpp"
#include "lowrank/schatten.hpp"
#include "lowrank/solvers.hpp"
#include "lowrank/stability.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

namespace lowrank::cli {

namespace {

using nlohmann::json;

// Numerical failure that should still print its result first.
struct Unconverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void error_line(std::ostream& err, int code, const std::string& kind, const std::string& field,
                const std::string& message) {
  err << "error code=" << code << " kind=" << kind;
  if (!field.empty()) err << " field=" << field;
  err << " message=" << json(message).dump() << '\n';
}

struct Inputs {
  std::string operator_path;
  std::string payload_path;
  std::string y_path;
  std::string x_path;
  std::string x_star_path;
  std::string trace_path;
  std::string kind = "gaussian-dense";
  std::string config_path;
  std::string s_range;
  std::string m_range;
  double beta = 0.0;
};

Vec load_vector(const std::string& path) {
  if (std::filesystem::path(path).extension() == ".json") {
    json j;
    try {
      j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
      throw InputError(path + ": " + e.what());
    }
    if (j.is_array()) {
      Vec y(static_cast<Eigen::Index>(j.size()));
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw InputError(path + ": non-numeric entry");
        y[static_cast<Eigen::Index>(i)] = j[i].get<double>();
      }
      if (!y.allFinite()) throw InputError(path + ": non-finite entries");
      return y;
    }
  }
  const io::Block B = io::load_matrix(path);
  if (B.rows() != 1 && B.cols() != 1) throw InputError(path + ": expected a vector (one row or column)");
  return Eigen::Map<const Vec>(B.data(), B.size());
}

MeasurementOperator load_operator(const Inputs& in, const ExperimentConfig& c) {
  if (in.operator_path.empty()) {
    return gaussian_operator(c.N, c.m, c.seed, c.memory_guard_mb);
  }
  json header;
  try {
    header = json::parse(io::read_file(in.operator_path));
  } catch (const json::exception& e) {
    throw InputError(in.operator_path + ": " + e.what());
  }
  std::optional<Eigen::MatrixXd> payload;
  if (!in.payload_path.empty()) payload = Eigen::MatrixXd(io::load_matrix(in.payload_path));
  return operator_from_header(header, payload, c.memory_guard_mb);
}

void emit(const std::string& text, const ExperimentConfig& c, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
  } else {
    io::write_atomic(c.out, text);
  }
}

void emit_json(const json& j, const ExperimentConfig& c, std::ostream& out) { emit(j.dump(2) + "\n", c, out); }

void add_solver_options(CLI::App* sub, ExperimentConfig& c) {
  sub->add_option("--max-iters", c.max_iters, "solver iteration cap");
  sub->add_option("--tol-residual", c.tol_residual, "feasibility tolerance");
  sub->add_option("--tol-change", c.tol_change, "stopping tolerance");
  sub->add_option("--penalty", c.penalty, "initial ADMM penalty");
}

// ---------------------------------------------------------------------------

int cmd_gen_operator(const Inputs& in, const ExperimentConfig& c, std::ostream& out) {
  const OperatorKind kind = operator_kind_from_string(in.kind);
  const MeasurementOperator A = kind == OperatorKind::gaussian_dense
                                    ? gaussian_operator(c.N, c.m, c.seed, c.memory_guard_mb)
                                    : random_mask_operator(c.N, c.m, c.seed);
  emit_json(operator_header(A), c, out);
  if (!in.payload_path.empty()) {
    if (kind != OperatorKind::gaussian_dense) throw ParameterError("payload", "only dense operators carry a payload");
    const io::Block P = Eigen::Map<const io::Block>(A.payload().data(), static_cast<Eigen::Index>(A.m()),
                                                    static_cast<Eigen::Index>(A.n() * A.n()));
    std::ostringstream buf;
    io::write_smat(buf, P);
    io::write_atomic(in.payload_path, buf.str());
  }
  return 0;
}

int cmd_recover(const Inputs& in, ExperimentConfig c, std::ostream& out) {
  if (in.y_path.empty()) throw ParameterError("y", "is required");
  if (in.operator_path.empty()) throw ParameterError("operator", "is required");
  const MeasurementOperator A = load_operator(in, c);
  c.N = A.n();
  c.m = A.m();
  c.validate();
  const Vec y = load_vector(in.y_path);
  SolveOptions opts = c.solve_options();
  opts.record_trace = !in.trace_path.empty();
  const SolveResult r = recover(A, y, c.p, c.theta, in.beta, opts);
  emit_json(to_json(r), c, out);
  if (!in.trace_path.empty()) io::write_atomic(in.trace_path, trace_csv(r));
  if (!r.converged) throw Unconverged("solver did not converge: " + r.status_note);
  return 0;
}

int cmd_rip_probe(const Inputs& in, const ExperimentConfig& c, std::ostream& out) {
  const MeasurementOperator A = load_operator(in, c);
  const RestrictedConstants rc =
      estimate_restricted_constants(A, c.s, c.trials, c.refine_iters, c.seed, c.threads);
  emit_json(to_json(rc), c, out);
  return 0;
}

int cmd_stability_report(const Inputs& in, const ExperimentConfig& c, std::ostream& out) {
  if (in.x_path.empty()) throw ParameterError("x", "is required");
  if (in.x_star_path.empty()) throw ParameterError("x_star", "is required");
  const Mat X = io::load_matrix(in.x_path);
  const Mat X_star = io::load_matrix(in.x_star_path);
  double gamma = 0.0;
  GammaProvenance provenance = GammaProvenance::user;
  json probe = nullptr;
  if (c.gamma) {
    gamma = *c.gamma;
  } else {
    if (in.operator_path.empty() && c.m == 0) {
      throw ParameterError("gamma", "give --gamma or an operator to probe");
    }
    const MeasurementOperator A = load_operator(in, c);
    const RestrictedConstants rc =
        estimate_restricted_constants(A, std::min(2 * c.t, A.n()), c.trials, c.refine_iters, c.seed, c.threads);
    probe = to_json(rc);
    if (!rc.gamma_hat) throw NumericalError("restricted-constant probe is degenerate (alpha_hat ~ 0)");
    gamma = *rc.gamma_hat;
    provenance = GammaProvenance::probe_lower_estimate;
  }
  const StabilityReport r = verify_bounds(X, X_star, static_cast<long>(c.s), static_cast<long>(c.t), c.p,
                                          c.theta, gamma, provenance);
  json j = to_json(r);
  if (!probe.is_null()) j["probe"] = probe;
  emit_json(j, c, out);
  return 0;
}

int cmd_nsp_check(const Inputs& in, const ExperimentConfig& c, std::ostream& out) {
  const MeasurementOperator A = load_operator(in, c);
  const NspResult r = nsp_check(A, c.s, c.p, c.trials, c.seed);
  json j = to_json(r);
  j["N"] = A.n();
  j["m"] = A.m();
  j["s"] = c.s;
  j["p"] = c.p;
  emit_json(j, c, out);
  return 0;
}

int cmd_width_sweep(const ExperimentConfig& c, std::ostream& out) {
  const RunRecord rec = run_width_sweep(c);
  if (c.out.empty()) {
    out << (c.format == OutputFormat::csv ? record_csv(rec) : to_json(rec).dump(2) + "\n");
    return 0;
  }
  write_record(rec, c.out, c.format);
  if (c.format == OutputFormat::csv) {
    json meta = rec.summary;
    meta["config"] = rec.config;
    meta["input_hash"] = rec.input_hash;
    meta["version"] = rec.version;
    io::write_atomic(c.out + ".meta.json", meta.dump(2) + "\n");
  }
  return 0;
}

int cmd_phase_diagram(const ExperimentConfig& c, std::ostream& out) {
  const RunRecord rec = run_phase_diagram(c);
  if (c.out.empty()) {
    out << (c.format == OutputFormat::csv ? record_csv(rec) : to_json(rec).dump(2) + "\n");
    return 0;
  }
  write_record(rec, c.out, c.format);
  if (c.format == OutputFormat::csv) {
    json meta = rec.summary;
    meta["config"] = rec.config;
    meta["input_hash"] = rec.input_hash;
    meta["wall_clock_seconds"] = rec.wall_clock_seconds;
    meta["version"] = rec.version;
    io::write_atomic(c.out + ".meta.json", meta.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

int selftest(std::ostream& out) {
  int failures = 0;
  auto check = [&](const std::string& name, const std::function<bool()>& f) {
    bool ok = false;
    std::string note;
    try {
      ok = f();
    } catch (const std::exception& e) {
      note = std::string(" (") + e.what() + ")";
    }
    out << (ok ? "ok   " : "FAIL ") << name << note << '\n';
    failures += !ok;
  };
  const auto close = [](double a, double b, double tol) { return std::abs(a - b) <= tol; };

  check("S_1 of diag(3,4) is 7", [&] {
    Mat X = Mat::Zero(2, 2);
    X(0, 0) = 3.0;
    X(1, 1) = 4.0;
    return close(schatten_norm(X, 1.0), 7.0, 1e-12);
  });
  check("S_2 of diag(3,4) is 5", [&] {
    Mat X = Mat::Zero(2, 2);
    X(0, 0) = 3.0;
    X(1, 1) = 4.0;
    return close(schatten_norm(X, 2.0), 5.0, 1e-12);
  });
  check("zero matrix has zero norm", [&] { return schatten_norm(Mat::Zero(3, 3), 0.5) == 0.0; });
  check("identity best rank-1 error in S_1 is N-1", [&] {
    return close(best_rank_error(Mat::Identity(4, 4), 1, 1.0), 3.0, 1e-12);
  });
  check("full vectorization has trivial kernel", [&] { return kernel_basis(full_vectorization(3)).dim() == 0; });
  check("zero-scale mask keeps the whole space as kernel", [&] {
    std::vector<MeasurementOperator::Index> idx;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) idx.push_back({i, j});
    return kernel_basis(entry_mask_operator(3, idx, 0.0)).dim() == 9;
  });
  check("gaussian operator is reproducible", [&] {
    return gaussian_operator(4, 8, 7) == gaussian_operator(4, 8, 7);
  });
  check("full measurements recover exactly", [&] {
    const MeasurementOperator A = full_vectorization(3);
    Mat X = Mat::Zero(3, 3);
    X(0, 1) = 1.0;
    const SolveResult r = recover_nuclear(A, apply(A, X), 0.0, 0.0, {});
    return (r.minimizer - X).norm() <= 1e-6;
  });
  check("y = 0 gives X* = 0", [&] {
    const MeasurementOperator A = gaussian_operator(3, 5, 1);
    const SolveResult r = recover(A, Vec::Zero(5), 0.5, 0.0, 0.0, {});
    return r.minimizer.norm() == 0.0;
  });
  check("stability hypothesis fails at gamma = 3, p = 1, s = t", [&] {
    return !hypothesis_holds(3.0, 1.0, 1, 1);
  });
  check("gamma threshold at p = 1, s = t is 1 + 4/(1 + sqrt2)", [&] {
    return close(exact_recovery_threshold(1.0, 1, 1), 1.0 + 4.0 / (1.0 + std::sqrt(2.0)), 1e-12);
  });
  check("compressive width bracket (0.5, p=1) is (0.5, 1)", [&] {
    const auto b = compressive_width_bracket(0.5, 1.0);
    return b.first == 0.5 && b.second == 1.0;
  });
  check("compressive width bracket (0.5, p=1/2) is (0.5, 2)", [&] {
    const auto b = compressive_width_bracket(0.5, 0.5);
    return b.first == 0.5 && close(b.second, 2.0, 1e-15);
  });
  check("flat kernel element has NSP margin 2 (N=6, s=1, p=1)", [&] {
    return close(nsp_margin(Mat::Identity(6, 6), 1, 1.0), 2.0, 1e-12);
  });
  check("config round-trips through JSON", [&] {
    ExperimentConfig c;
    c.gamma = 2.5;
    c.m_range = {10, 20};
    return config_from_json(to_json(c)) == c;
  });
  check("active SIMD path: " + std::string(kernels::isa_name(kernels::active_isa())), [&] { return true; });
  return failures;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Low-rank recovery by Schatten-p minimization: solvers, certificates and width experiments",
               "lowrank"};
  app.require_subcommand(1);
  app.fallthrough();

  ExperimentConfig c;
  Inputs in;
  std::string format = "csv";
  app.add_option("--config", in.config_path, "JSON config file (flags override it)");
  app.add_option("--seed", c.seed, "master seed (env LOWRANK_SEED)");
  app.add_option("--trials", c.trials, "trials or seeds per cell (env LOWRANK_TRIALS)");
  app.add_option("--out", c.out, "output path, written atomically (env LOWRANK_OUT)");
  app.add_option("--format", format, "csv or json (env LOWRANK_FORMAT)");
  app.add_option("--threads", c.threads, "worker threads (env LOWRANK_THREADS)");
  app.add_option("--memory-guard-mb", c.memory_guard_mb, "dense memory cap (env LOWRANK_MEMORY_GUARD_MB)");

  auto* gen = app.add_subcommand("gen-operator", "draw a measurement operator and write its header");
  gen->add_option("--N", c.N, "matrix side")->required();
  gen->add_option("--m", c.m, "number of measurements")->required();
  gen->add_option("--kind", in.kind, "gaussian-dense or entry-mask");
  gen->add_option("--payload", in.payload_path, "also write the dense payload (SMAT)");

  auto* rec = app.add_subcommand("recover", "solve the Schatten-p recovery problem");
  rec->add_option("--operator", in.operator_path, "operator header JSON")->required();
  rec->add_option("--payload", in.payload_path, "dense payload (SMAT or JSON)");
  rec->add_option("--y", in.y_path, "measurement vector (JSON array or matrix file)")->required();
  rec->add_option("--p", c.p, "Schatten exponent in (0, 1]");
  rec->add_option("--theta", c.theta, "noise budget");
  rec->add_option("--beta", in.beta, "beta_2s scaling of the budget (0: unscaled)");
  rec->add_option("--trace", in.trace_path, "write the iteration trace as CSV");
  add_solver_options(rec, c);

  auto* rip = app.add_subcommand("rip-probe", "estimate restricted constants of an operator");
  rip->add_option("--operator", in.operator_path, "operator header JSON (default: Gaussian from --N/--m/--seed)");
  rip->add_option("--payload", in.payload_path, "dense payload");
  rip->add_option("--N", c.N, "matrix side");
  rip->add_option("--m", c.m, "number of measurements");
  rip->add_option("--s", c.s, "rank level");
  rip->add_option("--refine-iters", c.refine_iters, "alternating refinement steps per trial");

  auto* stab = app.add_subcommand("stability-report", "check error bounds for a recovered matrix");
  stab->add_option("--x", in.x_path, "ground-truth matrix")->required();
  stab->add_option("--x-star", in.x_star_path, "recovered matrix")->required();
  stab->add_option("--s", c.s, "rank level s");
  stab->add_option("--t", c.t, "rank level t");
  stab->add_option("--p", c.p, "Schatten exponent");
  stab->add_option("--theta", c.theta, "noise budget");
  stab->add_option("--gamma", c.gamma, "certified gamma_2t; probed from the operator when absent");
  stab->add_option("--operator", in.operator_path, "operator header JSON for probing");
  stab->add_option("--payload", in.payload_path, "dense payload");
  stab->add_option("--N", c.N, "matrix side for a seeded Gaussian probe");
  stab->add_option("--m", c.m, "measurements for a seeded Gaussian probe");
  stab->add_option("--refine-iters", c.refine_iters, "probe refinement steps");

  auto* nsp = app.add_subcommand("nsp-check", "sample the null-space property");
  nsp->add_option("--operator", in.operator_path, "operator header JSON (default: Gaussian from --N/--m/--seed)");
  nsp->add_option("--payload", in.payload_path, "dense payload");
  nsp->add_option("--N", c.N, "matrix side");
  nsp->add_option("--m", c.m, "number of measurements");
  nsp->add_option("--s", c.s, "rank level (checked at 2s)");
  nsp->add_option("--p", c.p, "Schatten exponent");

  auto* width = app.add_subcommand("width-sweep", "empirical Gelfand-width upper bounds over m");
  width->add_option("--N", c.N, "matrix side");
  width->add_option("--m-range", in.m_range, "a:b[:step]")->required();
  width->add_option("--p", c.p, "ball exponent");
  width->add_option("--q", c.q, "error exponent");
  width->add_option("--c-delta", c.c_delta, "constant C in m >= C s N");
  width->add_option("--refine-iters", c.refine_iters, "probe refinement steps");
  add_solver_options(width, c);

  auto* phase = app.add_subcommand("phase-diagram", "success probability over (s, m)");
  phase->add_option("--N", c.N, "matrix side");
  phase->add_option("--s-range", in.s_range, "a:b[:step]")->required();
  phase->add_option("--m-range", in.m_range, "a:b[:step]")->required();
  phase->add_option("--seeds", c.trials, "trials per cell (same as --trials)");
  phase->add_option("--p", c.p, "Schatten exponent");
  phase->add_option("--success-threshold", c.success_threshold, "relative S_2 error counted as success");
  add_solver_options(phase, c);

  app.add_subcommand("selftest", "run the built-in example checks");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
      out << app.help();
      error_line(err, 1, "usage", "", e.what());
      return 1;
    }

    CLI::App* sub = app.get_subcommands().front();
    c.command = sub->get_name();

    // Config file first, then flags, then environment for unset globals.
    if (!in.config_path.empty()) {
      ExperimentConfig file = config_from_json(json::parse(io::read_file(in.config_path)));
      file.command = c.command;
      auto given = [&](CLI::App* a, const std::string& name) {
        const CLI::Option* o = a->get_option_no_throw(name);
        return o && o->count() > 0;
      };
      // Re-parse so that explicit flags win over the file.
      ExperimentConfig flags = c;
      c = file;
      if (given(&app, "--seed")) c.seed = flags.seed;
      if (given(&app, "--trials")) c.trials = flags.trials;
      if (given(&app, "--out")) c.out = flags.out;
      if (given(&app, "--threads")) c.threads = flags.threads;
      if (given(&app, "--memory-guard-mb")) c.memory_guard_mb = flags.memory_guard_mb;
      for (const CLI::Option* o : sub->get_options()) {
        if (o->count() == 0) continue;
        const std::string n = o->get_name();
        if (n == "--N") c.N = flags.N;
        if (n == "--m") c.m = flags.m;
        if (n == "--s") c.s = flags.s;
        if (n == "--t") c.t = flags.t;
        if (n == "--p") c.p = flags.p;
        if (n == "--q") c.q = flags.q;
        if (n == "--theta") c.theta = flags.theta;
        if (n == "--gamma") c.gamma = flags.gamma;
        if (n == "--seeds") c.trials = flags.trials;
        if (n == "--c-delta") c.c_delta = flags.c_delta;
        if (n == "--refine-iters") c.refine_iters = flags.refine_iters;
        if (n == "--success-threshold") c.success_threshold = flags.success_threshold;
        if (n == "--max-iters") c.max_iters = flags.max_iters;
        if (n == "--tol-residual") c.tol_residual = flags.tol_residual;
        if (n == "--tol-change") c.tol_change = flags.tol_change;
        if (n == "--penalty") c.penalty = flags.penalty;
      }
    }
    std::set<std::string> flags_given;
    for (const char* name : {"seed", "trials", "out", "format", "threads", "memory-guard-mb"}) {
      if (app.get_option("--" + std::string(name))->count() > 0) flags_given.insert(name);
    }
    if (c.command == "phase-diagram" && sub->get_option("--seeds")->count() > 0) flags_given.insert("trials");
    if (flags_given.count("format") || in.config_path.empty()) c.format = output_format_from_string(format);
    apply_env_overrides(c, flags_given);
    if (!in.s_range.empty()) c.s_range = parse_range(in.s_range, "s_range");
    if (!in.m_range.empty()) c.m_range = parse_range(in.m_range, "m_range");

    if (c.command == "selftest") {
      const int failures = selftest(out);
      if (failures > 0) {
        error_line(err, 2, "selftest", "", std::to_string(failures) + " check(s) failed");
        return 2;
      }
      return 0;
    }
    if (c.command != "recover") c.validate();

    if (c.command == "gen-operator") return cmd_gen_operator(in, c, out);
    if (c.command == "recover") return cmd_recover(in, c, out);
    if (c.command == "rip-probe") return cmd_rip_probe(in, c, out);
    if (c.command == "stability-report") return cmd_stability_report(in, c, out);
    if (c.command == "nsp-check") return cmd_nsp_check(in, c, out);
    if (c.command == "width-sweep") return cmd_width_sweep(c, out);
    return cmd_phase_diagram(c, out);
  } catch (const ParameterError& e) {
    error_line(err, 1, "validation", e.field(), e.what());
    return 1;
  } catch (const InputError& e) {
    error_line(err, 1, "input", "", e.what());
    return 1;
  } catch (const json::exception& e) {
    error_line(err, 1, "input", "", e.what());
    return 1;
  } catch (const HypothesisViolated& e) {
    error_line(err, 2, "hypothesis", "gamma", e.what());
    return 2;
  } catch (const Unconverged& e) {
    error_line(err, 2, "nonconvergence", "", e.what());
    return 2;
  } catch (const NumericalError& e) {
    error_line(err, 2, "numerical", "", e.what());
    return 2;
  } catch (const std::exception& e) {
    error_line(err, 2, "internal", "", e.what());
    return 2;
  }
}

}  // namespace lowrank::cli
