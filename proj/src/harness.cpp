#include "lowrank/harness.hpp"

#include "lowrank/errors.hpp"
#include "lowrank/matrix_io.hpp"
#include "lowrank/parallel.hpp"
#include "lowrank/rng.hpp"
#include "lowrank/schatten.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <sstream>

namespace lowrank {

namespace {

const std::array<std::string, 8> kCommands = {"gen-operator", "recover",       "rip-probe",
                                              "stability-report", "nsp-check", "width-sweep",
                                              "phase-diagram", "selftest"};

bool needs_m(const std::string& cmd) {
  return cmd == "gen-operator" || cmd == "rip-probe" || cmd == "nsp-check";
}

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ParameterError(field, what);
}

}  // namespace

std::string to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

OutputFormat output_format_from_string(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw ParameterError("format", "must be csv or json, got '" + s + "'");
}

void ExperimentConfig::validate() const {
  require(std::find(kCommands.begin(), kCommands.end(), command) != kCommands.end(), "command",
          "unknown subcommand '" + command + "'");
  require(N >= 1, "N", "must be at least 1");
  require(m <= N * N, "m", "must not exceed N^2");
  require(!needs_m(command) || m >= 1, "m", "is required for " + command);
  require(s >= 1 && s <= N, "s", "must lie in [1, N]");
  require(t >= 1 && t <= N, "t", "must lie in [1, N]");
  require(p > 0.0 && p <= 1.0, "p", "must lie in (0, 1]");
  require(q > p && q <= 2.0, "q", "must satisfy p < q <= 2");
  require(std::isfinite(theta) && theta >= 0.0, "theta", "must be finite and >= 0");
  require(!gamma || (std::isfinite(*gamma) && *gamma >= 1.0), "gamma", "must be finite and >= 1");
  require(trials >= 1, "trials", "must be at least 1");
  require(threads >= 1, "threads", "must be at least 1");
  require(std::isfinite(c_delta) && c_delta > 0.0, "c_delta", "must be positive");
  require(std::isfinite(memory_guard_mb) && memory_guard_mb > 0.0, "memory_guard_mb",
          "must be positive");
  require(std::isfinite(success_threshold) && success_threshold > 0.0, "success_threshold",
          "must be positive");
  require(refine_iters <= 10000, "refine_iters", "must not exceed 10000");
  for (std::size_t v : s_range) require(v >= 1 && v <= N, "s_range", "entries must lie in [1, N]");
  for (std::size_t v : m_range) require(v >= 1 && v <= N * N, "m_range", "entries must lie in [1, N^2]");
  if (command == "nsp-check") require(2 * s <= N, "s", "must satisfy 2s <= N");
  if (command == "phase-diagram") {
    require(!s_range.empty(), "s_range", "must not be empty");
    require(!m_range.empty(), "m_range", "must not be empty");
  }
  if (command == "width-sweep") {
    require(N >= 2, "N", "must be at least 2");
    require(!m_range.empty(), "m_range", "must not be empty");
  }
  const std::size_t m_max =
      std::max<std::size_t>(m, m_range.empty() ? 0 : *std::max_element(m_range.begin(), m_range.end()));
  const double mb = static_cast<double>(m_max) * static_cast<double>(N * N) * 8.0 / (1024.0 * 1024.0);
  require(mb <= memory_guard_mb, "memory_guard_mb",
          "operator payload needs " + std::to_string(mb) + " MB");
  solve_options().validate();
}

SolveOptions ExperimentConfig::solve_options() const {
  SolveOptions o;
  o.max_iters = max_iters;
  o.tol_residual = tol_residual;
  o.tol_change = tol_change;
  o.penalty = penalty;
  return o;
}

WidthOptions ExperimentConfig::width_options() const {
  WidthOptions o;
  o.c_delta = c_delta;
  o.solver = solve_options();
  o.rip_refine_iters = refine_iters;
  o.threads = threads;
  return o;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"command", c.command},
          {"N", c.N},
          {"m", c.m},
          {"s", c.s},
          {"t", c.t},
          {"p", c.p},
          {"q", c.q},
          {"theta", c.theta},
          {"gamma", c.gamma ? nlohmann::json(*c.gamma) : nlohmann::json(nullptr)},
          {"trials", c.trials},
          {"seed", c.seed},
          {"threads", c.threads},
          {"c_delta", c.c_delta},
          {"memory_guard_mb", c.memory_guard_mb},
          {"success_threshold", c.success_threshold},
          {"refine_iters", c.refine_iters},
          {"s_range", c.s_range},
          {"m_range", c.m_range},
          {"max_iters", c.max_iters},
          {"tol_residual", c.tol_residual},
          {"tol_change", c.tol_change},
          {"penalty", c.penalty},
          {"out", c.out},
          {"format", to_string(c.format)}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParameterError("config", "must be a JSON object");
  ExperimentConfig c;
  const nlohmann::json known = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ParameterError(key, "unknown configuration key");
  }
  auto get = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception&) {
      throw ParameterError(key, "has the wrong type");
    }
  };
  get("command", c.command);
  get("N", c.N);
  get("m", c.m);
  get("s", c.s);
  get("t", c.t);
  get("p", c.p);
  get("q", c.q);
  get("theta", c.theta);
  if (j.contains("gamma") && !j.at("gamma").is_null()) {
    double g = 0.0;
    get("gamma", g);
    c.gamma = g;
  }
  get("trials", c.trials);
  get("seed", c.seed);
  get("threads", c.threads);
  get("c_delta", c.c_delta);
  get("memory_guard_mb", c.memory_guard_mb);
  get("success_threshold", c.success_threshold);
  get("refine_iters", c.refine_iters);
  get("s_range", c.s_range);
  get("m_range", c.m_range);
  get("max_iters", c.max_iters);
  get("tol_residual", c.tol_residual);
  get("tol_change", c.tol_change);
  get("penalty", c.penalty);
  get("out", c.out);
  if (j.contains("format")) {
    std::string f;
    get("format", f);
    c.format = output_format_from_string(f);
  }
  return c;
}

std::vector<std::size_t> parse_range(const std::string& text, const std::string& field) {
  std::vector<std::size_t> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      throw ParameterError(field, "expected a:b or a:b:step, got '" + text + "'");
    }
    if (pos != item.size() || item.empty() || item[0] == '-') {
      throw ParameterError(field, "expected a:b or a:b:step, got '" + text + "'");
    }
    parts.push_back(static_cast<std::size_t>(v));
  }
  if (parts.size() == 1) return parts;
  if (parts.size() < 2 || parts.size() > 3) {
    throw ParameterError(field, "expected a:b or a:b:step, got '" + text + "'");
  }
  const std::size_t step = parts.size() == 3 ? parts[2] : 1;
  if (step == 0) throw ParameterError(field, "step must be positive");
  if (parts[1] < parts[0]) throw ParameterError(field, "end must not precede start");
  std::vector<std::size_t> out;
  for (std::size_t v = parts[0]; v <= parts[1]; v += step) out.push_back(v);
  return out;
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

void apply_env_overrides(ExperimentConfig& c, const std::set<std::string>& flags_given,
                         const EnvLookup& env) {
  auto lookup = [&](const std::string& flag, const std::string& var) -> std::optional<std::string> {
    if (flags_given.count(flag)) return std::nullopt;
    return env(var);
  };
  auto as_number = [](const std::string& var, const std::string& field, const std::string& text) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != text.size() || text.empty()) {
      throw ParameterError(field, var + " is not a number: '" + text + "'");
    }
    return v;
  };
  auto as_count = [&](const std::string& var, const std::string& field, const std::string& text) {
    const double v = as_number(var, field, text);
    if (v < 0.0 || v != std::floor(v)) throw ParameterError(field, var + " must be a non-negative integer");
    return v;
  };
  if (auto v = lookup("seed", "LOWRANK_SEED")) {
    std::size_t pos = 0;
    try {
      c.seed = std::stoull(*v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != v->size() || v->empty() || (*v)[0] == '-') {
      throw ParameterError("seed", "LOWRANK_SEED must be an unsigned integer");
    }
  }
  if (auto v = lookup("trials", "LOWRANK_TRIALS")) {
    c.trials = static_cast<std::size_t>(as_count("LOWRANK_TRIALS", "trials", *v));
  }
  if (auto v = lookup("threads", "LOWRANK_THREADS")) {
    c.threads = static_cast<unsigned>(as_count("LOWRANK_THREADS", "threads", *v));
  }
  if (auto v = lookup("out", "LOWRANK_OUT")) c.out = *v;
  if (auto v = lookup("format", "LOWRANK_FORMAT")) c.format = output_format_from_string(*v);
  if (auto v = lookup("memory-guard-mb", "LOWRANK_MEMORY_GUARD_MB")) {
    c.memory_guard_mb = as_number("LOWRANK_MEMORY_GUARD_MB", "memory_guard_mb", *v);
  }
}

std::string content_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest.data(), &len, EVP_sha1(), nullptr) != 1) {
    throw NumericalError("sha1 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string record_csv(const RunRecord& r) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < r.columns.size(); ++i) out << (i ? "," : "") << r.columns[i];
  out << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < r.columns.size(); ++i) {
      if (i) out << ',';
      const auto& v = row.at(r.columns[i]);
      if (v.is_string()) {
        out << v.get<std::string>();
      } else if (v.is_boolean()) {
        out << (v.get<bool>() ? 1 : 0);
      } else if (v.is_number_float()) {
        out << v.get<double>();
      } else if (v.is_null()) {
        out << "";
      } else {
        out << v.dump();
      }
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const RunRecord& r) {
  return {{"config", r.config},
          {"input_hash", r.input_hash},
          {"columns", r.columns},
          {"rows", r.rows},
          {"summary", r.summary},
          {"wall_clock_seconds", r.wall_clock_seconds},
          {"version", r.version}};
}

void write_record(const RunRecord& r, const std::string& path, OutputFormat format) {
  io::write_atomic(path, format == OutputFormat::csv ? record_csv(r) : to_json(r).dump(2) + "\n");
}

// ---------------------------------------------------------------------------

std::optional<double> transition_midpoint(const std::vector<PhaseCell>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const double pi = cells[i].success_probability();
    if (pi < 0.5) continue;
    if (i == 0) return static_cast<double>(cells[0].m);
    const double p0 = cells[i - 1].success_probability();
    const double m0 = static_cast<double>(cells[i - 1].m), m1 = static_cast<double>(cells[i].m);
    return m0 + (0.5 - p0) / (pi - p0) * (m1 - m0);
  }
  return std::nullopt;
}

namespace {

RunRecord start_record(const ExperimentConfig& c) {
  RunRecord r;
  r.config = to_json(c);
  // Output location does not change the computation, so it stays out of the hash.
  nlohmann::json inputs = r.config;
  inputs.erase("out");
  inputs.erase("format");
  inputs.erase("threads");
  r.input_hash = content_hash(inputs.dump());
  return r;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

RunRecord run_phase_diagram(const ExperimentConfig& c) {
  if (c.command != "phase-diagram") throw ParameterError("command", "expected phase-diagram");
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord rec = start_record(c);
  rec.columns = {"s", "m", "trial", "seed", "rel_error", "success", "converged", "iterations"};

  struct Job {
    std::size_t s, m, trial;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t s : c.s_range) {
    for (std::size_t m : c.m_range) {
      const std::uint64_t cell = derive_seed(c.seed, "phase-cell", (static_cast<std::uint64_t>(s) << 32) | m);
      for (std::size_t k = 0; k < c.trials; ++k) jobs.push_back({s, m, k, derive_seed(cell, "trial", k)});
    }
  }
  struct Outcome {
    double rel_error = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
  };
  std::vector<Outcome> outcomes(jobs.size());
  const SolveOptions opts = c.solve_options();
  const auto n = static_cast<Eigen::Index>(c.N);
  parallel_for(jobs.size(), c.threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    const MeasurementOperator A = gaussian_operator(c.N, job.m, derive_seed(job.seed, "operator"),
                                                    c.memory_guard_mb);
    GaussianStream rng(job.seed, "planted");
    const auto r = static_cast<Eigen::Index>(job.s);
    Mat X0 = rng.matrix(n, r) * rng.matrix(n, r).transpose();
    X0 /= X0.norm();
    const SolveResult sol = recover(A, apply(A, X0), c.p, 0.0, 0.0, opts);
    outcomes[i] = {(sol.minimizer - X0).norm(), sol.converged, sol.iterations};
  });

  std::vector<PhaseCell> cells;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    const Outcome& o = outcomes[i];
    const bool success = o.rel_error <= c.success_threshold;
    rec.rows.push_back({{"s", job.s},
                        {"m", job.m},
                        {"trial", job.trial},
                        {"seed", job.seed},
                        {"rel_error", o.rel_error},
                        {"success", success},
                        {"converged", o.converged},
                        {"iterations", o.iterations}});
    if (cells.empty() || cells.back().s != job.s || cells.back().m != job.m) cells.push_back({job.s, job.m});
    PhaseCell& cell = cells.back();
    ++cell.trials;
    cell.successes += success;
    cell.solver_failures += !o.converged;
  }

  nlohmann::json cell_json = nlohmann::json::array();
  nlohmann::json m50 = nlohmann::json::object();
  for (std::size_t s : c.s_range) {
    std::vector<PhaseCell> row;
    for (const auto& cell : cells) {
      if (cell.s == s) row.push_back(cell);
    }
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.m < b.m; });
    for (const auto& cell : row) {
      cell_json.push_back({{"s", cell.s},
                           {"m", cell.m},
                           {"success_probability", cell.success_probability()},
                           {"trials", cell.trials},
                           {"solver_failures", cell.solver_failures}});
    }
    const auto mid = transition_midpoint(row);
    m50[std::to_string(s)] = mid ? nlohmann::json(*mid) : nlohmann::json(nullptr);
  }
  rec.summary = {{"cells", cell_json}, {"m50", m50}, {"success_threshold", c.success_threshold}};
  rec.wall_clock_seconds = seconds_since(t0);
  return rec;
}

RunRecord run_width_sweep(const ExperimentConfig& c) {
  if (c.command != "width-sweep") throw ParameterError("command", "expected width-sweep");
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RunRecord rec = start_record(c);
  rec.columns = {"N", "m", "p", "q", "r", "s", "trials", "estimate", "theory", "ratio", "seed"};
  std::vector<GridPoint> grid;
  for (std::size_t m : c.m_range) grid.push_back({c.N, m, c.p, c.q});
  const WidthOptions wopts = c.width_options();
  const WidthTable table = width_scaling_experiment(grid, c.trials, c.seed, wopts);
  for (const auto& r : table.rows) {
    rec.rows.push_back({{"N", r.N},
                        {"m", r.m},
                        {"p", r.p},
                        {"q", r.q},
                        {"r", r.r},
                        {"s", r.s},
                        {"trials", r.trials},
                        {"estimate", r.estimate},
                        {"theory", r.theory},
                        {"ratio", r.ratio},
                        {"seed", r.seed}});
  }
  rec.summary = width_metadata(table, wopts);
  rec.wall_clock_seconds = seconds_since(t0);
  return rec;
}

}  // namespace lowrank
