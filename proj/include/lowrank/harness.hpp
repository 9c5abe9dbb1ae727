#pragma once

#include "lowrank/geometry.hpp"
#include "lowrank/measurements.hpp"
#include "lowrank/solvers.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace lowrank {

inline constexpr const char* kVersion = "0.1.0";

enum class OutputFormat { csv, json };
std::string to_string(OutputFormat f);
OutputFormat output_format_from_string(const std::string& s);

/// Parameters shared by every subcommand. Fields a command does not use keep
/// their defaults and are still validated, so a snapshot is always sane.
struct ExperimentConfig {
  std::string command = "phase-diagram";
  std::size_t N = 10;
  std::size_t m = 0;
  std::size_t s = 1;
  std::size_t t = 1;
  double p = 1.0;
  double q = 2.0;
  double theta = 0.0;
  std::optional<double> gamma;
  std::size_t trials = 20;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double c_delta = 6.0;
  double memory_guard_mb = kDefaultMemoryGuardMb;
  double success_threshold = 1e-3;
  std::size_t refine_iters = 4;
  std::vector<std::size_t> s_range;
  std::vector<std::size_t> m_range;
  std::size_t max_iters = 5000;
  double tol_residual = 1e-8;
  double tol_change = 1e-9;
  double penalty = 1.0;
  std::string out;
  OutputFormat format = OutputFormat::csv;

  /// Throws ParameterError naming the first offending field.
  void validate() const;
  SolveOptions solve_options() const;
  WidthOptions width_options() const;

  bool operator==(const ExperimentConfig&) const = default;
};

nlohmann::json to_json(const ExperimentConfig& c);
/// Strict: unknown keys and wrong types raise ParameterError.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// "a:b" or "a:b:step", inclusive of b when it lies on the lattice.
std::vector<std::size_t> parse_range(const std::string& text, const std::string& field);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> process_env(const std::string& name);

/// Fills global parameters from LOWRANK_SEED, LOWRANK_TRIALS, LOWRANK_THREADS,
/// LOWRANK_OUT, LOWRANK_FORMAT and LOWRANK_MEMORY_GUARD_MB unless the same
/// option appears in `flags_given` (flag > env > default).
void apply_env_overrides(ExperimentConfig& c, const std::set<std::string>& flags_given,
                         const EnvLookup& env = process_env);

/// Git blob hash: sha1("blob <len>\0" + content), lower-case hex.
std::string content_hash(const std::string& content);

struct RunRecord {
  nlohmann::json config;
  std::string input_hash;
  std::vector<std::string> columns;
  nlohmann::json rows = nlohmann::json::array();  ///< array of objects keyed by column
  nlohmann::json summary = nlohmann::json::object();
  double wall_clock_seconds = 0.0;
  std::string version = kVersion;
};

std::string record_csv(const RunRecord& r);
nlohmann::json to_json(const RunRecord& r);
/// Writes CSV (rows) or JSON (whole record) to `path` atomically.
void write_record(const RunRecord& r, const std::string& path, OutputFormat format);

struct PhaseCell {
  std::size_t s = 0;
  std::size_t m = 0;
  std::size_t successes = 0;
  std::size_t trials = 0;
  std::size_t solver_failures = 0;
  double success_probability() const {
    return trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
  }
};

/// First upward crossing of 1/2 by linear interpolation over increasing m.
std::optional<double> transition_midpoint(const std::vector<PhaseCell>& cells_for_one_s);

/// Rows are per (s, m, trial); summary carries per-cell probabilities and m50(s).
RunRecord run_phase_diagram(const ExperimentConfig& c);

/// Width sweep over m_range at (N, p, q); summary carries fitted exponents.
RunRecord run_width_sweep(const ExperimentConfig& c);

}  // namespace lowrank
