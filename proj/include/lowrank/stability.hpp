#pragma once

// Stability certificate for Schatten-p minimization: the hypothesis on
// gamma_{2t}, the closed-form constants, and a checker comparing measured
// recovery errors against the resulting bounds.

#include "lowrank/types.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace lowrank {

struct StabilityConstants {
  double p = 1.0;
  long s = 1;
  long t = 1;
  double gamma_2t = 1.0;
  double lambda = 0.0;
  double mu = 0.0;
  double nu = 0.0;
  double C1 = 0.0;
  double D1 = 0.0;
  double C2 = 0.0;
  double D2 = 0.0;
  bool hypothesis_holds = false;
};

/// gamma_2t - 1 < 4 (sqrt2 - 1) (t/s)^{1/p - 1/2}.
bool hypothesis_holds(double gamma_2t, double p, long s, long t);

/// mu = (1/4)(1 + sqrt2)(gamma_2t - 1)(s/t)^{1/p - 1/2}.
double stability_mu(double gamma_2t, double p, long s, long t);

/// Throws HypothesisViolated (carrying mu) when mu >= 1.
StabilityConstants stability_constants(double gamma_2t, double p, long s, long t);

/// Largest admissible gamma_2t: 1 + 4 (sqrt2 - 1)(t/s)^{1/p - 1/2}.
double exact_recovery_threshold(double p, long s, long t);

enum class GammaProvenance { user, probe_lower_estimate };

std::string to_string(GammaProvenance g);
GammaProvenance gamma_provenance_from_string(const std::string& s);

struct StabilityReport {
  std::optional<StabilityConstants> constants;  ///< empty when the hypothesis fails
  double p = 1.0;
  long s = 1;
  long t = 1;
  double gamma_2t = 1.0;
  double theta = 0.0;
  double rho_s_p = 0.0;
  double err_Sp = 0.0;
  double err_S2 = 0.0;
  std::optional<double> bound_Sp;
  std::optional<double> bound_S2;
  std::optional<bool> satisfied_Sp;
  std::optional<bool> satisfied_S2;
  GammaProvenance gamma_provenance = GammaProvenance::user;
  /// "certified" (user gamma), "satisfied-by-estimate" (probe gamma below
  /// threshold) or "violated" (gamma at or above threshold).
  std::string hypothesis_status;
  /// A bound failed although gamma was user-certified: contradicts the theorem.
  bool disproof = false;
};

StabilityReport verify_bounds(const Mat& X, const Mat& X_star, long s, long t, double p,
                              double theta, double gamma_2t, GammaProvenance provenance);

nlohmann::json to_json(const StabilityConstants& c);
nlohmann::json to_json(const StabilityReport& r);

}  // namespace lowrank
