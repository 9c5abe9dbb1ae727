#include "lowrank/stability.hpp"

#include "lowrank/errors.hpp"
#include "lowrank/schatten.hpp"

#include <cmath>
#include <numbers>

namespace lowrank {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

void check_parameters(double gamma_2t, double p, long s, long t) {
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("p", "must lie in (0, 1]");
  if (s < 1) throw ParameterError("s", "must be at least 1");
  if (t < s) throw ParameterError("t", "must satisfy t >= s");
  if (!(gamma_2t >= 1.0) || !std::isfinite(gamma_2t)) {
    throw ParameterError("gamma_2t", "must be finite and at least 1");
  }
}

double exponent(double p) { return 1.0 / p - 0.5; }

}  // namespace

double exact_recovery_threshold(double p, long s, long t) {
  check_parameters(1.0, p, s, t);
  const double ratio = static_cast<double>(t) / static_cast<double>(s);
  return 1.0 + 4.0 * (kSqrt2 - 1.0) * std::pow(ratio, exponent(p));
}

bool hypothesis_holds(double gamma_2t, double p, long s, long t) {
  check_parameters(gamma_2t, p, s, t);
  const double ratio = static_cast<double>(t) / static_cast<double>(s);
  return gamma_2t - 1.0 < 4.0 * (kSqrt2 - 1.0) * std::pow(ratio, exponent(p));
}

double stability_mu(double gamma_2t, double p, long s, long t) {
  check_parameters(gamma_2t, p, s, t);
  const double ratio = static_cast<double>(s) / static_cast<double>(t);
  return 0.25 * (1.0 + kSqrt2) * (gamma_2t - 1.0) * std::pow(ratio, exponent(p));
}

StabilityConstants stability_constants(double gamma_2t, double p, long s, long t) {
  StabilityConstants c;
  c.p = p;
  c.s = s;
  c.t = t;
  c.gamma_2t = gamma_2t;
  c.mu = stability_mu(gamma_2t, p, s, t);
  c.lambda = (1.0 + kSqrt2) * gamma_2t;
  c.nu = (c.lambda + 1.0 - kSqrt2) / 2.0;
  c.hypothesis_holds = c.mu < 1.0;
  if (!c.hypothesis_holds) {
    throw HypothesisViolated(c.mu, "gamma_2t = " + std::to_string(gamma_2t) +
                                       " gives mu = " + std::to_string(c.mu) + " >= 1");
  }
  const double mup = std::pow(c.mu, p);
  const double denom = std::pow(1.0 - mup, 1.0 / p);
  c.C1 = std::pow(2.0, 2.0 / p - 1.0) * std::pow(1.0 + mup, 1.0 / p) / denom;
  c.D1 = std::pow(2.0, 2.0 / p - 1.0) * c.lambda / denom;
  c.C2 = std::pow(2.0, 2.0 / p - 2.0) * (c.lambda + 1.0 - kSqrt2) / denom;
  c.D2 = std::pow(2.0, 1.0 / p - 2.0) * c.lambda * (c.lambda + 1.0 - kSqrt2) / denom + 2.0 * c.lambda;
  return c;
}

std::string to_string(GammaProvenance g) {
  return g == GammaProvenance::user ? "user" : "probe-lower-estimate";
}

GammaProvenance gamma_provenance_from_string(const std::string& s) {
  if (s == "user") return GammaProvenance::user;
  if (s == "probe-lower-estimate" || s == "probe") return GammaProvenance::probe_lower_estimate;
  throw ParameterError("gamma_provenance", "unknown value '" + s + "'");
}

StabilityReport verify_bounds(const Mat& X, const Mat& X_star, long s, long t, double p,
                              double theta, double gamma_2t, GammaProvenance provenance) {
  require_square_finite(X, "X");
  require_square_finite(X_star, "X_star");
  if (X.rows() != X_star.rows()) throw InputError("X and X_star differ in size");
  check_parameters(gamma_2t, p, s, t);
  if (s > X.rows()) throw ParameterError("s", "exceeds the matrix size");
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw ParameterError("theta", "must be >= 0");

  StabilityReport r;
  r.p = p;
  r.s = s;
  r.t = t;
  r.gamma_2t = gamma_2t;
  r.theta = theta;
  r.gamma_provenance = provenance;
  const Mat diff = X - X_star;
  r.err_Sp = schatten_norm(diff, p);
  r.err_S2 = diff.norm();
  r.rho_s_p = best_rank_error(X, s, p);

  if (!hypothesis_holds(gamma_2t, p, s, t)) {
    r.hypothesis_status = "violated";
    return r;
  }
  r.hypothesis_status =
      provenance == GammaProvenance::user ? "certified" : "satisfied-by-estimate";
  r.constants = stability_constants(gamma_2t, p, s, t);
  const double e = exponent(p);
  r.bound_Sp = r.constants->C1 * r.rho_s_p + r.constants->D1 * std::pow(double(s), e) * theta;
  r.bound_S2 = r.constants->C2 * r.rho_s_p / std::pow(double(t), e) + r.constants->D2 * theta;
  r.satisfied_Sp = r.err_Sp <= *r.bound_Sp;
  r.satisfied_S2 = r.err_S2 <= *r.bound_S2;
  r.disproof = provenance == GammaProvenance::user && !(*r.satisfied_Sp && *r.satisfied_S2);
  return r;
}

nlohmann::json to_json(const StabilityConstants& c) {
  return {{"p", c.p},         {"s", c.s},   {"t", c.t},   {"gamma_2t", c.gamma_2t},
          {"lambda", c.lambda}, {"mu", c.mu}, {"nu", c.nu}, {"C1", c.C1},
          {"D1", c.D1},       {"C2", c.C2}, {"D2", c.D2}, {"hypothesis_holds", c.hypothesis_holds}};
}

nlohmann::json to_json(const StabilityReport& r) {
  auto opt = [](const auto& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"constants", r.constants ? to_json(*r.constants) : nlohmann::json(nullptr)},
          {"p", r.p},
          {"s", r.s},
          {"t", r.t},
          {"gamma_2t", r.gamma_2t},
          {"theta", r.theta},
          {"rho_s_p", r.rho_s_p},
          {"err_Sp", r.err_Sp},
          {"err_S2", r.err_S2},
          {"bound_Sp", opt(r.bound_Sp)},
          {"bound_S2", opt(r.bound_S2)},
          {"satisfied_Sp", opt(r.satisfied_Sp)},
          {"satisfied_S2", opt(r.satisfied_S2)},
          {"gamma_provenance", to_string(r.gamma_provenance)},
          {"hypothesis_status", r.hypothesis_status},
          {"disproof", r.disproof}};
}

}  // namespace lowrank
