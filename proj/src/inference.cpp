#include "rskit/inference.hpp"

#include <algorithm>
#include <cmath>

#include "rskit/errors.hpp"

namespace rskit {

void RemainderSchedule::validate() const {
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw ParameterError("c1 and c2 must be positive");
  if (!(a > 1.0)) throw ParameterError("a must exceed 1");
  if (m < 1) throw ParameterError("m must be a positive integer");
  if (!(parameter > 0.0) || !std::isfinite(parameter)) throw ParameterError("schedule parameter must be positive");
}

double RemainderSchedule::beta(long long n) const {
  const double nn = static_cast<double>(n);
  switch (kind) {
    case BetaKind::constant: return parameter;
    case BetaKind::exp_sqrt: return std::exp(-parameter * std::sqrt(nn));
    case BetaKind::polynomial: return std::pow(nn, -parameter);
  }
  return parameter;
}

double RemainderSchedule::log_beta(long long n) const {
  const double nn = static_cast<double>(n);
  switch (kind) {
    case BetaKind::constant: return std::log(parameter);
    case BetaKind::exp_sqrt: return -parameter * std::sqrt(nn);
    case BetaKind::polynomial: return -parameter * std::log(nn);
  }
  return std::log(parameter);
}

Remainder remainder(const RemainderSchedule& s, long long n) {
  s.validate();
  if (n < 1) throw ParameterError("n must be positive");
  const double nn = static_cast<double>(n);
  const double log_c1 = std::log(s.c1);

  Remainder out;
  out.beta = s.beta(n);
  out.dimension_caveat = s.m == 2;
  // numerator = log(c1 / beta_N), written per schedule as tabulated.
  double numerator = 0.0;
  switch (s.kind) {
    case BetaKind::constant:
      numerator = std::log(s.c1 / s.parameter);
      out.small_regime = nn >= numerator / s.c2;
      break;
    case BetaKind::exp_sqrt:
      numerator = log_c1 + s.parameter * std::sqrt(nn);
      out.small_regime = s.c2 * nn - s.parameter * std::sqrt(nn) >= log_c1;
      break;
    case BetaKind::polynomial:
      numerator = log_c1 + s.parameter * std::log(nn);
      out.small_regime = s.c2 * nn - s.parameter * std::log(nn) >= log_c1;
      break;
  }
  if (s.log_beta(n) >= 0.0 || numerator <= 0.0) {
    out.degenerate = true;
    out.value = 0.0;
    return out;
  }
  const double exponent = out.small_regime ? 1.0 / std::max(s.m, 2) : 1.0 / s.a;
  out.value = std::pow(numerator / (s.c2 * nn), exponent);
  return out;
}

double log_concentration_level(const RemainderSchedule& s, double r, long long n) {
  s.validate();
  if (!(r >= 0.0)) throw ParameterError("r must be nonnegative");
  const double power = r <= 1.0 ? static_cast<double>(std::max(s.m, 2)) : s.a;
  return std::log(s.c1) - s.c2 * static_cast<double>(n) * std::pow(r, power);
}

double concentration_level(const RemainderSchedule& s, double r, long long n) {
  return std::exp(log_concentration_level(s, r, n));
}

ConfidenceInterval confidence_interval(const RsSolution& rs, double l_h, double r_n, IntervalVariant variant,
                                       double level) {
  if (!(r_n >= 0.0)) throw ParameterError("r_n must be nonnegative");
  if (!(l_h >= 0.0)) throw ParameterError("l_h must be nonnegative");
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("level must lie in (0, 1)");
  ConfidenceInterval ci;
  ci.level = level;
  ci.variant = variant;
  ci.lower = rs.tau / (1.0 + rs.epsilon) - l_h * r_n;
  switch (variant) {
    case IntervalVariant::theorem1:
      ci.upper = rs.tau + rs.k_tau * r_n;
      break;
    case IntervalVariant::corollary1:
      if (l_h < rs.k_tau - 1e-8)
        throw ConsistencyError("Lipschitz constant " + std::to_string(l_h) + " is below the fragility " +
                               std::to_string(rs.k_tau));
      ci.upper = rs.tau + l_h * r_n;
      break;
    case IntervalVariant::shifted:
      throw ParameterError("use shifted_interval for the shifted variant");
  }
  return ci;
}

double generalization_bound(double epsilon, double j_star_upper, double l_h, double r_n) {
  if (!(epsilon >= 0.0) || !(r_n >= 0.0)) throw ParameterError("epsilon and r_n must be nonnegative");
  return epsilon * j_star_upper + (2.0 + epsilon) * l_h * r_n;
}

ShiftedInterval shifted_interval(const RsSolution& rs, double l_h, double r_n, double d_shift, double level,
                                 std::optional<double> j_tilde) {
  if (!(d_shift >= 0.0)) throw ParameterError("d_shift must be nonnegative");
  ShiftedInterval out;
  out.interval = confidence_interval(rs, l_h, r_n, IntervalVariant::theorem1, level);
  out.interval.variant = IntervalVariant::shifted;
  out.interval.lower -= l_h * d_shift;
  out.interval.upper += rs.k_tau * d_shift;
  if (j_tilde) out.regret_bound = generalization_bound(rs.epsilon, *j_tilde, l_h, d_shift + r_n);
  return out;
}

std::string to_string(BetaKind k) {
  switch (k) {
    case BetaKind::constant: return "constant";
    case BetaKind::exp_sqrt: return "exp_sqrt";
    case BetaKind::polynomial: return "polynomial";
  }
  return "constant";
}

BetaKind beta_kind_from_name(std::string_view name) {
  if (name == "constant") return BetaKind::constant;
  if (name == "exp_sqrt") return BetaKind::exp_sqrt;
  if (name == "polynomial") return BetaKind::polynomial;
  throw ParameterError("unknown beta schedule '" + std::string(name) + "'");
}

std::string to_string(IntervalVariant v) {
  switch (v) {
    case IntervalVariant::theorem1: return "theorem1";
    case IntervalVariant::corollary1: return "corollary1";
    case IntervalVariant::shifted: return "shifted";
  }
  return "theorem1";
}

}  // namespace rskit
