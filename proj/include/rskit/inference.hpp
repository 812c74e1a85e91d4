#ifndef RSKIT_INFERENCE_HPP
#define RSKIT_INFERENCE_HPP

#include <optional>
#include <string>
#include <string_view>

#include "rskit/solvers.hpp"

namespace rskit {

enum class BetaKind { constant, exp_sqrt, polynomial };

/// Confidence-level sequence beta_N and the concentration constants.
///
/// `parameter` is beta for constant, gamma for exp_sqrt (beta_N =
/// exp(-gamma sqrt N)) and alpha for polynomial (beta_N = N^-alpha).
/// `m` is the dimension of the joint observation (features plus label).
///
/// WARNING: c1 and c2 are placeholders. The concentration inequality only
/// asserts that such constants exist for given (a, m); no concrete values are
/// known, so remainders computed from the defaults carry no coverage
/// guarantee.
struct RemainderSchedule {
  BetaKind kind = BetaKind::constant;
  double parameter = 0.05;
  double c1 = 2.0;
  double c2 = 1.0;
  double a = 2.0;
  int m = 3;

  void validate() const;
  double beta(long long n) const;
  /// log beta_N; finite even where beta_N underflows.
  double log_beta(long long n) const;
};

struct Remainder {
  double value = 0.0;         // r_N
  double beta = 0.0;          // beta_N
  bool small_regime = true;   // r_N <= 1 branch (exponent 1/max{m,2})
  bool degenerate = false;    // beta_N >= 1 or c1 <= beta_N: the bound says nothing
  bool dimension_caveat = false;  // m == 2, where the concentration result is not stated
};

/// r_N from the closed forms for each schedule. Degenerate parameters give a
/// flagged result with value 0 instead of an exception.
Remainder remainder(const RemainderSchedule& schedule, long long n);

/// beta as a function of r: c1 exp(-c2 n r^max{m,2}) for r <= 1,
/// c1 exp(-c2 n r^a) otherwise. Inverse of remainder().
double concentration_level(const RemainderSchedule& schedule, double r, long long n);
double log_concentration_level(const RemainderSchedule& schedule, double r, long long n);

enum class IntervalVariant { theorem1, corollary1, shifted };

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;
  IntervalVariant variant = IntervalVariant::theorem1;
};

/// theorem1:   [tau/(1+eps) - l_h r_n, tau + k_tau r_n]
/// corollary1: [tau/(1+eps) - l_h r_n, tau + l_h r_n]
/// Throws ConsistencyError for corollary1 when l_h < k_tau (beyond 1e-8).
ConfidenceInterval confidence_interval(const RsSolution& rs, double l_h, double r_n, IntervalVariant variant,
                                       double level);

/// eps J + (2 + eps) l_h r_n
double generalization_bound(double epsilon, double j_star_upper, double l_h, double r_n);

struct ShiftedInterval {
  ConfidenceInterval interval;
  std::optional<double> regret_bound;  // eps J~ + (2 + eps) l_h (d_shift + r_n), when J~ is given
};

/// The theorem1 interval widened by l_h d_shift below and k_tau d_shift above.
ShiftedInterval shifted_interval(const RsSolution& rs, double l_h, double r_n, double d_shift, double level,
                                 std::optional<double> j_tilde = std::nullopt);

std::string to_string(BetaKind k);
BetaKind beta_kind_from_name(std::string_view name);
std::string to_string(IntervalVariant v);

}  // namespace rskit

#endif  // RSKIT_INFERENCE_HPP
