#ifndef LARFI_INFERENCE_HPP
#define LARFI_INFERENCE_HPP

#include <string>
#include <vector>

#include "larfi/estimation.hpp"
#include "larfi/model.hpp"

namespace larfi {

enum class FiSource { exact, empirical };

enum class Transform { identity, expit_prob, exp_odds };

/// Linear functional c'theta on the log-odds scale, reported through a
/// monotone transform (log-odds, probability, or odds).
struct Functional {
  Vector c;
  Transform transform = Transform::identity;
};

struct IntervalEstimate {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  FiSource fi_source = FiSource::exact;
};

/// Standard normal quantile, |error| < 1e-9; the 0.975 quantile is pinned
/// to 1.959964 so 95% intervals match the tabulated value exactly.
double normal_quantile(double prob);

/// Inverse of a positive definite information matrix; throws
/// std::runtime_error naming `label` if the factorization fails.
Matrix invert_spd(const FisherMatrix& fi, const std::string& label);

/// Wald interval theta_j +/- z * sqrt([fi^-1]_jj).
IntervalEstimate wald_ci(const ParamVector& theta_hat, const FisherMatrix& fi,
                         int coord, double level, FiSource source = FiSource::exact);

struct WaldTest {
  double z = 0.0;
  bool reject_at_05 = false;
};

/// z statistic for H0: theta_j = 0, two-sided at level .05.
WaldTest wald_test(const ParamVector& theta_hat, const FisherMatrix& fi, int coord);

/// Interval for a transformed linear functional: the linear-scale Wald
/// interval for c'theta is mapped through the transform endpoint-wise.
IntervalEstimate functional_ci(const ParamVector& theta_hat, const FisherMatrix& fi,
                               const Functional& f, double level,
                               FiSource source = FiSource::exact);

struct OrderSelectionRow {
  int p = 0;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  bool diverged = false;
  bool aic_best = false;
  bool bic_best = false;
};

/// Fits each candidate lag order and tabulates AIC(p) = -2l + 2p and
/// BIC(p) = -2l + p log n, with n the pooled effective sample size.
/// The penalty counts p, not the full parameter dimension.
std::vector<OrderSelectionRow> order_selection(const SubjectPanel& panel,
                                               const std::vector<int>& p_candidates,
                                               int l,
                                               const FitConfig& config = FitConfig());

}  // namespace larfi

#endif  // LARFI_INFERENCE_HPP
