#ifndef LARFI_MODEL_HPP
#define LARFI_MODEL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

// Logistic autoregressive models for binary time series.
//
// LAR(p):  logit P(Y_t = 1 | past) = beta0 + beta1*y_{t-1} + ... + betap*y_{t-p}
// LARX(p): adds exogenous covariates x_t'alpha to the log-odds.
//
// Parameter layout is (alpha_1..alpha_l, beta_0, beta_1, .., beta_p)
// everywhere in this library; beta_k multiplies y_{t-k}.

namespace larfi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Symmetric positive-semidefinite information matrix, d = l + p + 1.
using FisherMatrix = Eigen::MatrixXd;

/// Model order: p lags, l exogenous covariates.
struct ModelSpec {
  int p = 1;
  int l = 0;

  int dim() const { return l + p + 1; }
  void validate() const;
};

/// Coefficients on the log-odds scale, layout (alpha, beta0..betap).
class ParamVector {
 public:
  ParamVector() = default;
  ParamVector(Vector alpha, Vector beta);

  /// Builds from the flat layout (alpha_1..alpha_l, beta_0..beta_p).
  static ParamVector from_flat(const ModelSpec& spec, const Vector& theta);
  /// LAR-only convenience: l = 0.
  static ParamVector lar(Vector beta) { return ParamVector(Vector(), std::move(beta)); }

  const Vector& alpha() const { return alpha_; }
  const Vector& beta() const { return beta_; }
  int l() const { return static_cast<int>(alpha_.size()); }
  int p() const { return static_cast<int>(beta_.size()) - 1; }
  int dim() const { return l() + p() + 1; }

  Vector flat() const;
  void check_matches(const ModelSpec& spec) const;

 private:
  Vector alpha_;  // length l
  Vector beta_;   // length p+1, beta_[0] is the intercept
};

/// One subject's observed 0/1 outcomes. Time is 1-based in all external
/// formats; internally y[0] holds y_1.
struct BinarySeries {
  std::vector<std::int8_t> y;

  int length() const { return static_cast<int>(y.size()); }
  void validate() const;
};

/// T x l covariate matrix; row t-1 holds x_t.
using ExogMatrix = Eigen::MatrixXd;

/// Numerically stable logistic function; safe for |eta| up to overflow range.
double expit(double eta);

/// Conditional success probability P(Y_t = 1 | lag, x_t).
/// `lag` holds (y_{t-1}, .., y_{t-p}); `xrow` the covariates at time t.
double cond_prob(const ParamVector& theta, const std::vector<int>& lag,
                 const Vector& xrow = Vector());

/// Conditional log-likelihood, summed over t = p+1..T; the first p
/// observations are conditioning values and contribute no terms.
double log_likelihood(const ParamVector& theta, const BinarySeries& series,
                      const ExogMatrix* exog = nullptr);

/// Gradient of log_likelihood with respect to the flat parameter layout.
Vector score(const ParamVector& theta, const BinarySeries& series,
             const ExogMatrix* exog = nullptr);

/// Negated Hessian of log_likelihood: sum_t v_t z_t z_t' with
/// v_t = P_t (1 - P_t) and z_t = (x_t, 1, y_{t-1}, .., y_{t-p}).
FisherMatrix neg_hessian(const ParamVector& theta, const BinarySeries& series,
                         const ExogMatrix* exog = nullptr);

/// Empirical Fisher information: the negated Hessian at the given point.
/// Callers plug either the MLE or a true parameter value.
inline FisherMatrix em_fi(const ParamVector& theta, const BinarySeries& series,
                          const ExogMatrix* exog = nullptr) {
  return neg_hessian(theta, series, exog);
}

namespace detail {
// Log-odds at a lag configuration encoded as a bit pattern: bit k of
// `state` holds y_{t-1-k}.
double eta_state(const ParamVector& theta, unsigned state, const double* xrow);
void check_series_args(const ParamVector& theta, const BinarySeries& series,
                       const ExogMatrix* exog, int min_len);
}  // namespace detail

}  // namespace larfi

#endif  // LARFI_MODEL_HPP
