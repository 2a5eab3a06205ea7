#include "larfi/inference.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace larfi {

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0))
    throw std::invalid_argument("normal_quantile: probability must be in (0,1)");
  if (std::abs(prob - 0.975) < 1e-12) return 1.959964;

  // Wichura's AS 241 (PPND16) rational approximations.
  const double q = prob - 0.5;
  double r, x;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    x = q *
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return x;
  }
  r = q < 0.0 ? prob : 1.0 - prob;
  r = std::sqrt(-std::log(r));
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -x : x;
}

Matrix invert_spd(const FisherMatrix& fi, const std::string& label) {
  Eigen::LLT<Matrix> llt(fi);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(label + " is not positive definite; cannot invert");
  return llt.solve(Matrix::Identity(fi.rows(), fi.cols()));
}

namespace {

void check_coord(const ParamVector& theta_hat, const FisherMatrix& fi, int coord) {
  if (fi.rows() != theta_hat.dim() || fi.cols() != theta_hat.dim())
    throw std::invalid_argument("information matrix dimension does not match theta");
  if (coord < 0 || coord >= theta_hat.dim())
    throw std::invalid_argument("coordinate index out of range");
}

double apply_transform(Transform tr, double x) {
  switch (tr) {
    case Transform::identity: return x;
    case Transform::expit_prob: return expit(x);
    case Transform::exp_odds: return std::exp(x);
  }
  return x;
}

}  // namespace

IntervalEstimate wald_ci(const ParamVector& theta_hat, const FisherMatrix& fi,
                         int coord, double level, FiSource source) {
  check_coord(theta_hat, fi, coord);
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("confidence level must be in (0,1)");
  const Matrix inv = invert_spd(fi, source == FiSource::exact
                                        ? "exact Fisher information"
                                        : "empirical Fisher information");
  const double se = std::sqrt(inv(coord, coord));
  const double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
  const double est = theta_hat.flat()[coord];
  return {est, est - z * se, est + z * se, level, source};
}

WaldTest wald_test(const ParamVector& theta_hat, const FisherMatrix& fi, int coord) {
  check_coord(theta_hat, fi, coord);
  const Matrix inv = invert_spd(fi, "information matrix");
  const double z = theta_hat.flat()[coord] / std::sqrt(inv(coord, coord));
  return {z, std::abs(z) > 1.959964};
}

IntervalEstimate functional_ci(const ParamVector& theta_hat, const FisherMatrix& fi,
                               const Functional& f, double level, FiSource source) {
  if (f.c.size() != theta_hat.dim())
    throw std::invalid_argument("functional coefficient vector must have length d");
  if (!f.c.allFinite())
    throw std::invalid_argument("functional coefficients must be finite");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("confidence level must be in (0,1)");
  const Matrix inv = invert_spd(fi, source == FiSource::exact
                                        ? "exact Fisher information"
                                        : "empirical Fisher information");
  const double eta = f.c.dot(theta_hat.flat());
  const double se = std::sqrt(f.c.dot(inv * f.c));
  const double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
  // endpoint mapping through the monotone transform, no delta method
  return {apply_transform(f.transform, eta),
          apply_transform(f.transform, eta - z * se),
          apply_transform(f.transform, eta + z * se), level, source};
}

std::vector<OrderSelectionRow> order_selection(const SubjectPanel& panel,
                                               const std::vector<int>& p_candidates,
                                               int l, const FitConfig& config) {
  if (p_candidates.empty())
    throw std::invalid_argument("order_selection: no candidate orders given");
  std::vector<OrderSelectionRow> rows;
  for (int p : p_candidates) {
    ModelSpec spec{p, l};
    OrderSelectionRow row;
    row.p = p;
    const FitResult fit = fit_mle(panel, spec, config);
    if (fit.status == FitStatus::diverged_separation) {
      row.diverged = true;
      row.loglik = row.aic = row.bic = std::numeric_limits<double>::quiet_NaN();
    } else {
      row.loglik = fit.loglik;
      row.aic = -2.0 * fit.loglik + 2.0 * p;
      row.bic = -2.0 * fit.loglik + p * std::log(static_cast<double>(fit.n_effective));
    }
    rows.push_back(row);
  }
  auto best = [&](auto key) {
    int arg = -1;
    double val = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < rows.size(); ++i)
      if (!rows[i].diverged && key(rows[i]) < val) { val = key(rows[i]); arg = static_cast<int>(i); }
    return arg;
  };
  const int a = best([](const OrderSelectionRow& r) { return r.aic; });
  const int b = best([](const OrderSelectionRow& r) { return r.bic; });
  if (a >= 0) rows[a].aic_best = true;
  if (b >= 0) rows[b].bic_best = true;
  return rows;
}

}  // namespace larfi
