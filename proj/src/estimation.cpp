#include "larfi/estimation.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace larfi {

void SubjectPanel::validate(const ModelSpec& spec) const {
  spec.validate();
  if (subjects.empty())
    throw std::invalid_argument("SubjectPanel: need at least one subject");
  for (const auto& s : subjects) {
    s.series.validate();
    if (s.series.length() < spec.p + 2)
      throw std::invalid_argument("SubjectPanel: every series needs length >= p+2");
    if (spec.l > 0) {
      if (s.exog.rows() != s.series.length() || s.exog.cols() != spec.l)
        throw std::invalid_argument("SubjectPanel: exogenous matrix must be T x l");
    } else if (s.exog.size() != 0) {
      throw std::invalid_argument("SubjectPanel: exogenous data given but l = 0");
    }
  }
}

int SubjectPanel::n_effective(const ModelSpec& spec) const {
  int n = 0;
  for (const auto& s : subjects) n += s.series.length() - spec.p;
  return n;
}

namespace {
inline const ExogMatrix* exog_ptr(const Subject& s) {
  return s.exog.size() != 0 ? &s.exog : nullptr;
}
}  // namespace

double pooled_log_likelihood(const ParamVector& theta, const SubjectPanel& panel) {
  double ll = 0.0;
  for (const auto& s : panel.subjects)
    ll += log_likelihood(theta, s.series, exog_ptr(s));
  return ll;
}

Vector pooled_score(const ParamVector& theta, const SubjectPanel& panel) {
  Vector u = Vector::Zero(theta.dim());
  for (const auto& s : panel.subjects) u += score(theta, s.series, exog_ptr(s));
  return u;
}

FisherMatrix pooled_neg_hessian(const ParamVector& theta, const SubjectPanel& panel) {
  FisherMatrix h = FisherMatrix::Zero(theta.dim(), theta.dim());
  for (const auto& s : panel.subjects) h += neg_hessian(theta, s.series, exog_ptr(s));
  return h;
}

FisherMatrix pooled_ex_fi(const ParamVector& theta, const ModelSpec& spec,
                          const SubjectPanel& panel) {
  FisherMatrix info = FisherMatrix::Zero(spec.dim(), spec.dim());
  for (const auto& s : panel.subjects) {
    std::vector<int> bits(spec.p);
    for (int k = 0; k < spec.p; ++k) bits[k] = s.series.y[spec.p - 1 - k];
    info += ex_fi_forward(theta, spec, LagState::from_bits(bits),
                          s.series.length(), exog_ptr(s));
  }
  return info;
}

FitResult fit_mle(const SubjectPanel& panel, const ModelSpec& spec,
                  const FitConfig& config) {
  panel.validate(spec);
  if (config.max_iter <= 0 || config.grad_tol <= 0 || config.step_halving_max <= 0 ||
      config.divergence_norm <= 0)
    throw std::invalid_argument("FitConfig: all fields must be positive");

  const int d = spec.dim();
  Vector theta = Vector::Zero(d);
  auto param = [&](const Vector& v) { return ParamVector::from_flat(spec, v); };

  double ll = pooled_log_likelihood(param(theta), panel);
  FitResult res;
  res.n_effective = panel.n_effective(spec);
  res.status = FitStatus::max_iter;

  int iter = 0;
  for (; iter < config.max_iter; ++iter) {
    const ParamVector cur = param(theta);
    Vector u = pooled_score(cur, panel);
    if (u.lpNorm<Eigen::Infinity>() < config.grad_tol) {
      res.status = FitStatus::converged;
      break;
    }
    FisherMatrix h = pooled_neg_hessian(cur, panel);

    Eigen::LLT<Matrix> llt(h);
    Vector step;
    if (llt.info() == Eigen::Success) {
      step = llt.solve(u);
    } else {
      // ridge fallback for this step only
      FisherMatrix hr = h;
      hr.diagonal().array() += 1e-8 * h.trace() / d;
      Eigen::LLT<Matrix> llt2(hr);
      if (llt2.info() != Eigen::Success)
        throw std::runtime_error("fit_mle: Newton system singular even with ridge");
      step = llt2.solve(u);
    }

    // step-halving until the likelihood does not decrease (up to float noise)
    const double slack = 1e-10 * (1.0 + std::abs(ll));
    double ll_new = -std::numeric_limits<double>::infinity();
    Vector theta_new;
    double scale = 1.0;
    for (int h2 = 0; h2 <= config.step_halving_max; ++h2) {
      theta_new = theta + scale * step;
      ll_new = pooled_log_likelihood(param(theta_new), panel);
      if (ll_new >= ll - slack) break;
      scale *= 0.5;
    }
    if (ll_new < ll - slack) break;  // no acceptable step; stop at current iterate
    theta = theta_new;
    ll = ll_new;

    if (theta.lpNorm<Eigen::Infinity>() > config.divergence_norm) {
      theta = theta.cwiseMax(-config.divergence_norm).cwiseMin(config.divergence_norm);
      ll = pooled_log_likelihood(param(theta), panel);
      res.status = FitStatus::diverged_separation;
      ++iter;
      break;
    }
  }

  res.theta_hat = param(theta);
  if (res.status == FitStatus::converged) {
    // A vanishing score can also mean complete separation: the fitted
    // probabilities replicate the data and the likelihood has no finite
    // maximizer. Flag it rather than reporting a spurious interior MLE.
    double worst_fit = 0.0;
    for (const auto& s : panel.subjects) {
      const int T = s.series.length();
      for (int t = spec.p; t < T; ++t) {
        std::vector<int> lag(spec.p);
        for (int k = 0; k < spec.p; ++k) lag[k] = s.series.y[t - 1 - k];
        const Vector xrow = spec.l > 0 ? Vector(s.exog.row(t)) : Vector();
        const double pt = cond_prob(res.theta_hat, lag, xrow);
        worst_fit = std::max(worst_fit, std::abs(s.series.y[t] - pt));
      }
    }
    if (worst_fit < 1e-6) res.status = FitStatus::diverged_separation;
  }
  res.loglik = ll;
  res.iterations = iter;
  res.em_fi = pooled_neg_hessian(res.theta_hat, panel);
  res.ex_fi = pooled_ex_fi(res.theta_hat, spec, panel);
  return res;
}

}  // namespace larfi
