#include "larfi/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace larfi {

void ModelSpec::validate() const {
  if (p < 1) throw std::invalid_argument("ModelSpec: lag order p must be >= 1");
  if (p > 20) throw std::invalid_argument("ModelSpec: lag order p capped at 20");
  if (l < 0) throw std::invalid_argument("ModelSpec: covariate count l must be >= 0");
}

ParamVector::ParamVector(Vector alpha, Vector beta)
    : alpha_(std::move(alpha)), beta_(std::move(beta)) {
  if (beta_.size() < 2)
    throw std::invalid_argument("ParamVector: beta must have length p+1 >= 2");
  if (!alpha_.allFinite() || !beta_.allFinite())
    throw std::invalid_argument("ParamVector: entries must be finite");
}

ParamVector ParamVector::from_flat(const ModelSpec& spec, const Vector& theta) {
  spec.validate();
  if (theta.size() != spec.dim())
    throw std::invalid_argument("ParamVector: flat vector has length " +
                                std::to_string(theta.size()) + ", expected " +
                                std::to_string(spec.dim()));
  return ParamVector(theta.head(spec.l), theta.tail(spec.p + 1));
}

Vector ParamVector::flat() const {
  Vector out(dim());
  out.head(l()) = alpha_;
  out.tail(p() + 1) = beta_;
  return out;
}

void ParamVector::check_matches(const ModelSpec& spec) const {
  if (p() != spec.p || l() != spec.l)
    throw std::invalid_argument("ParamVector does not match ModelSpec (p,l)");
}

void BinarySeries::validate() const {
  for (auto v : y)
    if (v != 0 && v != 1)
      throw std::invalid_argument("BinarySeries: entries must be 0 or 1");
}

double expit(double eta) {
  // exp(-|eta|) branch; does not overflow for extreme log-odds.
  if (eta >= 0.0) {
    const double e = std::exp(-eta);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

namespace detail {

double eta_state(const ParamVector& theta, unsigned state, const double* xrow) {
  const Vector& beta = theta.beta();
  double eta = beta[0];
  const int p = theta.p();
  for (int k = 0; k < p; ++k)
    if (state >> k & 1u) eta += beta[k + 1];
  const int l = theta.l();
  for (int j = 0; j < l; ++j) eta += xrow[j] * theta.alpha()[j];
  return eta;
}

void check_series_args(const ParamVector& theta, const BinarySeries& series,
                       const ExogMatrix* exog, int min_len) {
  series.validate();
  const int T = series.length();
  if (T < min_len)
    throw std::invalid_argument("series length " + std::to_string(T) +
                                " below required " + std::to_string(min_len));
  const int l = theta.l();
  if (l > 0) {
    if (exog == nullptr)
      throw std::invalid_argument("model has covariates but no exogenous matrix given");
    if (exog->rows() != T || exog->cols() != l)
      throw std::invalid_argument("exogenous matrix must be T x l");
    if (!exog->allFinite())
      throw std::invalid_argument("exogenous matrix has non-finite entries");
  } else if (exog != nullptr && exog->size() != 0) {
    throw std::invalid_argument("exogenous matrix given but model has l = 0");
  }
}

// Packs the lag block ending just before time index t (0-based) into a
// bit pattern: bit k holds y[t-1-k].
inline unsigned pack_state(const BinarySeries& series, int t, int p) {
  unsigned s = 0;
  for (int k = 0; k < p; ++k)
    if (series.y[t - 1 - k]) s |= 1u << k;
  return s;
}

}  // namespace detail

double cond_prob(const ParamVector& theta, const std::vector<int>& lag,
                 const Vector& xrow) {
  if (static_cast<int>(lag.size()) != theta.p())
    throw std::invalid_argument("cond_prob: lag vector must have length p");
  if (xrow.size() != theta.l())
    throw std::invalid_argument("cond_prob: covariate row must have length l");
  unsigned state = 0;
  for (size_t k = 0; k < lag.size(); ++k) {
    if (lag[k] != 0 && lag[k] != 1)
      throw std::invalid_argument("cond_prob: lag values must be 0 or 1");
    if (lag[k]) state |= 1u << k;
  }
  return expit(detail::eta_state(theta, state, xrow.data()));
}

double log_likelihood(const ParamVector& theta, const BinarySeries& series,
                      const ExogMatrix* exog) {
  const int p = theta.p();
  detail::check_series_args(theta, series, exog, p + 1);
  const int T = series.length();
  double ll = 0.0;
  Vector xrow;
  for (int t = p; t < T; ++t) {
    const unsigned s = detail::pack_state(series, t, p);
    if (theta.l() > 0) xrow = exog->row(t);
    const double eta = detail::eta_state(theta, s, xrow.data());
    // y*eta - log(1+exp(eta)), stable form
    const double lse = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
    ll += series.y[t] * eta - lse;
  }
  return ll;
}

namespace {

// Shared accumulation for score and negated Hessian: builds z_t = (x_t, 1, lags).
template <typename Accum>
void for_each_term(const ParamVector& theta, const BinarySeries& series,
                   const ExogMatrix* exog, Accum&& accum) {
  const int p = theta.p();
  const int l = theta.l();
  const int T = series.length();
  Vector z(theta.dim());
  for (int t = p; t < T; ++t) {
    for (int j = 0; j < l; ++j) z[j] = (*exog)(t, j);
    z[l] = 1.0;
    for (int k = 0; k < p; ++k) z[l + 1 + k] = series.y[t - 1 - k];
    double eta = theta.beta()[0];
    for (int k = 0; k < p; ++k) eta += theta.beta()[k + 1] * z[l + 1 + k];
    for (int j = 0; j < l; ++j) eta += theta.alpha()[j] * z[j];
    accum(t, z, expit(eta));
  }
}

}  // namespace

Vector score(const ParamVector& theta, const BinarySeries& series,
             const ExogMatrix* exog) {
  detail::check_series_args(theta, series, exog, theta.p() + 1);
  Vector u = Vector::Zero(theta.dim());
  for_each_term(theta, series, exog, [&](int t, const Vector& z, double pt) {
    u += z * (series.y[t] - pt);
  });
  return u;
}

FisherMatrix neg_hessian(const ParamVector& theta, const BinarySeries& series,
                         const ExogMatrix* exog) {
  detail::check_series_args(theta, series, exog, theta.p() + 1);
  FisherMatrix h = FisherMatrix::Zero(theta.dim(), theta.dim());
  for_each_term(theta, series, exog, [&](int, const Vector& z, double pt) {
    h.noalias() += (pt * (1.0 - pt)) * (z * z.transpose());
  });
  // enforce exact symmetry against rounding in the rank-1 updates
  h = ((h + h.transpose()) * 0.5).eval();
  return h;
}

}  // namespace larfi
