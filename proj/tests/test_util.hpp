#ifndef LARFI_TEST_UTIL_HPP
#define LARFI_TEST_UTIL_HPP

#include <random>
#include <vector>

#include "larfi/exact_fisher.hpp"
#include "larfi/model.hpp"

namespace larfi::test {

// Deterministic helpers for property-style tests.

inline std::mt19937_64 test_rng(std::uint64_t seed = 12345) {
  return std::mt19937_64(seed);
}

inline double runif(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(g() >> 11) * 0x1.0p-53);
}

inline ParamVector random_theta(std::mt19937_64& g, const ModelSpec& spec,
                                double scale = 2.0) {
  Vector flat(spec.dim());
  for (int i = 0; i < spec.dim(); ++i) flat[i] = runif(g, -scale, scale);
  return ParamVector::from_flat(spec, flat);
}

inline BinarySeries random_series(std::mt19937_64& g, int T) {
  BinarySeries s;
  s.y.resize(T);
  for (int t = 0; t < T; ++t) s.y[t] = static_cast<std::int8_t>(g() & 1u);
  return s;
}

inline LagState random_state(std::mt19937_64& g, int p) {
  LagState s;
  s.p = p;
  s.code = static_cast<unsigned>(g() & ((1u << p) - 1));
  return s;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Finite-difference gradient of the log-likelihood, the independent
// oracle for score().
inline Vector fd_score(const ParamVector& theta, const ModelSpec& spec,
                       const BinarySeries& series, const ExogMatrix* exog,
                       double h = 1e-6) {
  const Vector flat = theta.flat();
  Vector g(flat.size());
  for (int i = 0; i < flat.size(); ++i) {
    Vector up = flat, dn = flat;
    up[i] += h;
    dn[i] -= h;
    g[i] = (log_likelihood(ParamVector::from_flat(spec, up), series, exog) -
            log_likelihood(ParamVector::from_flat(spec, dn), series, exog)) /
           (2.0 * h);
  }
  return g;
}

inline Matrix fd_hessian(const ParamVector& theta, const ModelSpec& spec,
                         const BinarySeries& series, const ExogMatrix* exog,
                         double h = 1e-5) {
  const Vector flat = theta.flat();
  Matrix out(flat.size(), flat.size());
  for (int i = 0; i < flat.size(); ++i) {
    Vector up = flat, dn = flat;
    up[i] += h;
    dn[i] -= h;
    const Vector gu = fd_score(ParamVector::from_flat(spec, up), spec, series, exog, h);
    const Vector gd = fd_score(ParamVector::from_flat(spec, dn), spec, series, exog, h);
    out.col(i) = (gu - gd) / (2.0 * h);
  }
  return out;
}

}  // namespace larfi::test

#endif
