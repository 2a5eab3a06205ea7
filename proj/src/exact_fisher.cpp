#include "larfi/exact_fisher.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace larfi {

namespace {

void check_args(const ParamVector& theta, const ModelSpec& spec,
                const LagState& initial, int T, const ExogMatrix* exog) {
  spec.validate();
  theta.check_matches(spec);
  if (initial.p != spec.p || initial.code >= (1u << spec.p))
    throw std::invalid_argument("initial LagState does not match lag order p");
  if (T < spec.p + 1)
    throw std::invalid_argument("T must be at least p+1");
  if (spec.l > 0) {
    if (exog == nullptr)
      throw std::invalid_argument("model has covariates but no exogenous matrix given");
    if (exog->rows() < T || exog->cols() != spec.l)
      throw std::invalid_argument("exogenous matrix must cover rows 1..T with l columns");
  }
}

// Covariate row for 1-based time t, or nullptr for LAR.
inline const double* xrow_at(Vector& buf, const ExogMatrix* exog, int l, int t) {
  if (l == 0) return nullptr;
  buf = exog->row(t - 1);
  return buf.data();
}

// z(s, t) = (x_t, 1, bits of s)
inline void fill_z(Vector& z, const ModelSpec& spec, unsigned s, const double* xr) {
  for (int j = 0; j < spec.l; ++j) z[j] = xr[j];
  z[spec.l] = 1.0;
  for (int k = 0; k < spec.p; ++k) z[spec.l + 1 + k] = (s >> k & 1u) ? 1.0 : 0.0;
}

}  // namespace

LagState LagState::from_bits(const std::vector<int>& bits) {
  if (bits.empty() || bits.size() > 20)
    throw std::invalid_argument("LagState: need 1..20 lag values");
  LagState s;
  s.p = static_cast<int>(bits.size());
  for (size_t k = 0; k < bits.size(); ++k) {
    if (bits[k] != 0 && bits[k] != 1)
      throw std::invalid_argument("LagState: values must be 0 or 1");
    if (bits[k]) s.code |= 1u << k;
  }
  return s;
}

std::vector<int> LagState::bits() const {
  std::vector<int> out(p);
  for (int k = 0; k < p; ++k) out[k] = code >> k & 1u;
  return out;
}

Lar1Kernel::Lar1Kernel(const ParamVector& beta) {
  if (beta.p() != 1 || beta.l() != 0)
    throw std::invalid_argument("Lar1Kernel requires p = 1, l = 0");
  p0 = expit(beta.beta()[0]);
  p1 = expit(beta.beta()[0] + beta.beta()[1]);
  v0 = p0 * (1.0 - p0);
  v1 = p1 * (1.0 - p1);
}

std::vector<StateDistribution> qt_forward(const ParamVector& theta,
                                          const ModelSpec& spec,
                                          const LagState& initial, int T,
                                          const ExogMatrix* exog) {
  check_args(theta, spec, initial, T, exog);
  const int p = spec.p;
  const unsigned n = 1u << p;
  const unsigned mask = n - 1;

  std::vector<StateDistribution> out;
  out.reserve(T - p);

  StateDistribution cur;
  cur.q = Vector::Zero(n);
  cur.q[initial.code] = 1.0;
  cur.t = p + 1;
  out.push_back(cur);

  Vector xbuf;
  for (int t = p + 2; t <= T; ++t) {
    // One Chapman-Kolmogorov step: the draw at time t-1 shifts into the block.
    const double* xr = xrow_at(xbuf, exog, spec.l, t - 1);
    Vector next = Vector::Zero(n);
    for (unsigned c = 0; c < n; ++c) {
      const double qc = cur.q[c];
      if (qc == 0.0) continue;
      const double p1 = expit(detail::eta_state(theta, c, xr));
      const unsigned base = (c << 1) & mask;
      next[base | 1u] += p1 * qc;
      next[base] += (1.0 - p1) * qc;
    }
    cur.q = std::move(next);
    cur.t = t;
    out.push_back(cur);
  }
  return out;
}

FisherMatrix ex_fi_forward(const ParamVector& theta, const ModelSpec& spec,
                           const LagState& initial, int T,
                           const ExogMatrix* exog) {
  const auto dists = qt_forward(theta, spec, initial, T, exog);
  const int d = spec.dim();
  const unsigned n = 1u << spec.p;
  FisherMatrix info = FisherMatrix::Zero(d, d);
  Vector z(d), xbuf;
  for (const auto& dist : dists) {
    const double* xr = xrow_at(xbuf, exog, spec.l, dist.t);
    for (unsigned s = 0; s < n; ++s) {
      const double w = dist.q[s];
      if (w == 0.0) continue;
      const double pt = expit(detail::eta_state(theta, s, xr));
      fill_z(z, spec, s, xr);
      info.noalias() += (w * pt * (1.0 - pt)) * (z * z.transpose());
    }
  }
  return ((info + info.transpose()) * 0.5).eval();
}

FisherMatrix ex_fi_functional_iteration(const ParamVector& theta,
                                        const ModelSpec& spec,
                                        const LagState& initial, int T,
                                        const ExogMatrix* exog) {
  check_args(theta, spec, initial, T, exog);
  const int d = spec.dim();
  const int p = spec.p;
  const unsigned n = 1u << p;
  const unsigned mask = n - 1;

  FisherMatrix info = FisherMatrix::Zero(d, d);
  Vector z(d), xbuf;
  std::vector<Matrix> f(n), g(n);

  for (int t0 = p + 1; t0 <= T; ++t0) {
    // f_1 over states at time t0
    const double* xr = xrow_at(xbuf, exog, spec.l, t0);
    for (unsigned s = 0; s < n; ++s) {
      const double pt = expit(detail::eta_state(theta, s, xr));
      fill_z(z, spec, s, xr);
      f[s] = (pt * (1.0 - pt)) * (z * z.transpose());
    }
    // smooth backward to the initial block at time p+1
    for (int k = 2; k <= t0 - p; ++k) {
      const int tau = t0 - k + 1;  // time of the state argument of f_k
      const double* xt = xrow_at(xbuf, exog, spec.l, tau);
      for (unsigned s = 0; s < n; ++s) {
        const double pt = expit(detail::eta_state(theta, s, xt));
        const unsigned s0 = (s << 1) & mask;
        g[s] = f[s0] + pt * (f[s0 | 1u] - f[s0]);
      }
      f.swap(g);
    }
    info += f[initial.code];
  }
  return ((info + info.transpose()) * 0.5).eval();
}

FisherMatrix ex_fi_lar1_closed_form(const ParamVector& beta, int T, int y1) {
  if (T < 2) throw std::invalid_argument("ex_fi_lar1_closed_form: T must be >= 2");
  if (y1 != 0 && y1 != 1)
    throw std::invalid_argument("ex_fi_lar1_closed_form: y1 must be 0 or 1");
  const Lar1Kernel k(beta);

  const double py1 = y1 ? k.p1 : k.p0;
  const double vy1 = y1 ? k.v1 : k.v0;
  const double denom = 1.0 - k.p1 + k.p0;      // 1 - (p(1) - p(0))
  const double r = k.p1 - k.p0;                // geometric ratio
  const double geo = (1.0 - std::pow(r, T - 2)) / denom;
  const double drift = py1 - k.p0 / denom;

  const double i11 = (k.v1 - k.v0) * drift * geo +
                     (T - 2) * (k.p0 * k.v1 + k.v0 - k.v0 * k.p1) / denom + vy1;
  const double i12 = k.v1 * drift * geo + (T - 2) * k.p0 * k.v1 / denom + vy1 * y1;

  FisherMatrix info(2, 2);
  info << i11, i12, i12, i12;  // I22 = I12 exactly (y^2 = y)
  return info;
}

namespace {

// Blocked path enumeration shared by the serial and OpenMP brute-force
// variants. The block partition and the block-order reduction are fixed,
// so both variants produce bit-identical results for any thread count.
FisherMatrix bruteforce_blocked(const ParamVector& theta, const ModelSpec& spec,
                                const LagState& initial, int T,
                                const ExogMatrix* exog, bool parallel) {
  check_args(theta, spec, initial, T, exog);
  const int free = T - spec.p;
  if (free > 24)
    throw std::invalid_argument("brute force refused: T - p = " +
                                std::to_string(free) + " exceeds the cap of 24");
  const std::uint64_t npaths = std::uint64_t{1} << free;
  const int d = spec.dim();
  const unsigned mask = (1u << spec.p) - 1;

  // Per-time kernel tables: eta depends only on (state, t).
  const unsigned n = 1u << spec.p;
  std::vector<std::vector<double>> prob(free, std::vector<double>(n));
  Vector xbuf;
  for (int i = 0; i < free; ++i) {
    const double* xr = xrow_at(xbuf, exog, spec.l, spec.p + 1 + i);
    for (unsigned s = 0; s < n; ++s)
      prob[i][s] = expit(detail::eta_state(theta, s, xr));
  }

  const int nblocks = static_cast<int>(std::min<std::uint64_t>(npaths, 256));
  std::vector<Matrix> partial(nblocks, Matrix::Zero(d, d));

  auto run_block = [&](int b) {
    const std::uint64_t lo = npaths * b / nblocks;
    const std::uint64_t hi = npaths * (b + 1) / nblocks;
    Matrix acc = Matrix::Zero(d, d);
    Matrix hpath(d, d);
    Vector z(d);
    Vector xb;
    for (std::uint64_t path = lo; path < hi; ++path) {
      unsigned s = initial.code;
      double w = 1.0;
      hpath.setZero();
      for (int i = 0; i < free; ++i) {
        const int y = path >> i & 1u;
        const double pt = prob[i][s];
        const double* xr = xrow_at(xb, exog, spec.l, spec.p + 1 + i);
        fill_z(z, spec, s, xr);
        hpath.noalias() += (pt * (1.0 - pt)) * (z * z.transpose());
        w *= y ? pt : 1.0 - pt;
        s = ((s << 1) & mask) | static_cast<unsigned>(y);
      }
      acc.noalias() += w * hpath;
    }
    partial[b] = acc;
  };

  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < nblocks; ++b) run_block(b);
  } else {
    for (int b = 0; b < nblocks; ++b) run_block(b);
  }

  FisherMatrix info = Matrix::Zero(d, d);
  for (int b = 0; b < nblocks; ++b) info += partial[b];
  return ((info + info.transpose()) * 0.5).eval();
}

}  // namespace

FisherMatrix ex_fi_bruteforce(const ParamVector& theta, const ModelSpec& spec,
                              const LagState& initial, int T,
                              const ExogMatrix* exog) {
  return bruteforce_blocked(theta, spec, initial, T, exog, true);
}

FisherMatrix ex_fi_bruteforce_serial(const ParamVector& theta,
                                     const ModelSpec& spec,
                                     const LagState& initial, int T,
                                     const ExogMatrix* exog) {
  return bruteforce_blocked(theta, spec, initial, T, exog, false);
}

}  // namespace larfi
