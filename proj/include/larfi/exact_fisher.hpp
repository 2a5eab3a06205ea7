#ifndef LARFI_EXACT_FISHER_HPP
#define LARFI_EXACT_FISHER_HPP

#include <vector>

#include "larfi/model.hpp"

// Exact conditional Fisher information for LAR(p)/LARX(p), conditioning on
// the first p observations. Three routes are provided:
//
//   ex_fi_forward              production path, O(T * 2^p) kernel work,
//                              via the forward lag-state recursion
//   ex_fi_functional_iteration backward smoothing recursion, O(T^2 * 2^p);
//                              kept as an independent verification path
//   ex_fi_lar1_closed_form     analytic entries for p = 1, l = 0
//
// plus ex_fi_bruteforce, a full path enumeration used as the oracle in
// tests (serial reference and OpenMP variant, identical results).

namespace larfi {

/// Lag configuration (y_{t-1}, .., y_{t-p}) as a bit pattern:
/// bit k holds y_{t-1-k}. Codes run over [0, 2^p).
struct LagState {
  unsigned code = 0;
  int p = 1;

  static LagState from_bits(const std::vector<int>& bits);
  std::vector<int> bits() const;
};

/// Probability mass over the 2^p lag configurations at one time index.
struct StateDistribution {
  Vector q;  // length 2^p, indexed by LagState code
  int t = 0; // 1-based time the lag block ends before
};

/// Transition kernel of the LAR(1) chain. p0 and p1 are rows of a kernel,
/// not a distribution: p0 + p1 need not be 1.
struct Lar1Kernel {
  double p0, p1;  // P(Y_t=1 | Y_{t-1}=0), P(Y_t=1 | Y_{t-1}=1)
  double v0, v1;  // p*(1-p)

  explicit Lar1Kernel(const ParamVector& beta);
};

/// Forward recursion for the lag-block distributions Q_t, t = p+1..T.
/// Q_{p+1} is the point mass on `initial`; each step is one
/// Chapman-Kolmogorov update of the chain. Exogenous rows, when present,
/// must cover times 1..T (only rows p+1..T are read).
std::vector<StateDistribution> qt_forward(const ParamVector& theta,
                                          const ModelSpec& spec,
                                          const LagState& initial, int T,
                                          const ExogMatrix* exog = nullptr);

/// Exact Fisher information via the forward Q_t recursion.
FisherMatrix ex_fi_forward(const ParamVector& theta, const ModelSpec& spec,
                           const LagState& initial, int T,
                           const ExogMatrix* exog = nullptr);

/// Exact Fisher information via the backward functional iteration; agrees
/// with ex_fi_forward to ~1e-12 per entry. Verification path.
FisherMatrix ex_fi_functional_iteration(const ParamVector& theta,
                                        const ModelSpec& spec,
                                        const LagState& initial, int T,
                                        const ExogMatrix* exog = nullptr);

/// Closed-form exact Fisher information for LAR(1); requires p=1, l=0.
/// I22 equals I12 exactly (binary idempotence).
FisherMatrix ex_fi_lar1_closed_form(const ParamVector& beta, int T, int y1);

/// Oracle: enumerates all 2^(T-p) completions of the series, weights each
/// path by its conditional probability, and accumulates the expected
/// negated Hessian. Refuses T - p > 24.
FisherMatrix ex_fi_bruteforce(const ParamVector& theta, const ModelSpec& spec,
                              const LagState& initial, int T,
                              const ExogMatrix* exog = nullptr);

/// Serial reference for ex_fi_bruteforce; the parallel variant must match
/// it bit for bit.
FisherMatrix ex_fi_bruteforce_serial(const ParamVector& theta,
                                     const ModelSpec& spec,
                                     const LagState& initial, int T,
                                     const ExogMatrix* exog = nullptr);

}  // namespace larfi

#endif  // LARFI_EXACT_FISHER_HPP
