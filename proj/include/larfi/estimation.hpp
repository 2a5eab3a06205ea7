#ifndef LARFI_ESTIMATION_HPP
#define LARFI_ESTIMATION_HPP

#include <optional>
#include <vector>

#include "larfi/exact_fisher.hpp"
#include "larfi/model.hpp"

namespace larfi {

struct FitConfig {
  int max_iter = 100;
  double grad_tol = 1e-8;          // sup-norm of the pooled score
  int step_halving_max = 30;
  double divergence_norm = 30.0;   // sup-norm of theta beyond which we flag separation
};

enum class FitStatus { converged, diverged_separation, max_iter };

struct FitResult {
  ParamVector theta_hat;
  double loglik = 0.0;
  FisherMatrix em_fi;   // pooled negated Hessian at theta_hat
  FisherMatrix ex_fi;   // sum over subjects of the exact FI at theta_hat
  int iterations = 0;
  FitStatus status = FitStatus::max_iter;
  int n_effective = 0;  // sum over subjects of T_i - p
};

/// One subject's data; exog is empty (0 x 0) when the model has l = 0.
struct Subject {
  BinarySeries series;
  ExogMatrix exog;
};

/// Subjects fitted jointly with one shared parameter vector.
struct SubjectPanel {
  std::vector<Subject> subjects;

  void validate(const ModelSpec& spec) const;
  int n_effective(const ModelSpec& spec) const;
};

/// Newton-Raphson maximum likelihood for the pooled log-likelihood,
/// started at theta = 0, with step-halving so the likelihood never
/// decreases. Separation (||theta||_inf exceeding divergence_norm) is
/// flagged and the clamped last iterate returned rather than discarded.
FitResult fit_mle(const SubjectPanel& panel, const ModelSpec& spec,
                  const FitConfig& config = FitConfig());

/// Pooled score / negated Hessian / exact FI at an arbitrary theta,
/// summed over subjects in panel order.
double pooled_log_likelihood(const ParamVector& theta, const SubjectPanel& panel);
Vector pooled_score(const ParamVector& theta, const SubjectPanel& panel);
FisherMatrix pooled_neg_hessian(const ParamVector& theta, const SubjectPanel& panel);
FisherMatrix pooled_ex_fi(const ParamVector& theta, const ModelSpec& spec,
                          const SubjectPanel& panel);

}  // namespace larfi

#endif  // LARFI_ESTIMATION_HPP
