#include "larfi/montecarlo.hpp"

#include <cmath>
#include <stdexcept>

#include "larfi/inference.hpp"

namespace larfi {

double Rng::uniform() {
  // 53-bit mantissa mapping, platform-independent
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t substream(std::uint64_t seed, std::uint64_t k) {
  // splitmix64 finalizer over (seed, k)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::pair<BinarySeries, ExogMatrix> simulate_series(const ParamVector& theta,
                                                    const ModelSpec& spec, int T,
                                                    Rng& rng,
                                                    const InitialPolicy& initial,
                                                    ExogPolicy exog_policy) {
  spec.validate();
  theta.check_matches(spec);
  if (T < spec.p + 1)
    throw std::invalid_argument("simulate_series: T must be at least p+1");

  ExogMatrix exog;
  if (exog_policy == ExogPolicy::iid_standard_normal) {
    if (spec.l == 0)
      throw std::invalid_argument("simulate_series: exogenous policy set but l = 0");
    exog.resize(T, spec.l);
    for (int t = 0; t < T; ++t)
      for (int j = 0; j < spec.l; ++j) exog(t, j) = rng.normal();
  } else if (spec.l > 0) {
    throw std::invalid_argument("simulate_series: l > 0 requires an exogenous policy");
  }

  BinarySeries series;
  series.y.resize(T);
  if (initial.kind == InitialPolicy::fixed) {
    if (initial.state.p != spec.p)
      throw std::invalid_argument("simulate_series: fixed initial state must match p");
    // bit k of the code holds y_{p-k}
    for (int j = 0; j < spec.p; ++j)
      series.y[j] = initial.state.code >> (spec.p - 1 - j) & 1u;
  } else {
    if (!(initial.q > 0.0 && initial.q < 1.0))
      throw std::invalid_argument("simulate_series: initial Bernoulli q must be in (0,1)");
    for (int j = 0; j < spec.p; ++j)
      series.y[j] = static_cast<std::int8_t>(rng.bernoulli(initial.q));
  }

  const unsigned mask = (1u << spec.p) - 1;
  unsigned state = 0;
  for (int k = 0; k < spec.p; ++k)
    if (series.y[spec.p - 1 - k]) state |= 1u << k;

  Vector xbuf;
  for (int t = spec.p; t < T; ++t) {
    const double* xr = nullptr;
    if (spec.l > 0) {
      xbuf = exog.row(t);
      xr = xbuf.data();
    }
    const double pt = expit(detail::eta_state(theta, state, xr));
    const int y = rng.bernoulli(pt);
    series.y[t] = static_cast<std::int8_t>(y);
    state = ((state << 1) & mask) | static_cast<unsigned>(y);
  }
  return {std::move(series), std::move(exog)};
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

LagState initial_block(const BinarySeries& series, int p) {
  std::vector<int> bits(p);
  for (int k = 0; k < p; ++k) bits[k] = series.y[p - 1 - k];
  return LagState::from_bits(bits);
}

double se_from(const FisherMatrix& fi, int coord) {
  try {
    const Matrix inv = invert_spd(fi, "information matrix");
    const double se = std::sqrt(inv(coord, coord));
    return std::isfinite(se) ? se : kNaN;
  } catch (const std::runtime_error&) {
    return kNaN;
  }
}

struct RepRecord {
  double beta_hat = kNaN;
  bool diverged = false;
  double se_mle_ex = kNaN, se_mle_em = kNaN;
  double se_truth_ex = kNaN, se_truth_em = kNaN;
  bool has_type1 = false;
  bool reject_ex = false, reject_em = false;
};

RepRecord run_replicate(const ScenarioConfig& cfg, std::uint64_t k) {
  RepRecord rec;
  const ParamVector theta_true = ParamVector::from_flat(cfg.spec, cfg.theta_true);

  // SE stream under the true parameter
  {
    Rng rng(substream(cfg.seed, 2 * k));
    auto [series, exog] = simulate_series(theta_true, cfg.spec, cfg.T, rng,
                                          cfg.initial_policy, cfg.exog_policy);
    SubjectPanel panel;
    panel.subjects.push_back({series, exog});
    const FitResult fit = fit_mle(panel, cfg.spec, cfg.fit);
    rec.beta_hat = fit.theta_hat.flat()[cfg.tested_coord];
    rec.diverged = fit.status == FitStatus::diverged_separation;
    rec.se_mle_ex = se_from(fit.ex_fi, cfg.tested_coord);
    rec.se_mle_em = se_from(fit.em_fi, cfg.tested_coord);

    const ExogMatrix* xp = cfg.spec.l > 0 ? &exog : nullptr;
    rec.se_truth_ex = se_from(ex_fi_forward(theta_true, cfg.spec,
                                            initial_block(series, cfg.spec.p),
                                            cfg.T, xp),
                              cfg.tested_coord);
    rec.se_truth_em = se_from(em_fi(theta_true, series, xp), cfg.tested_coord);
  }

  // type-I-error stream under the null generator
  if (cfg.theta_null) {
    rec.has_type1 = true;
    const ParamVector theta_null = ParamVector::from_flat(cfg.spec, *cfg.theta_null);
    Rng rng(substream(cfg.seed, 2 * k + 1));
    auto [series, exog] = simulate_series(theta_null, cfg.spec, cfg.T, rng,
                                          cfg.initial_policy, cfg.exog_policy);
    SubjectPanel panel;
    panel.subjects.push_back({series, exog});
    const FitResult fit = fit_mle(panel, cfg.spec, cfg.fit);
    // singular information cannot reject
    auto reject = [&](const FisherMatrix& fi) {
      try {
        return wald_test(fit.theta_hat, fi, cfg.tested_coord).reject_at_05;
      } catch (const std::runtime_error&) {
        return false;
      }
    };
    rec.reject_ex = reject(fit.ex_fi);
    rec.reject_em = reject(fit.em_fi);
  }
  return rec;
}

struct Moments {
  double mean = kNaN, sd = kNaN;
  int n = 0;
};

template <typename Get>
Moments moments_of(const std::vector<RepRecord>& recs, Get&& get) {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : recs) {
    const double v = get(r);
    if (std::isfinite(v)) { sum += v; ++n; }
  }
  if (n == 0) return {};
  const double mean = sum / n;
  double ss = 0.0;
  for (const auto& r : recs) {
    const double v = get(r);
    if (std::isfinite(v)) ss += (v - mean) * (v - mean);
  }
  return {mean, n > 1 ? std::sqrt(ss / (n - 1)) : 0.0, n};
}

void validate_config(const ScenarioConfig& cfg) {
  cfg.spec.validate();
  if (cfg.theta_true.size() != cfg.spec.dim())
    throw std::invalid_argument("ScenarioConfig: theta_true must have length d");
  if (cfg.theta_null && cfg.theta_null->size() != cfg.spec.dim())
    throw std::invalid_argument("ScenarioConfig: theta_null must have length d");
  if (cfg.tested_coord < 0 || cfg.tested_coord >= cfg.spec.dim())
    throw std::invalid_argument("ScenarioConfig: tested coordinate out of range");
  if (cfg.replicates < 1)
    throw std::invalid_argument("ScenarioConfig: need at least one replicate");
}

std::vector<RepRecord> run_replicates(const ScenarioConfig& cfg) {
  std::vector<RepRecord> recs(cfg.replicates);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < cfg.replicates; ++k)
    recs[k] = run_replicate(cfg, static_cast<std::uint64_t>(k));
  return recs;
}

}  // namespace

McSummary run_scenario(const ScenarioConfig& cfg) {
  validate_config(cfg);
  const std::vector<RepRecord> recs = run_replicates(cfg);

  McSummary out;
  out.replicates = cfg.replicates;
  for (const auto& r : recs)
    if (r.diverged) ++out.n_diverged;

  auto fill = [&](McColumn& col, auto se_mle, auto se_truth, auto rej) {
    const Moments mle = moments_of(recs, se_mle);
    const Moments truth = moments_of(recs, se_truth);
    col.avg_se_at_mle = mle.mean;
    col.mc_se_at_mle = mle.sd;
    col.avg_se_at_truth = truth.mean;
    col.mc_se_at_truth = truth.sd;
    col.n_singular = cfg.replicates - mle.n;
    if (cfg.theta_null) {
      int nrej = 0;
      for (const auto& r : recs)
        if (rej(r)) ++nrej;
      col.type1_rate = static_cast<double>(nrej) / cfg.replicates;
    }
  };
  fill(out.exact, [](const RepRecord& r) { return r.se_mle_ex; },
       [](const RepRecord& r) { return r.se_truth_ex; },
       [](const RepRecord& r) { return r.reject_ex; });
  fill(out.empirical, [](const RepRecord& r) { return r.se_mle_em; },
       [](const RepRecord& r) { return r.se_truth_em; },
       [](const RepRecord& r) { return r.reject_em; });

  out.observed_sd =
      moments_of(recs, [](const RepRecord& r) { return r.beta_hat; }).sd;
  return out;
}

std::vector<CiLengthPoint> ci_length_study(const ScenarioConfig& base,
                                           const std::vector<double>& grid,
                                           CiGrid axis) {
  if (grid.empty()) throw std::invalid_argument("ci_length_study: empty grid");
  std::vector<CiLengthPoint> out;
  for (size_t i = 0; i < grid.size(); ++i) {
    ScenarioConfig cfg = base;
    cfg.theta_null.reset();
    if (axis == CiGrid::over_T) {
      cfg.T = static_cast<int>(grid[i]);
    } else {
      cfg.theta_true[cfg.tested_coord] = grid[i];
    }
    cfg.seed = substream(base.seed, 0x10000 + i);
    validate_config(cfg);
    const std::vector<RepRecord> recs = run_replicates(cfg);

    CiLengthPoint pt;
    pt.grid_value = grid[i];
    double sum = 0.0;
    for (const auto& r : recs) {
      // 95% CI lengths are proportional to the SEs, so the relative
      // length difference is the relative SE difference
      if (std::isfinite(r.se_mle_ex) && std::isfinite(r.se_mle_em) &&
          r.se_mle_ex > 0.0) {
        sum += (r.se_mle_em - r.se_mle_ex) / r.se_mle_ex;
        ++pt.n_used;
      } else {
        ++pt.n_skipped;
      }
    }
    pt.mean_rel_diff = pt.n_used > 0 ? sum / pt.n_used : kNaN;
    out.push_back(pt);
  }
  return out;
}

std::vector<FrobeniusPoint> frobenius_study(const ScenarioConfig& base,
                                            const std::vector<int>& T_grid,
                                            FrobMode mode) {
  if (T_grid.empty()) throw std::invalid_argument("frobenius_study: empty grid");
  std::vector<FrobeniusPoint> out;
  for (size_t i = 0; i < T_grid.size(); ++i) {
    ScenarioConfig cfg = base;
    cfg.theta_null.reset();
    cfg.T = T_grid[i];
    cfg.seed = substream(base.seed, 0x20000 + i);
    validate_config(cfg);

    const ParamVector theta_true = ParamVector::from_flat(cfg.spec, cfg.theta_true);
    std::vector<double> norms(cfg.replicates, kNaN);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < cfg.replicates; ++k) {
      Rng rng(substream(cfg.seed, 2 * static_cast<std::uint64_t>(k)));
      auto [series, exog] = simulate_series(theta_true, cfg.spec, cfg.T, rng,
                                            cfg.initial_policy, cfg.exog_policy);
      SubjectPanel panel;
      panel.subjects.push_back({series, exog});
      const FitResult fit = fit_mle(panel, cfg.spec, cfg.fit);
      if (mode == FrobMode::fi) {
        norms[k] = (fit.ex_fi - fit.em_fi).norm();
      } else {
        try {
          const Matrix a = invert_spd(fit.ex_fi, "exact Fisher information");
          const Matrix b = invert_spd(fit.em_fi, "empirical Fisher information");
          norms[k] = (a - b).norm();
        } catch (const std::runtime_error&) {
          // left NaN, tallied as singular
        }
      }
    }

    FrobeniusPoint pt;
    pt.T = T_grid[i];
    double sum = 0.0;
    for (double v : norms) {
      if (std::isfinite(v)) { sum += v; ++pt.n_used; }
      else ++pt.n_singular;
    }
    pt.mean_frobenius = pt.n_used > 0 ? sum / pt.n_used : kNaN;
    out.push_back(pt);
  }
  return out;
}

}  // namespace larfi
