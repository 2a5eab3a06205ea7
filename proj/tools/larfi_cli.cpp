// larfi: fit / simulate / reproduce / oracle-check for logistic
// autoregressive binary time-series models.
//
// Exit codes: 0 success, 1 verification failure, 2 statistical degeneracy
// (separation), 3 input error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "larfi/estimation.hpp"
#include "larfi/exact_fisher.hpp"
#include "larfi/inference.hpp"
#include "larfi/io.hpp"
#include "larfi/model.hpp"
#include "larfi/montecarlo.hpp"

using namespace larfi;
using nlohmann::json;

namespace {

constexpr int kExitVerification = 1;
constexpr int kExitSeparation = 2;
constexpr int kExitInput = 3;

std::vector<double> parse_csv_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("bad number: " + tok);
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> coef_names(const ModelSpec& spec,
                                    const std::vector<std::string>& covariates) {
  std::vector<std::string> names(covariates);
  for (int k = 0; k <= spec.p; ++k) names.push_back("beta" + std::to_string(k));
  return names;
}

json interval_json(const IntervalEstimate& e) {
  return {{"point", e.point}, {"lower", e.lower}, {"upper", e.upper}, {"level", e.level}};
}

const char* status_name(FitStatus s) {
  switch (s) {
    case FitStatus::converged: return "converged";
    case FitStatus::diverged_separation: return "diverged_separation";
    default: return "max_iter";
  }
}

// ---------------------------------------------------------------- fit --

struct FunctionalSpec {
  std::string raw;
  Functional f;
};

// "prob|lag1=1|stress=0": transform, then lag values and covariate values.
// Unmentioned lags/covariates are 0; the intercept is always included.
FunctionalSpec parse_functional(const std::string& raw, const ModelSpec& spec,
                                const std::vector<std::string>& covariates) {
  FunctionalSpec out;
  out.raw = raw;
  std::stringstream ss(raw);
  std::string tok;
  if (!std::getline(ss, tok, '|')) throw std::invalid_argument("empty functional");
  if (tok == "prob")
    out.f.transform = Transform::expit_prob;
  else if (tok == "odds")
    out.f.transform = Transform::exp_odds;
  else if (tok == "logit")
    out.f.transform = Transform::identity;
  else
    throw std::invalid_argument("functional transform must be prob, odds, or logit: " + tok);

  Vector c = Vector::Zero(spec.dim());
  c[spec.l] = 1.0;  // intercept
  while (std::getline(ss, tok, '|')) {
    auto eq = tok.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("functional term needs name=value: " + tok);
    std::string name = tok.substr(0, eq);
    double value = std::stod(tok.substr(eq + 1));
    bool found = false;
    for (int k = 1; k <= spec.p; ++k)
      if (name == "lag" + std::to_string(k)) {
        c[spec.l + k] = value;
        found = true;
      }
    for (int j = 0; j < spec.l; ++j)
      if (name == covariates[size_t(j)]) {
        c[j] = value;
        found = true;
      }
    if (!found) throw std::invalid_argument("unknown functional term: " + name);
  }
  out.f.c = c;
  return out;
}

// "--threshold col>cut" turns a numeric covariate into a 0/1 indicator.
void apply_threshold(Panel& panel, const std::string& rule) {
  auto gt = rule.find('>');
  if (gt == std::string::npos) throw std::invalid_argument("threshold needs col>cut: " + rule);
  std::string col = rule.substr(0, gt);
  double cut = std::stod(rule.substr(gt + 1));
  int j = -1;
  for (size_t i = 0; i < panel.covariate_names.size(); ++i)
    if (panel.covariate_names[i] == col) j = int(i);
  if (j < 0) throw std::invalid_argument("threshold: no covariate named " + col);
  for (Subject& s : panel.data.subjects)
    for (int t = 0; t < s.exog.rows(); ++t) s.exog(t, j) = s.exog(t, j) > cut ? 1.0 : 0.0;
}

int run_fit(const std::string& data_path, int p, double level,
            const std::vector<std::string>& functional_specs,
            const std::vector<std::string>& thresholds, const std::string& out_path,
            const std::string& dump_qt_path) {
  Panel panel = read_panel_csv_file(data_path);
  for (const auto& rule : thresholds) apply_threshold(panel, rule);
  ModelSpec spec{p, panel.l()};
  spec.validate();
  panel.data.validate(spec);

  FitResult fit = fit_mle(panel.data, spec);
  std::vector<std::string> names = coef_names(spec, panel.covariate_names);

  json config{{"command", "fit"}, {"data", data_path},      {"p", p},
              {"level", level},   {"functionals", functional_specs}, {"thresholds", thresholds}};
  json doc = make_manifest(config);
  doc["model"] = {{"p", spec.p}, {"l", spec.l}, {"covariates", panel.covariate_names}};
  doc["status"] = status_name(fit.status);
  doc["loglik"] = fit.loglik;
  doc["n_effective"] = fit.n_effective;
  doc["iterations"] = fit.iterations;
  doc["aic"] = -2.0 * fit.loglik + 2.0 * spec.p;
  doc["bic"] = -2.0 * fit.loglik + spec.p * std::log(double(fit.n_effective));

  bool have_fi = fit.status == FitStatus::converged;
  json coefs = json::array();
  Vector flat = fit.theta_hat.flat();
  for (int j = 0; j < spec.dim(); ++j) {
    json c{{"name", names[size_t(j)]}, {"estimate", flat[j]}};
    if (have_fi) {
      for (auto [key, fi, src] :
           {std::tuple{"exact", &fit.ex_fi, FiSource::exact},
            std::tuple{"empirical", &fit.em_fi, FiSource::empirical}}) {
        Matrix inv = invert_spd(*fi, key);
        c[key] = interval_json(wald_ci(fit.theta_hat, *fi, j, level, src));
        c[key]["se"] = std::sqrt(inv(j, j));
      }
    }
    coefs.push_back(c);
  }
  doc["coefficients"] = coefs;

  if (have_fi) {
    json fns = json::array();
    for (const std::string& raw : functional_specs) {
      FunctionalSpec fs = parse_functional(raw, spec, panel.covariate_names);
      json f{{"spec", raw}};
      f["exact"] = interval_json(functional_ci(fit.theta_hat, fit.ex_fi, fs.f, level, FiSource::exact));
      f["empirical"] =
          interval_json(functional_ci(fit.theta_hat, fit.em_fi, fs.f, level, FiSource::empirical));
      fns.push_back(f);
    }
    doc["functionals"] = fns;
  }

  if (!dump_qt_path.empty()) {
    // lag-block distribution of the first subject at theta-hat, one row
    // per (time, state)
    const Subject& s0 = panel.data.subjects.front();
    LagState init{0, spec.p};
    std::vector<int> bits(size_t(spec.p));
    for (int k = 0; k < spec.p; ++k) bits[size_t(k)] = s0.series.y[size_t(spec.p - 1 - k)];
    init = LagState::from_bits(bits);
    auto dists = qt_forward(fit.theta_hat, spec, init, int(s0.series.y.size()),
                            spec.l > 0 ? &s0.exog : nullptr);
    std::vector<std::vector<std::string>> rows;
    for (const auto& d : dists)
      for (int s = 0; s < d.q.size(); ++s)
        rows.push_back({std::to_string(d.t), std::to_string(s), format_double(d.q[s])});
    write_csv_file(dump_qt_path, {"t", "state", "prob"}, rows);
  }

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw std::invalid_argument("cannot write " + out_path);
    out = &file;
  }
  *out << doc.dump(2) << "\n";

  // human-readable table on stderr so stdout stays machine-readable
  std::ostream& tbl = std::cerr;
  tbl << "status: " << status_name(fit.status) << "  loglik: " << fit.loglik
      << "  n_effective: " << fit.n_effective << "\n";
  if (have_fi) {
    tbl << "coefficient   estimate      exact " << int(level * 100) << "% CI"
        << "            empirical " << int(level * 100) << "% CI\n";
    for (const auto& c : coefs) {
      char line[160];
      std::snprintf(line, sizeof line, "%-12s %9.4f   [%9.4f, %9.4f]   [%9.4f, %9.4f]\n",
                    c["name"].get<std::string>().c_str(), c["estimate"].get<double>(),
                    c["exact"]["lower"].get<double>(), c["exact"]["upper"].get<double>(),
                    c["empirical"]["lower"].get<double>(), c["empirical"]["upper"].get<double>());
      tbl << line;
    }
  }
  if (fit.status == FitStatus::diverged_separation) {
    tbl << "separation detected: the likelihood has no finite maximizer; "
           "estimates are the clamped last iterate\n";
    return kExitSeparation;
  }
  return 0;
}

// ----------------------------------------------------------- simulate --

int run_simulate(int p, int l, const std::string& theta_csv, int T, int subjects,
                 std::uint64_t seed, const std::string& out_path) {
  ModelSpec spec{p, l};
  spec.validate();
  std::vector<double> vals = parse_csv_doubles(theta_csv);
  if (int(vals.size()) != spec.dim())
    throw std::invalid_argument("theta needs " + std::to_string(spec.dim()) +
                                " values (alpha_1..alpha_l, beta_0..beta_p)");
  Vector flat = Eigen::Map<Vector>(vals.data(), long(vals.size()));
  ParamVector theta = ParamVector::from_flat(spec, flat);

  Panel panel;
  for (int j = 0; j < l; ++j) panel.covariate_names.push_back("x" + std::to_string(j + 1));
  for (int i = 0; i < subjects; ++i) {
    Rng rng(substream(seed, std::uint64_t(i)));
    auto [series, exog] = simulate_series(
        theta, spec, T, rng, InitialPolicy{},
        l > 0 ? ExogPolicy::iid_standard_normal : ExogPolicy::none);
    panel.ids.push_back("s" + std::to_string(i + 1));
    panel.data.subjects.push_back({series, exog});
  }
  if (out_path.empty())
    write_panel_csv(std::cout, panel);
  else
    write_panel_csv_file(out_path, panel);
  return 0;
}

// ---------------------------------------------------------- reproduce --

struct TableCell {
  const char* ratio;
  int T;
  const char* coef;        // tabulated coefficient
  int tested_coord;        // flat index of that coefficient
  const char* source;      // exact | empirical
  // published values: type I, avg SE at MLE, SE at truth, MC SE, observed SD
  double type1, avg_se, se_truth, mc_se, obs_sd;
};

struct TableStudy {
  const char* name;
  ModelSpec spec;
  Vector theta_low, theta_high;
  std::vector<TableCell> cells;
  const char* citation;
};

TableStudy table_study(const std::string& name) {
  if (name == "table1") {
    return {"table1",
            ModelSpec{1, 0},
            (Vector(2) << 0.1, 0.5).finished(),
            (Vector(2) << 0.1, 1.0).finished(),
            {
                {"low", 20, "beta1", 1, "exact", 0.031, 3.737, 2.320, 0.324, 2.290},
                {"low", 20, "beta1", 1, "empirical", 0.030, 32.870, 12.290, 2.438, 2.290},
                {"low", 50, "beta1", 1, "exact", 0.048, 0.617, 0.630, 0.084, 0.632},
                {"low", 50, "beta1", 1, "empirical", 0.044, 0.956, 0.748, 0.055, 0.632},
                {"low", 200, "beta1", 1, "exact", 0.052, 0.299, 0.299, 0.006, 0.299},
                {"low", 200, "beta1", 1, "empirical", 0.052, 0.297, 0.298, 0.004, 0.299},
                {"high", 20, "beta1", 1, "exact", 0.008, 7.868, 3.075, 0.543, 3.015},
                {"high", 20, "beta1", 1, "empirical", 0.011, 362.300, 30.343, 14.355, 3.015},
                {"high", 50, "beta1", 1, "exact", 0.039, 1.065, 1.070, 0.064, 1.074},
                {"high", 50, "beta1", 1, "empirical", 0.039, 1.222, 1.148, 0.056, 1.074},
                {"high", 200, "beta1", 1, "exact", 0.051, 0.332, 0.326, 0.008, 0.325},
                {"high", 200, "beta1", 1, "empirical", 0.053, 0.324, 0.325, 0.005, 0.325},
            },
            "one-lag scenario, reference values from the published simulation summary"};
  }
  if (name == "table2") {
    return {"table2",
            ModelSpec{2, 0},
            (Vector(3) << 0.1, 0.3, 0.5).finished(),
            (Vector(3) << 0.1, 1.0, 1.5).finished(),
            {
                {"low", 20, "beta1", 1, "exact", 0.030, 8.960, 4.351, 2.354, 4.312},
                {"low", 20, "beta1", 1, "empirical", 0.031, 294.409, 56.294, 21.343, 4.312},
                {"low", 20, "beta2", 2, "exact", 0.042, 8.001, 3.942, 2.103, 3.901},
                {"low", 20, "beta2", 2, "empirical", 0.041, 363.611, 64.239, 24.031, 3.901},
                {"low", 50, "beta1", 1, "exact", 0.048, 1.031, 1.250, 0.073, 1.247},
                {"low", 50, "beta1", 1, "empirical", 0.047, 1.544, 1.532, 0.085, 1.247},
                {"low", 50, "beta2", 2, "exact", 0.042, 1.011, 0.942, 0.051, 0.949},
                {"low", 50, "beta2", 2, "empirical", 0.041, 1.836, 1.825, 0.044, 0.949},
                {"low", 200, "beta1", 1, "exact", 0.052, 0.734, 0.614, 0.008, 0.612},
                {"low", 200, "beta1", 1, "empirical", 0.051, 0.849, 0.753, 0.004, 0.612},
                {"low", 200, "beta2", 2, "exact", 0.048, 0.801, 0.702, 0.007, 0.701},
                {"low", 200, "beta2", 2, "empirical", 0.050, 0.913, 0.645, 0.004, 0.701},
                {"high", 20, "beta1", 1, "exact", 0.027, 10.149, 8.102, 2.895, 7.944},
                {"high", 20, "beta1", 1, "empirical", 0.028, 254.576, 42.135, 20.540, 7.944},
                {"high", 20, "beta2", 2, "exact", 0.028, 7.868, 7.041, 3.012, 6.931},
                {"high", 20, "beta2", 2, "empirical", 0.031, 190.567, 36.356, 27.012, 6.931},
                {"high", 50, "beta1", 1, "exact", 0.030, 3.339, 3.286, 0.054, 3.284},
                {"high", 50, "beta1", 1, "empirical", 0.031, 6.433, 1.845, 0.125, 3.284},
                {"high", 50, "beta2", 2, "exact", 0.043, 5.025, 3.995, 0.083, 3.993},
                {"high", 50, "beta2", 2, "empirical", 0.042, 5.806, 4.024, 0.121, 3.993},
                {"high", 200, "beta1", 1, "exact", 0.047, 2.562, 2.521, 1.042, 2.522},
                {"high", 200, "beta1", 1, "empirical", 0.045, 4.834, 3.454, 1.021, 2.522},
                {"high", 200, "beta2", 2, "exact", 0.048, 1.762, 1.504, 0.542, 1.503},
                {"high", 200, "beta2", 2, "empirical", 0.050, 1.864, 1.735, 0.842, 1.503},
            },
            "two-lag scenario, reference values from the published simulation summary"};
  }
  if (name == "table3") {
    // the published header lists the high-ratio alpha as 1; the running
    // text says 0.5, which we follow
    return {"table3",
            ModelSpec{1, 1},
            (Vector(3) << 0.5, 0.1, 0.5).finished(),
            (Vector(3) << 0.5, 0.1, 1.0).finished(),
            {
                {"low", 20, "alpha1", 0, "exact", 0.027, 10.801, 6.382, 2.753, 6.363},
                {"low", 20, "alpha1", 0, "empirical", 0.029, 241.515, 24.352, 8.954, 6.363},
                {"low", 20, "beta1", 2, "exact", 0.032, 13.242, 5.942, 2.021, 6.018},
                {"low", 20, "beta1", 2, "empirical", 0.035, 134.542, 34.240, 10.324, 6.018},
                {"low", 50, "alpha1", 0, "exact", 0.048, 0.334, 0.332, 0.062, 0.332},
                {"low", 50, "alpha1", 0, "empirical", 0.047, 0.852, 0.344, 0.053, 0.332},
                {"low", 50, "beta1", 2, "exact", 0.042, 0.783, 0.694, 0.073, 0.691},
                {"low", 50, "beta1", 2, "empirical", 0.041, 1.333, 0.723, 0.042, 0.691},
                {"low", 200, "alpha1", 0, "exact", 0.051, 0.194, 0.184, 0.006, 0.185},
                {"low", 200, "alpha1", 0, "empirical", 0.050, 0.199, 0.193, 0.007, 0.185},
                {"low", 200, "beta1", 2, "exact", 0.049, 0.315, 0.314, 0.007, 0.314},
                {"low", 200, "beta1", 2, "empirical", 0.051, 0.316, 0.315, 0.006, 0.314},
                {"high", 20, "alpha1", 0, "exact", 0.031, 18.535, 17.302, 4.435, 17.522},
                {"high", 20, "alpha1", 0, "empirical", 0.032, 352.153, 31.233, 14.983, 17.522},
                {"high", 20, "beta1", 2, "exact", 0.038, 17.322, 12.011, 4.321, 11.460},
                {"high", 20, "beta1", 2, "empirical", 0.036, 179.222, 14.324, 9.921, 11.460},
                {"high", 50, "alpha1", 0, "exact", 0.033, 0.566, 0.529, 0.041, 0.531},
                {"high", 50, "alpha1", 0, "empirical", 0.033, 0.963, 0.552, 0.063, 0.531},
                {"high", 50, "beta1", 2, "exact", 0.038, 0.785, 0.763, 0.050, 0.769},
                {"high", 50, "beta1", 2, "empirical", 0.039, 1.420, 0.774, 0.041, 0.769},
                {"high", 200, "alpha1", 0, "exact", 0.048, 0.198, 0.198, 0.003, 0.198},
                {"high", 200, "alpha1", 0, "empirical", 0.046, 0.196, 0.196, 0.004, 0.198},
                {"high", 200, "beta1", 2, "exact", 0.050, 0.343, 0.343, 0.005, 0.343},
                {"high", 200, "beta1", 2, "empirical", 0.051, 0.342, 0.340, 0.005, 0.343},
            },
            "one-lag-plus-covariate scenario, reference values from the published "
            "simulation summary"};
  }
  throw std::invalid_argument("unknown table study: " + name);
}

std::string fmtd(double v) { return format_double(v); }

int run_reproduce(const std::string& study, int replicates, std::uint64_t seed,
                  const std::string& out_dir) {
  json config{{"command", "reproduce"}, {"study", study}, {"seed", seed}};
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string citation;

  auto base_cfg = [&](const ModelSpec& spec, const Vector& theta, int T) {
    ScenarioConfig c;
    c.spec = spec;
    c.theta_true = theta;
    c.T = T;
    c.seed = seed;
    c.exog_policy = spec.l > 0 ? ExogPolicy::iid_standard_normal : ExogPolicy::none;
    return c;
  };

  if (study == "table1" || study == "table2" || study == "table3") {
    TableStudy ts = table_study(study);
    int reps = replicates > 0 ? replicates : 10000;
    config["replicates"] = reps;
    citation = ts.citation;
    header = {"ratio",    "T",        "coefficient", "source",       "type1",
              "avg_se",   "se_truth", "mc_se",       "observed_sd",  "n_diverged",
              "ref_type1", "ref_avg_se", "ref_se_truth", "ref_mc_se", "ref_observed_sd"};
    // one scenario run per (ratio, T, coefficient); both sources share it
    for (size_t i = 0; i < ts.cells.size(); i += 2) {
      const TableCell& ex_cell = ts.cells[i];
      const TableCell& em_cell = ts.cells[i + 1];
      auto cfg = base_cfg(ts.spec, std::string(ex_cell.ratio) == "low" ? ts.theta_low : ts.theta_high,
                          ex_cell.T);
      cfg.replicates = reps;
      cfg.tested_coord = ex_cell.tested_coord;
      cfg.theta_null = cfg.theta_true;
      (*cfg.theta_null)[ex_cell.tested_coord] = 0.0;
      McSummary s = run_scenario(cfg);
      for (auto [cell, col] : {std::pair{&ex_cell, &s.exact}, {&em_cell, &s.empirical}}) {
        rows.push_back({cell->ratio, std::to_string(cell->T), cell->coef, cell->source,
                        fmtd(col->type1_rate), fmtd(col->avg_se_at_mle), fmtd(col->avg_se_at_truth),
                        fmtd(col->mc_se_at_mle), fmtd(s.observed_sd), std::to_string(s.n_diverged),
                        fmtd(cell->type1), fmtd(cell->avg_se), fmtd(cell->se_truth),
                        fmtd(cell->mc_se), fmtd(cell->obs_sd)});
      }
    }
  } else if (study == "fig1" || study == "fig2") {
    int reps = replicates > 0 ? replicates : 1000;
    config["replicates"] = reps;
    citation = "relative 95% CI length difference (empirical - exact)/exact";
    header = {"panel", "grid", "mean_rel_ci_diff", "n_used", "n_skipped"};
    if (study == "fig1") {
      auto cfg = base_cfg(ModelSpec{1, 0}, (Vector(2) << 0.1, 1.0).finished(), 0);
      cfg.replicates = reps;
      for (auto [panel, grid] :
           {std::pair<const char*, std::vector<double>>{"a", {5, 10, 20, 40, 60, 80, 100}},
            {"b", {50, 75, 100, 125, 150, 175, 200}}}) {
        for (const auto& p : ci_length_study(cfg, grid, CiGrid::over_T))
          rows.push_back({panel, fmtd(p.grid_value), fmtd(p.mean_rel_diff),
                          std::to_string(p.n_used), std::to_string(p.n_skipped)});
      }
    } else {
      std::vector<double> beta1_grid{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
      for (auto [panel, T] : {std::pair<const char*, int>{"a", 60}, {"b", 100}}) {
        auto cfg = base_cfg(ModelSpec{1, 0}, (Vector(2) << 0.1, 0.5).finished(), T);
        cfg.replicates = reps;
        for (const auto& p : ci_length_study(cfg, beta1_grid, CiGrid::over_beta1))
          rows.push_back({panel, fmtd(p.grid_value), fmtd(p.mean_rel_diff),
                          std::to_string(p.n_used), std::to_string(p.n_skipped)});
      }
    }
  } else if (study == "fig3" || study == "fig5") {
    int reps = replicates > 0 ? replicates : 1000;
    config["replicates"] = reps;
    FrobMode mode = study == "fig3" ? FrobMode::inverse_fi : FrobMode::fi;
    citation = study == "fig3"
                   ? "mean Frobenius norm of the difference of inverse information matrices"
                   : "mean Frobenius norm of the difference of information matrices";
    header = {"ratio", "T", "mean_frobenius", "n_used", "n_singular"};
    std::vector<std::pair<const char*, double>> ratios =
        study == "fig3" ? std::vector<std::pair<const char*, double>>{{"5", 0.5}, {"10", 1.0}}
                        : std::vector<std::pair<const char*, double>>{{"5", 0.5}};
    std::vector<int> T_grid;
    if (study == "fig3")
      T_grid = {10, 25, 50, 100, 150, 200, 250};
    else
      T_grid = {5, 25, 50, 100, 150, 200, 250, 350, 450, 550};
    for (auto [label, b1] : ratios) {
      auto cfg = base_cfg(ModelSpec{1, 0}, (Vector(2) << 0.1, b1).finished(), 0);
      cfg.replicates = reps;
      for (const auto& p : frobenius_study(cfg, T_grid, mode))
        rows.push_back({label, std::to_string(p.T), fmtd(p.mean_frobenius),
                        std::to_string(p.n_used), std::to_string(p.n_singular)});
    }
  } else {
    throw std::invalid_argument("unknown study: " + study);
  }

  std::filesystem::create_directories(out_dir);
  std::string csv_path = out_dir + "/" + study + ".csv";
  write_csv_file(csv_path, header, rows);
  json manifest = make_manifest(config);
  manifest["citation"] = citation;
  manifest["output"] = csv_path;
  write_json_file(out_dir + "/" + study + "_manifest.json", manifest);
  std::cout << "wrote " << csv_path << " (" << rows.size() << " rows)\n";
  return 0;
}

// -------------------------------------------------------- oracle-check --

int run_oracle_check(int p_min, int p_max, int T_max, int trials, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  for (int p = p_min; p <= p_max; ++p) {
    ModelSpec spec{p, 0};
    for (int T = p + 1; T <= T_max; ++T) {
      if (T - p > 24) throw std::invalid_argument("T - p must be <= 24 for the path oracle");
      for (int trial = 0; trial < trials; ++trial) {
        Vector flat(spec.dim());
        for (int j = 0; j < spec.dim(); ++j) flat[j] = u(g);
        ParamVector theta = ParamVector::from_flat(spec, flat);
        LagState init{std::uint32_t(g() & ((1u << p) - 1)), p};
        FisherMatrix fwd = ex_fi_forward(theta, spec, init, T);
        double d = (fwd - ex_fi_bruteforce(theta, spec, init, T)).cwiseAbs().maxCoeff();
        d = std::max(d,
                     (ex_fi_functional_iteration(theta, spec, init, T) - fwd).cwiseAbs().maxCoeff());
        if (p == 1)
          d = std::max(d, (ex_fi_lar1_closed_form(theta, T, int(init.code & 1)) - fwd)
                              .cwiseAbs()
                              .maxCoeff());
        worst = std::max(worst, d);
        if (d >= 1e-10) {
          std::cerr << "oracle mismatch " << d << " at p=" << p << " T=" << T
                    << " init=" << init.code << " theta=" << flat.transpose() << "\n";
          return kExitVerification;
        }
      }
    }
  }
  std::cout << "oracle check passed: max discrepancy " << worst << " across p in [" << p_min
            << "," << p_max << "], T up to " << T_max << ", " << trials << " trials each\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("LARFI_THREADS")) {
#ifdef _OPENMP
    int n = std::atoi(threads);
    if (n > 0) omp_set_num_threads(n);
#endif
  }

  CLI::App app{"exact and empirical Fisher information for logistic autoregressive "
               "binary time series"};
  app.require_subcommand(1);

  // fit
  auto* fit = app.add_subcommand("fit", "fit a model to a panel CSV");
  std::string data_path, out_path, dump_qt_path;
  int p = 1;
  double level = 0.95;
  std::vector<std::string> functionals, thresholds;
  fit->add_option("--data", data_path, "panel CSV (subject,t,y[,x1..xl])")->required();
  fit->add_option("--p", p, "autoregressive order");
  fit->add_option("--level", level, "confidence level")->check(CLI::Range(0.5, 0.9999));
  fit->add_option("--functional", functionals,
                  "transformed functional, e.g. \"prob|lag1=1|stress=0\"");
  fit->add_option("--threshold", thresholds, "binarize a covariate, e.g. \"stress>7\"");
  fit->add_option("--out", out_path, "write the result document here instead of stdout");
  fit->add_option("--dump-qt", dump_qt_path, "write the fitted lag-state distributions as CSV");

  // simulate
  auto* sim = app.add_subcommand("simulate", "write a simulated panel CSV");
  std::string theta_csv, sim_out;
  int sim_p = 1, sim_l = 0, T = 100, subjects = 1;
  std::uint64_t seed = 20240901;
  sim->add_option("--p", sim_p, "autoregressive order");
  sim->add_option("--exog", sim_l, "number of standard-normal covariates");
  sim->add_option("--theta", theta_csv, "alpha_1..alpha_l,beta_0..beta_p")->required();
  sim->add_option("--T", T, "series length per subject")->check(CLI::PositiveNumber);
  sim->add_option("--subjects", subjects, "number of subjects")->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "rng seed");
  sim->add_option("--out", sim_out, "output path (default stdout)");

  // reproduce
  auto* rep = app.add_subcommand("reproduce", "run a published simulation study");
  std::string study, out_dir = ".";
  int replicates = 0;
  std::uint64_t rep_seed = 20240901;
  rep->add_option("study", study, "table1|table2|table3|fig1|fig2|fig3|fig5")->required();
  rep->add_option("--replicates", replicates, "override the published replicate count");
  rep->add_option("--seed", rep_seed, "rng seed");
  rep->add_option("--out-dir", out_dir, "directory for CSV + manifest");

  // oracle-check
  auto* oc = app.add_subcommand("oracle-check",
                                "cross-check all information algorithms against path enumeration");
  int p_min = 1, p_max = 3, T_max = 12, trials = 50;
  std::uint64_t oc_seed = 20240901;
  oc->add_option("--p-min", p_min)->check(CLI::PositiveNumber);
  oc->add_option("--p-max", p_max)->check(CLI::PositiveNumber);
  oc->add_option("--T-max", T_max)->check(CLI::PositiveNumber);
  oc->add_option("--trials", trials)->check(CLI::PositiveNumber);
  oc->add_option("--seed", oc_seed, "rng seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) return run_fit(data_path, p, level, functionals, thresholds, out_path, dump_qt_path);
    if (*sim) return run_simulate(sim_p, sim_l, theta_csv, T, subjects, seed, sim_out);
    if (*rep) return run_reproduce(study, replicates, rep_seed, out_dir);
    if (*oc) return run_oracle_check(p_min, p_max, T_max, trials, oc_seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerification;
  }
  return 0;
}
