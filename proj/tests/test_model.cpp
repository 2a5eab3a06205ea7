#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "larfi/model.hpp"
#include "test_util.hpp"

using namespace larfi;

TEST_CASE("cond_prob matches scalar logistic evaluation") {
  // zero parameters give even odds
  ParamVector theta0 = ParamVector::lar((Vector(2) << 0.0, 0.0).finished());
  CHECK(cond_prob(theta0, {1}) == doctest::Approx(0.5).epsilon(1e-14));

  // expit(0.1 + 0.5) = expit(0.6), frozen from an independent evaluation
  ParamVector theta = ParamVector::lar((Vector(2) << 0.1, 0.5).finished());
  CHECK(cond_prob(theta, {1}) == doctest::Approx(0.6456563062257954).epsilon(1e-12));

  // zero covariate reduces LARX to the LAR intercept case
  ParamVector larx((Vector(1) << 0.5).finished(), (Vector(2) << 0.1, 1.0).finished());
  CHECK(cond_prob(larx, {0}, (Vector(1) << 0.0).finished()) ==
        doctest::Approx(0.52497918747894).epsilon(1e-12));
}

TEST_CASE("cond_prob rejects dimension mismatches") {
  ParamVector theta = ParamVector::lar((Vector(2) << 0.1, 0.5).finished());
  CHECK_THROWS_AS(cond_prob(theta, {1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(cond_prob(theta, {1}, (Vector(1) << 0.3).finished()),
                  std::invalid_argument);
  CHECK_THROWS_AS(cond_prob(theta, {2}), std::invalid_argument);
}

TEST_CASE("expit is stable at extreme log-odds") {
  CHECK(expit(40.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(expit(-40.0) > 0.0);
  CHECK(expit(-800.0) == 0.0);  // underflow, not NaN
  CHECK(std::isfinite(expit(800.0)));
}

TEST_CASE("log_likelihood closed-form cases") {
  ParamVector zeros = ParamVector::lar(Vector::Zero(2));
  auto g = test::test_rng(7);
  for (int T : {5, 20, 100}) {
    BinarySeries s = test::random_series(g, T);
    CHECK(log_likelihood(zeros, s) ==
          doctest::Approx(-(T - 1) * std::log(2.0)).epsilon(1e-13));
  }

  // single-term series: log expit(0.6)
  ParamVector theta = ParamVector::lar((Vector(2) << 0.1, 0.5).finished());
  BinarySeries two{{1, 1}};
  CHECK(log_likelihood(theta, two) ==
        doctest::Approx(std::log(0.6456563062257954)).epsilon(1e-12));
}

TEST_CASE("all-ones series has likelihood strictly increasing in intercept") {
  BinarySeries ones{std::vector<std::int8_t>(20, 1)};
  double prev = -1e300;
  for (double b0 : {0.0, 1.0, 2.0, 4.0, 8.0}) {
    const double ll =
        log_likelihood(ParamVector::lar((Vector(2) << b0, 0.0).finished()), ones);
    CHECK(ll > prev);
    prev = ll;
  }
}

TEST_CASE("score equals finite differences at random points") {
  auto g = test::test_rng(42);
  for (int rep = 0; rep < 100; ++rep) {
    const int p = 1 + static_cast<int>(g() % 3);
    const int l = static_cast<int>(g() % 2);
    ModelSpec spec{p, l};
    const int T = p + 3 + static_cast<int>(g() % 20);
    ParamVector theta = test::random_theta(g, spec);
    BinarySeries s = test::random_series(g, T);
    ExogMatrix x;
    if (l > 0) {
      x.resize(T, l);
      for (int t = 0; t < T; ++t)
        for (int j = 0; j < l; ++j) x(t, j) = test::runif(g, -1.5, 1.5);
    }
    const ExogMatrix* xp = l > 0 ? &x : nullptr;
    const Vector exact = score(theta, s, xp);
    const Vector fd = test::fd_score(theta, spec, s, xp);
    const double denom = std::max(1.0, fd.lpNorm<Eigen::Infinity>());
    CHECK((exact - fd).lpNorm<Eigen::Infinity>() / denom < 1e-4);
  }
}

TEST_CASE("score at zero is sum of (y_t - 1/2) z_t") {
  ParamVector zeros = ParamVector::lar(Vector::Zero(2));
  BinarySeries s{{1, 0, 1, 1, 0}};
  Vector expected = Vector::Zero(2);
  for (int t = 1; t < 5; ++t) {
    expected[0] += s.y[t] - 0.5;
    expected[1] += (s.y[t] - 0.5) * s.y[t - 1];
  }
  CHECK(test::max_abs_diff(score(zeros, s), expected) < 1e-15);
}

TEST_CASE("negated Hessian: closed form at theta = 0 and FD agreement") {
  ParamVector zeros = ParamVector::lar(Vector::Zero(2));
  auto g = test::test_rng(11);
  BinarySeries s = test::random_series(g, 30);
  int k = 0;
  for (int t = 0; t < 29; ++t) k += s.y[t];
  const FisherMatrix h = neg_hessian(zeros, s);
  CHECK(h(0, 0) == doctest::Approx(0.25 * 29).epsilon(1e-14));
  CHECK(h(0, 1) == doctest::Approx(0.25 * k).epsilon(1e-14));

  for (int rep = 0; rep < 20; ++rep) {
    ModelSpec spec{2, 0};
    ParamVector theta = test::random_theta(g, spec);
    BinarySeries srep = test::random_series(g, 25);
    const Matrix fd = -test::fd_hessian(theta, spec, srep, nullptr);
    const Matrix exact = neg_hessian(theta, srep);
    const double denom = std::max(1.0, fd.cwiseAbs().maxCoeff());
    CHECK(test::max_abs_diff(exact, fd) / denom < 1e-4);
  }
}

TEST_CASE("negated Hessian is symmetric PSD") {
  auto g = test::test_rng(99);
  for (int rep = 0; rep < 50; ++rep) {
    const int p = 1 + static_cast<int>(g() % 3);
    ModelSpec spec{p, 0};
    ParamVector theta = test::random_theta(g, spec);
    BinarySeries s = test::random_series(g, p + 5 + static_cast<int>(g() % 30));
    const FisherMatrix h = neg_hessian(theta, s);
    CHECK(test::max_abs_diff(h, h.transpose()) == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10 * h.trace());
  }
}

TEST_CASE("log-likelihood is concave in theta") {
  auto g = test::test_rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    ModelSpec spec{2, 1};
    const int T = 15;
    BinarySeries s = test::random_series(g, T);
    ExogMatrix x(T, 1);
    for (int t = 0; t < T; ++t) x(t, 0) = test::runif(g, -1, 1);
    ParamVector a = test::random_theta(g, spec), b = test::random_theta(g, spec);
    const double lam = test::runif(g, 0.05, 0.95);
    const Vector mid = lam * a.flat() + (1.0 - lam) * b.flat();
    const double lmid =
        log_likelihood(ParamVector::from_flat(spec, mid), s, &x);
    const double bound = lam * log_likelihood(a, s, &x) +
                         (1.0 - lam) * log_likelihood(b, s, &x);
    CHECK(lmid >= bound - 1e-12);
  }
}

TEST_CASE("LARX with zero covariates reproduces LAR bit for bit") {
  auto g = test::test_rng(17);
  ModelSpec lar{2, 0}, larx{2, 1};
  BinarySeries s = test::random_series(g, 40);
  Vector beta = (Vector(3) << 0.2, -0.4, 0.7).finished();
  ParamVector theta_lar = ParamVector::lar(beta);
  ParamVector theta_larx((Vector(1) << 0.9).finished(), beta);
  ExogMatrix x = ExogMatrix::Zero(40, 1);

  CHECK(log_likelihood(theta_lar, s) == log_likelihood(theta_larx, s, &x));
  const FisherMatrix h_lar = neg_hessian(theta_lar, s);
  const FisherMatrix h_larx = neg_hessian(theta_larx, s, &x);
  CHECK((h_larx.block(1, 1, 3, 3) - h_lar).cwiseAbs().maxCoeff() == 0.0);
  CHECK(h_larx.row(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("em_fi is the negated Hessian") {
  auto g = test::test_rng(23);
  ModelSpec spec{1, 0};
  ParamVector theta = test::random_theta(g, spec);
  BinarySeries s = test::random_series(g, 20);
  CHECK(test::max_abs_diff(em_fi(theta, s), neg_hessian(theta, s)) == 0.0);
}
