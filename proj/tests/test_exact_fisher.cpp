#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "larfi/exact_fisher.hpp"
#include "test_util.hpp"

using namespace larfi;

namespace {
LagState state_of(unsigned code, int p) { return LagState{code, p}; }
}  // namespace

TEST_CASE("LagState encoding round-trips for all 2^p states") {
  for (int p : {1, 2, 3, 5}) {
    for (unsigned c = 0; c < (1u << p); ++c) {
      const LagState s = state_of(c, p);
      CHECK(LagState::from_bits(s.bits()).code == c);
    }
  }
}

TEST_CASE("qt_forward base case is a point mass on the initial state") {
  auto g = test::test_rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const int p = 1 + static_cast<int>(g() % 3);
    ModelSpec spec{p, 0};
    ParamVector theta = test::random_theta(g, spec);
    const LagState init = test::random_state(g, p);
    const auto dists = qt_forward(theta, spec, init, p + 4);
    CHECK(dists.front().t == p + 1);
    CHECK(dists.front().q[init.code] == 1.0);
    CHECK(dists.front().q.sum() == 1.0);
  }
}

TEST_CASE("qt_forward with zero parameters is uniform after the first step") {
  ModelSpec spec{1, 0};
  ParamVector zeros = ParamVector::lar(Vector::Zero(2));
  for (unsigned init : {0u, 1u}) {
    const auto dists = qt_forward(zeros, spec, state_of(init, 1), 6);
    for (size_t i = 1; i < dists.size(); ++i) {
      CHECK(dists[i].q[0] == doctest::Approx(0.5).epsilon(1e-15));
      CHECK(dists[i].q[1] == doctest::Approx(0.5).epsilon(1e-15));
    }
  }
}

TEST_CASE("qt_forward distributions normalize and stay nonnegative") {
  auto g = test::test_rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const int p = 1 + static_cast<int>(g() % 3);
    ModelSpec spec{p, 0};
    ParamVector theta = test::random_theta(g, spec);
    const auto dists =
        qt_forward(theta, spec, test::random_state(g, p), p + 1 + static_cast<int>(g() % 12));
    for (const auto& d : dists) {
      CHECK(d.q.minCoeff() >= 0.0);
      CHECK(std::abs(d.q.sum() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("qt_forward marginal matches brute-force path enumeration, p=2") {
  // beta = (0.1, 0.3, 0.5), initial (y2,y1) = (0,0), marginal at t = 5:
  // direct sum over the free draw y3 of the path-probability products.
  ModelSpec spec{2, 0};
  ParamVector theta = ParamVector::lar((Vector(3) << 0.1, 0.3, 0.5).finished());
  const LagState init = state_of(0, 2);
  const auto dists = qt_forward(theta, spec, init, 5);
  const StateDistribution& q5 = dists.back();
  REQUIRE(q5.t == 5);

  // enumerate completions (y3, y4) and bin the resulting (y4, y3) block
  Vector expected = Vector::Zero(4);
  for (int y3 = 0; y3 < 2; ++y3) {
    for (int y4 = 0; y4 < 2; ++y4) {
      const double p3 = cond_prob(theta, {0, 0});
      const double w3 = y3 ? p3 : 1.0 - p3;
      const double p4 = cond_prob(theta, {y3, 0});
      const double w4 = y4 ? p4 : 1.0 - p4;
      expected[y4 | (y3 << 1)] += w3 * w4;
    }
  }
  CHECK((q5.q - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("hand-checkable Ex-FI: p=1, beta=0, T=4, y1=0") {
  ModelSpec spec{1, 0};
  ParamVector zeros = ParamVector::lar(Vector::Zero(2));
  const LagState init = state_of(0, 1);
  Matrix expected(2, 2);
  expected << 0.75, 0.25, 0.25, 0.25;

  CHECK(test::max_abs_diff(ex_fi_forward(zeros, spec, init, 4), expected) < 1e-14);
  CHECK(test::max_abs_diff(ex_fi_functional_iteration(zeros, spec, init, 4), expected) < 1e-14);
  CHECK(test::max_abs_diff(ex_fi_bruteforce(zeros, spec, init, 4), expected) < 1e-14);
  CHECK(test::max_abs_diff(ex_fi_lar1_closed_form(zeros, 4, 0), expected) < 1e-14);
}

TEST_CASE("T = p+1 gives the single deterministic term") {
  auto g = test::test_rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const int p = 1 + static_cast<int>(g() % 3);
    ModelSpec spec{p, 0};
    ParamVector theta = test::random_theta(g, spec);
    const LagState init = test::random_state(g, p);
    const double pt = cond_prob(theta, init.bits());
    Vector z(p + 1);
    z[0] = 1.0;
    for (int k = 0; k < p; ++k) z[k + 1] = init.bits()[k];
    const Matrix expected = pt * (1.0 - pt) * (z * z.transpose());
    CHECK(test::max_abs_diff(ex_fi_forward(theta, spec, init, p + 1), expected) < 1e-14);
    CHECK(test::max_abs_diff(ex_fi_functional_iteration(theta, spec, init, p + 1), expected) < 1e-14);
  }
}

TEST_CASE("closed form: T=2 keeps only the deterministic term") {
  auto g = test::test_rng(21);
  for (int rep = 0; rep < 10; ++rep) {
    ModelSpec spec{1, 0};
    ParamVector theta = test::random_theta(g, spec);
    for (int y1 : {0, 1}) {
      const Lar1Kernel k(theta);
      const double v = y1 ? k.v1 : k.v0;
      Matrix expected(2, 2);
      expected << v, v * y1, v * y1, v * y1;
      CHECK(test::max_abs_diff(ex_fi_lar1_closed_form(theta, 2, y1), expected) < 1e-15);
    }
  }
}

TEST_CASE("closed form rejects wrong model orders") {
  ParamVector p2 = ParamVector::lar(Vector::Zero(3));
  CHECK_THROWS_AS(ex_fi_lar1_closed_form(p2, 5, 0), std::invalid_argument);
  ParamVector larx((Vector(1) << 0.5).finished(), Vector::Zero(2));
  CHECK_THROWS_AS(ex_fi_lar1_closed_form(larx, 5, 0), std::invalid_argument);
}

TEST_CASE("closed form agrees with the forward recursion at larger T") {
  ParamVector theta = ParamVector::lar((Vector(2) << 0.1, 0.5).finished());
  ModelSpec spec{1, 0};
  for (int y1 : {0, 1}) {
    for (int T : {10, 50}) {
      CHECK(test::max_abs_diff(ex_fi_lar1_closed_form(theta, T, y1),
                               ex_fi_forward(theta, spec, state_of(y1, 1), T)) < 1e-10);
    }
  }
}

TEST_CASE("oracle equivalence sweep across p, T, random theta") {
  auto g = test::test_rng(2024);
  int cases = 0;
  for (int p : {1, 2, 3}) {
    ModelSpec spec{p, 0};
    for (int T = p + 1; T <= 12; ++T) {
      for (int rep = 0; rep < 5; ++rep) {
        ParamVector theta = test::random_theta(g, spec);
        const LagState init = test::random_state(g, p);
        const FisherMatrix fwd = ex_fi_forward(theta, spec, init, T);
        const FisherMatrix bf = ex_fi_bruteforce(theta, spec, init, T);
        const FisherMatrix fn = ex_fi_functional_iteration(theta, spec, init, T);
        CHECK(test::max_abs_diff(fwd, bf) < 1e-10);
        CHECK(test::max_abs_diff(fn, fwd) < 1e-12);
        if (p == 1)
          CHECK(test::max_abs_diff(
                    ex_fi_lar1_closed_form(theta, T, static_cast<int>(init.code)),
                    fwd) < 1e-10);
        ++cases;
      }
    }
  }
  CHECK(cases > 100);
}

TEST_CASE("oracle equivalence holds for LARX with random covariates") {
  auto g = test::test_rng(77);
  for (int rep = 0; rep < 30; ++rep) {
    const int p = 1 + static_cast<int>(g() % 2);
    ModelSpec spec{p, 1};
    const int T = p + 2 + static_cast<int>(g() % 8);
    ParamVector theta = test::random_theta(g, spec);
    ExogMatrix x(T, 1);
    for (int t = 0; t < T; ++t) x(t, 0) = test::runif(g, -1.5, 1.5);
    const LagState init = test::random_state(g, p);
    const FisherMatrix fwd = ex_fi_forward(theta, spec, init, T, &x);
    CHECK(test::max_abs_diff(fwd, ex_fi_bruteforce(theta, spec, init, T, &x)) < 1e-10);
    CHECK(test::max_abs_diff(fwd, ex_fi_functional_iteration(theta, spec, init, T, &x)) < 1e-12);
  }
}

TEST_CASE("brute force parallel matches serial reference bit for bit") {
  auto g = test::test_rng(55);
  for (int rep = 0; rep < 10; ++rep) {
    const int p = 1 + static_cast<int>(g() % 3);
    ModelSpec spec{p, 0};
    ParamVector theta = test::random_theta(g, spec);
    const LagState init = test::random_state(g, p);
    const int T = p + 8 + static_cast<int>(g() % 5);
    const FisherMatrix par = ex_fi_bruteforce(theta, spec, init, T);
    const FisherMatrix ser = ex_fi_bruteforce_serial(theta, spec, init, T);
    CHECK((par - ser).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("brute force refuses oversized path spaces") {
  ModelSpec spec{1, 0};
  ParamVector zeros = ParamVector::lar(Vector::Zero(2));
  CHECK_THROWS_AS(ex_fi_bruteforce(zeros, spec, state_of(0, 1), 31),
                  std::invalid_argument);
}

TEST_CASE("Ex-FI is monotone in T: PSD increments") {
  auto g = test::test_rng(808);
  for (int rep = 0; rep < 100; ++rep) {
    const int p = 1 + static_cast<int>(g() % 3);
    ModelSpec spec{p, 0};
    ParamVector theta = test::random_theta(g, spec);
    const LagState init = test::random_state(g, p);
    const int T = p + 1 + static_cast<int>(g() % 10);
    const FisherMatrix a = ex_fi_forward(theta, spec, init, T);
    const FisherMatrix b = ex_fi_forward(theta, spec, init, T + 1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(b - a);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12 * b.trace());
  }
}

TEST_CASE("theta = 0, p = 1: I11 grows linearly, 0.25 (T-1)") {
  ModelSpec spec{1, 0};
  ParamVector zeros = ParamVector::lar(Vector::Zero(2));
  for (int T : {2, 5, 13, 40}) {
    const FisherMatrix info = ex_fi_forward(zeros, spec, state_of(1, 1), T);
    CHECK(info(0, 0) == doctest::Approx(0.25 * (T - 1)).epsilon(1e-13));
  }
}

TEST_CASE("I22 = I12 for every LAR(1) Ex-FI regardless of algorithm") {
  auto g = test::test_rng(404);
  ModelSpec spec{1, 0};
  for (int rep = 0; rep < 50; ++rep) {
    ParamVector theta = test::random_theta(g, spec);
    const LagState init = test::random_state(g, 1);
    const int T = 2 + static_cast<int>(g() % 15);
    for (const FisherMatrix& m :
         {ex_fi_forward(theta, spec, init, T),
          ex_fi_functional_iteration(theta, spec, init, T),
          ex_fi_bruteforce(theta, spec, init, T),
          ex_fi_lar1_closed_form(theta, T, static_cast<int>(init.code))}) {
      CHECK(std::abs(m(1, 1) - m(0, 1)) < 1e-12);
    }
  }
}

TEST_CASE("Ex-FI errors: T below p+1, mismatched initial state") {
  ModelSpec spec{2, 0};
  ParamVector theta = ParamVector::lar(Vector::Zero(3));
  CHECK_THROWS_AS(qt_forward(theta, spec, state_of(0, 2), 2), std::invalid_argument);
  CHECK_THROWS_AS(ex_fi_forward(theta, spec, state_of(0, 1), 5), std::invalid_argument);
}
