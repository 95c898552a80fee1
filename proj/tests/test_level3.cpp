#include <doctest.h>

#include <numbers>

#include "oracles.hpp"

using namespace aircomp;

namespace {

std::vector<cd> random_b(Rng& rng, int K) {
  std::vector<cd> b(K);
  for (auto& x : b) x = complex_normal(rng, 1.0);
  return b;
}

double objective(cd g, double e, cd b) { return std::norm(g * b - 1.0) + e * std::norm(b); }

}  // namespace

TEST_CASE("mse_level3 closed cases") {
  Rng rng = make_rng(401, 0, Stream::kEvaluation);
  const EstimationResult est = test::random_estimate(rng, 4, 3, 2);
  const std::vector<cd> b = random_b(rng, 4);
  CHECK(mse_level3(b, ComplexVector::Zero(6), est, 0.3) == doctest::Approx(0.25));

  PairArray<ComplexVector> h(1, 1, ComplexVector::Unit(2, 0) * 2.0);
  PairArray<ComplexMatrix> C(1, 1, ComplexMatrix::Zero(2, 2));
  const EstimationResult exact = test::hand_estimate(h, C);
  const std::vector<cd> one{cd(1.0, 0.0)};
  CHECK(mse_level3(one, ComplexVector::Unit(2, 0) * 0.5, exact, 0.0) == doctest::Approx(0.0));

  CHECK_THROWS_AS(mse_level3(one, ComplexVector::Zero(6), est, 0.3), DimensionMismatchError);
  CHECK_THROWS_AS(mse_level3(b, ComplexVector::Zero(5), est, 0.3), DimensionMismatchError);
}

TEST_CASE("mse_level3 agrees with the dense expansion") {
  Rng rng = make_rng(402, 0, Stream::kEvaluation);
  for (int trial = 0; trial < 50; ++trial) {
    const int K = 1 + trial % 5;
    const int L = 1 + trial % 3;
    const int N = 1 + trial % 4;
    const EstimationResult est = test::random_estimate(rng, K, L, N);
    const std::vector<cd> b = random_b(rng, K);
    const ComplexVector v = test::random_vector(rng, L * N, 0.1);
    CHECK(mse_level3(b, v, est, 0.2) ==
          doctest::Approx(oracle::mse_dense(b, v, est, 0.2)).epsilon(1e-12));
  }
}

TEST_CASE("mse_level3 is the expectation over data, noise and estimation error") {
  Rng rng = make_rng(403, 0, Stream::kEvaluation);
  const EstimationResult est = test::random_estimate(rng, 2, 1, 2, 0.5);
  const std::vector<cd> b = random_b(rng, 2);
  const ComplexVector v = test::random_vector(rng, 2, 0.3);
  const double noise = 0.4;
  const test::Moments m = oracle::mse_monte_carlo(b, v, est, noise, 1000000, rng);
  const double analytic = mse_level3(b, v, est, noise);
  CAPTURE(analytic);
  CAPTURE(m.mean());
  CHECK(std::abs(m.mean() - analytic) <= 3.0 * m.std_error());
}

TEST_CASE("optimal_b") {
  SUBCASE("interior optimum") {
    const KktPoint p = optimal_b(cd(1.0, 0.0), 0.0, 100.0);
    CHECK(std::abs(p.b - 1.0) < 1e-15);
    CHECK(p.mu == 0.0);
  }
  SUBCASE("power boundary") {
    const KktPoint p = optimal_b(cd(1.0, 0.0), 0.0, 0.25);
    CHECK(p.mu == doctest::Approx(1.0));
    CHECK(std::abs(p.b - 0.5) < 1e-15);
    CHECK(std::norm(p.b) == doctest::Approx(0.25));
  }
  SUBCASE("zero gain or zero budget") {
    CHECK(optimal_b(cd(0.0, 0.0), 1.0, 1.0).b == cd(0.0, 0.0));
    CHECK(optimal_b(cd(1.0, 1.0), 1.0, 0.0).b == cd(0.0, 0.0));
  }
  SUBCASE("no point on a fine grid of the feasible disc does better") {
    Rng rng = make_rng(404, 0, Stream::kEvaluation);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const cd g = complex_normal(rng, std::pow(10.0, 2.0 * u(rng) - 1.0));
      const double e = std::pow(10.0, 2.0 * u(rng) - 2.0);
      const double P = std::pow(10.0, 2.0 * u(rng) - 1.0);
      const cd b = optimal_b(g, e, P).b;
      const double best = objective(g, e, b);
      const double phase = std::arg(std::conj(g));
      for (int i = 0; i <= 2000; ++i) {
        const double r = std::sqrt(P) * i / 2000.0;
        CHECK(objective(g, e, std::polar(r, phase)) >= best - 1e-8);
      }
      for (int i = 0; i < 64; ++i) {
        const cd other = std::polar(std::sqrt(P) * u(rng), 2.0 * std::numbers::pi * u(rng));
        CHECK(objective(g, e, other) >= best - 1e-8);
      }
    }
  }
  SUBCASE("KKT conditions") {
    Rng rng = make_rng(405, 0, Stream::kEvaluation);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const cd g = complex_normal(rng, std::pow(10.0, 4.0 * u(rng) - 2.0));
      const double e = std::pow(10.0, 3.0 * u(rng) - 2.0);
      const double P = std::pow(10.0, 4.0 * u(rng) - 2.0);
      const KktPoint k = optimal_b(g, e, P);
      const double scale = std::abs(g);
      CHECK(std::abs((std::norm(g) + e + k.mu) * k.b - std::conj(g)) <= 1e-10 * scale);
      CHECK(std::norm(k.b) <= P * (1.0 + 1e-12));
      CHECK(k.mu >= 0.0);
      CHECK(std::abs(k.mu * (std::norm(k.b) - P)) <= 1e-10 * (std::norm(g) + e) * P);
    }
  }
  SUBCASE("vector form uses v^H h_hat and v^H C v") {
    Rng rng = make_rng(406, 0, Stream::kEvaluation);
    const EstimationResult est = test::random_estimate(rng, 3, 2, 2);
    const ComplexVector v = test::random_vector(rng, 4);
    const cd g = oracle::stacked(est, 1).dot(v);
    const double e = oracle::quad_sum(v, oracle::stacked_error(est, 1)).real();
    const KktPoint p = optimal_b(v, est, 1, 0.7);
    const KktPoint q = optimal_b(std::conj(g), e, 0.7);
    CHECK(std::abs(p.b - q.b) < 1e-12);
  }
}

TEST_CASE("optimal_v") {
  SUBCASE("rank-one plus identity") {
    PairArray<ComplexVector> h(1, 1, ComplexVector::Unit(2, 0));
    PairArray<ComplexMatrix> C(1, 1, ComplexMatrix::Zero(2, 2));
    const ComplexVector v = optimal_v(std::vector<cd>{1.0}, test::hand_estimate(h, C), 1.0);
    CHECK(std::abs(v(0) - 0.5) < 1e-15);
    CHECK(std::abs(v(1)) < 1e-15);
  }
  SUBCASE("no signal") {
    Rng rng = make_rng(407, 0, Stream::kEvaluation);
    const EstimationResult est = test::random_estimate(rng, 3, 2, 2);
    CHECK(optimal_v(std::vector<cd>(3, 0.0), est, 0.1).norm() == 0.0);
  }
  SUBCASE("random perturbations never improve the objective") {
    Rng rng = make_rng(408, 0, Stream::kEvaluation);
    for (int trial = 0; trial < 10; ++trial) {
      const EstimationResult est = test::random_estimate(rng, 4, 3, 2);
      const std::vector<cd> b = random_b(rng, 4);
      const ComplexVector v = optimal_v(b, est, 0.05);
      const double best = mse_level3(b, v, est, 0.05);
      for (int i = 0; i < 100; ++i) {
        ComplexVector d = test::random_vector(rng, 6);
        d *= 1e-3 * v.norm() / d.norm();
        CHECK(mse_level3(b, v + d, est, 0.05) >= best);
      }
    }
  }
  SUBCASE("stacked combiner beats any single-AP restriction") {
    Rng rng = make_rng(409, 0, Stream::kEvaluation);
    for (int trial = 0; trial < 20; ++trial) {
      const EstimationResult est = test::random_estimate(rng, 3, 3, 2);
      const std::vector<cd> b = random_b(rng, 3);
      const double full = mse_level3(b, optimal_v(b, est, 0.1), est, 0.1);
      for (int keep = 0; keep < 3; ++keep) {
        // Best combiner using only AP `keep`: optimal_v on the one-AP estimate.
        PairArray<ComplexVector> h(3, 1);
        PairArray<ComplexMatrix> C(3, 1);
        for (int k = 0; k < 3; ++k) {
          h(k, 0) = est.h_hat(k, keep);
          C(k, 0) = est.C(k, keep).matrix();
        }
        const ComplexVector local = optimal_v(b, test::hand_estimate(h, C), 0.1);
        ComplexVector v = ComplexVector::Zero(6);
        v.segment(2 * keep, 2) = local;
        CHECK(full <= mse_level3(b, v, est, 0.1) + 1e-12);
      }
    }
  }
}

TEST_CASE("alternating_optimize") {
  SUBCASE("without TCO: one combiner at full power") {
    Rng rng = make_rng(410, 0, Stream::kEvaluation);
    const EstimationResult est = test::random_estimate(rng, 3, 2, 2);
    const std::vector<double> P{0.5, 1.0, 2.0};
    const Level3Design d = alternating_optimize(est, P, 0.1, {100, 1e-8, false});
    CHECK(d.mse_trace.size() == 1);
    CHECK(d.iterations == 1);
    for (int k = 0; k < 3; ++k) CHECK(d.b[k] == cd(std::sqrt(P[k]), 0.0));
    CHECK((d.v - optimal_v(d.b, est, 0.1)).norm() == 0.0);
  }
  SUBCASE("scalar real instance matches brute force") {
    Rng rng = make_rng(411, 0, Stream::kEvaluation);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
      const double h = 0.5 + 1.5 * u(rng);
      const double c = 0.05 + 0.45 * u(rng);
      const double noise = 0.05 + 0.45 * u(rng);
      const double P = 0.2 + 2.0 * u(rng);
      PairArray<ComplexVector> hh(1, 1, ComplexVector::Constant(1, h));
      PairArray<ComplexMatrix> C(1, 1, ComplexMatrix::Constant(1, 1, c));
      const EstimationResult est = test::hand_estimate(hh, C);
      const Level3Design d = alternating_optimize(est, std::vector<double>{P}, noise);
      const oracle::GridMin g = oracle::scalar_grid_search(h, c, noise, P, 0.0, 4.0, 1e-3, 1e-5);
      CHECK(d.mse() == doctest::Approx(g.value).epsilon(1e-6));
      CHECK(d.mse() <= g.value + 1e-9);
    }
  }
  SUBCASE("trace is non-increasing and powers stay feasible") {
    Rng rng = make_rng(412, 0, Stream::kEvaluation);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
      const EstimationResult est = test::random_estimate(rng, 5, 3, 2, 0.3);
      std::vector<double> P(5);
      for (auto& p : P) p = std::pow(10.0, 3.0 * u(rng) - 2.0);
      const Level3Design d = alternating_optimize(est, P, 0.05);
      for (std::size_t i = 1; i < d.mse_trace.size(); ++i) {
        CHECK(d.mse_trace[i] <= d.mse_trace[i - 1] + 1e-12);
      }
      for (int k = 0; k < 5; ++k) CHECK(std::norm(d.b[k]) <= P[k] * (1.0 + 1e-12));
      CHECK(d.mse() == doctest::Approx(mse_level3(d.b, d.v, est, 0.05)).epsilon(1e-12));
      const Level3Design plain = alternating_optimize(est, P, 0.05, {100, 1e-8, false});
      CHECK(d.mse() <= plain.mse() + 1e-15);
      CHECK(d.mse_trace.front() == plain.mse());
    }
  }
  SUBCASE("iteration cap") {
    Rng rng = make_rng(413, 0, Stream::kEvaluation);
    const EstimationResult est = test::random_estimate(rng, 4, 2, 2, 0.3);
    const Level3Design d =
        alternating_optimize(est, std::vector<double>(4, 0.2), 0.05, {2, 0.0, true});
    CHECK(d.iterations == 2);
    CHECK(d.mse_trace.size() == 4);
  }
}
