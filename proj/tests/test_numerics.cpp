#include <doctest.h>

#include "oracles.hpp"

using namespace aircomp;

namespace {

double reconstruction_error(const ComplexMatrix& F, const ComplexMatrix& M) {
  return (F * F.adjoint() - M).norm() / std::max(M.norm(), 1e-300);
}

}  // namespace

TEST_CASE("HermitianMatrix rejects asymmetric input and stores an exact Hermitian copy") {
  ComplexMatrix m(2, 2);
  m << 1.0, cd(0.0, 1.0), cd(0.0, -1.0), 2.0;
  const HermitianMatrix h(m);
  CHECK(h.dim() == 2);
  CHECK(h.trace() == doctest::Approx(3.0));

  ComplexMatrix bad = m;
  bad(0, 1) = cd(0.5, 1.0);
  CHECK_THROWS_AS(HermitianMatrix{bad}, NumericsError);

  ComplexMatrix nearly = m;
  nearly(0, 1) += cd(1e-14, 0.0);
  const HermitianMatrix fixed(nearly);
  CHECK(fixed(0, 1) == std::conj(fixed(1, 0)));

  CHECK_THROWS_AS(HermitianMatrix{ComplexMatrix(2, 3)}, DimensionMismatchError);
}

TEST_CASE("psd_factor") {
  SUBCASE("identity") {
    const ComplexMatrix F = psd_factor(HermitianMatrix::identity(2));
    CHECK(reconstruction_error(F, ComplexMatrix::Identity(2, 2)) < 1e-14);
  }
  SUBCASE("rank-deficient diagonal") {
    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = 4.0;
    const ComplexMatrix F = psd_factor(HermitianMatrix(d));
    CHECK(reconstruction_error(F, d) < 1e-14);
    Eigen::JacobiSVD<ComplexMatrix> svd(F);
    CHECK(svd.singularValues()(1) == doctest::Approx(0.0));
  }
  SUBCASE("zero matrix") {
    const ComplexMatrix F = psd_factor(HermitianMatrix::zero(3));
    CHECK(F.norm() == 0.0);
  }
  SUBCASE("random full-rank and low-rank matrices reconstruct") {
    Rng rng = make_rng(101, 0, Stream::kEvaluation);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 1 + trial % 6;
      const ComplexMatrix M = trial % 2 ? test::random_psd(rng, n)
                                        : test::random_psd_rank(rng, n, 1 + trial % n);
      CHECK(reconstruction_error(psd_factor(HermitianMatrix::symmetrized(M)), M) <= 1e-8);
    }
  }
  SUBCASE("indefinite input") {
    ComplexMatrix m = ComplexMatrix::Identity(2, 2);
    m(1, 1) = -0.5;
    CHECK_THROWS_AS(psd_factor(HermitianMatrix(m)), NotPsdError);
  }
  SUBCASE("real symmetric overload") {
    Eigen::MatrixXd m(2, 2);
    m << 16.0, 16.0, 16.0, 16.0;
    const Eigen::MatrixXd F = psd_factor(m);
    CHECK((F * F.transpose() - m).norm() < 1e-12);
  }
}

TEST_CASE("hermitian_solve") {
  SUBCASE("identity system") {
    ComplexVector b(3);
    b << 1.0, 2.0, 3.0;
    CHECK((hermitian_solve(HermitianMatrix::identity(3), b) - b).norm() < 1e-15);
  }
  SUBCASE("diagonal system") {
    ComplexMatrix a = ComplexMatrix::Zero(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = 4.0;
    ComplexVector b(2);
    b << 2.0, 8.0;
    const ComplexVector x = hermitian_solve(HermitianMatrix(a), b);
    CHECK(x(0).real() == doctest::Approx(1.0));
    CHECK(x(1).real() == doctest::Approx(2.0));
  }
  SUBCASE("random positive definite systems leave a small residual") {
    Rng rng = make_rng(102, 0, Stream::kEvaluation);
    for (int trial = 0; trial < 50; ++trial) {
      const ComplexMatrix A = test::random_psd(rng, 5);
      const ComplexVector b = test::random_vector(rng, 5);
      const ComplexVector x = hermitian_solve(HermitianMatrix::symmetrized(A), b);
      CHECK((A * x - b).norm() / b.norm() <= 1e-8);
    }
  }
  SUBCASE("singular and mismatched inputs") {
    CHECK_THROWS_AS(hermitian_solve(HermitianMatrix::zero(2), ComplexVector::Ones(2)),
                    SingularMatrixError);
    CHECK_THROWS_AS(hermitian_solve(HermitianMatrix::identity(2), ComplexVector::Ones(3)),
                    DimensionMismatchError);
  }
}

TEST_CASE("quad_form") {
  ComplexVector e1 = ComplexVector::Unit(2, 0);
  CHECK(quad_form(e1, HermitianMatrix::identity(2)) == doctest::Approx(1.0));

  ComplexVector v(2);
  v << 1.0, cd(0.0, 1.0);
  v /= std::sqrt(2.0);
  const HermitianMatrix two = HermitianMatrix::symmetrized(2.0 * ComplexMatrix::Identity(2, 2));
  CHECK(quad_form(v, two) == doctest::Approx(2.0));

  Rng rng = make_rng(103, 0, Stream::kEvaluation);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 7;
    const ComplexVector x = test::random_vector(rng, n);
    const ComplexMatrix M = test::random_psd(rng, n);
    const double expected = oracle::quad_sum(x, M).real();
    CHECK(quad_form(x, HermitianMatrix::symmetrized(M)) ==
          doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK_THROWS_AS(quad_form(ComplexVector::Ones(3), two), DimensionMismatchError);
}

TEST_CASE("rayleigh_max") {
  CHECK(rayleigh_max(ComplexVector::Unit(2, 0), HermitianMatrix::identity(2)) ==
        doctest::Approx(1.0));
  ComplexMatrix B = ComplexMatrix::Zero(2, 2);
  B(0, 0) = 4.0;
  B(1, 1) = 1.0;
  ComplexVector h = ComplexVector::Zero(2);
  h(0) = 2.0;
  CHECK(rayleigh_max(h, HermitianMatrix(B)) == doctest::Approx(1.0));

  SUBCASE("sampled supremum stays below the bound and B^-1 h attains it") {
    Rng rng = make_rng(104, 0, Stream::kEvaluation);
    const ComplexMatrix M = test::random_psd(rng, 4);
    const ComplexVector g = test::random_vector(rng, 4);
    const HermitianMatrix Mh = HermitianMatrix::symmetrized(M);
    const double bound = rayleigh_max(g, Mh);
    auto quotient = [&](const ComplexVector& v) {
      return std::norm(v.dot(g)) / oracle::quad_sum(v, M).real();
    };
    double sup = 0.0;
    for (int i = 0; i < 100000; ++i) sup = std::max(sup, quotient(test::random_vector(rng, 4)));
    CHECK(sup <= bound * (1.0 + 1e-12));
    CHECK(sup > 0.5 * bound);
    const ComplexVector best = M.llt().solve(g);
    CHECK(quotient(best) == doctest::Approx(bound).epsilon(1e-10));
  }
}
