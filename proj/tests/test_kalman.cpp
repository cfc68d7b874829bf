#include <doctest.h>

#include <cmath>
#include <numeric>

#include "kfpso/kalman.hpp"

using namespace kfpso;

namespace {

Matrix random_matrix(RngStream& rng, Index r, Index c) {
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rng.uniform(-1, 1);
  return m;
}

Matrix random_spd(RngStream& rng, Index dim, double floor = 0.1) {
  const Matrix a = random_matrix(rng, dim, dim);
  return a * a.transpose() + floor * Matrix::Identity(dim, dim);
}

GaussianBelief random_belief(RngStream& rng, Index dim) {
  Vector m(dim);
  for (Index d = 0; d < dim; ++d) m[d] = rng.uniform(-5, 5);
  return {m, random_spd(rng, dim)};
}

}  // namespace

TEST_CASE("time update") {
  GaussianBelief b{Vector::Constant(1, 2.0), Matrix::Constant(1, 1, 1.0)};
  const auto p = kf_time_update(b, Matrix::Identity(1, 1), Matrix::Constant(1, 1, 0.5));
  CHECK(p.mean[0] == 2.0);
  CHECK(p.covariance(0, 0) == 1.5);

  RngStream rng(51, 0);
  const auto r = random_belief(rng, 4);
  const auto same = kf_time_update(r, Matrix::Identity(4, 4), Matrix::Zero(4, 4));
  CHECK(same.mean == r.mean);
  CHECK((same.covariance - r.covariance).norm() < 1e-14);
  CHECK_THROWS_AS(kf_time_update(r, Matrix::Identity(3, 3), Matrix::Zero(4, 4)), Error);
}

TEST_CASE("scalar measurement update") {
  GaussianBelief prior{Vector::Constant(1, 0.0), Matrix::Constant(1, 1, 1.0)};
  const auto post = kf_measurement_update(prior, Vector::Constant(1, 4.0), Matrix::Identity(1, 1),
                                          Matrix::Constant(1, 1, 1.0));
  CHECK(post.mean[0] == doctest::Approx(2.0));
  CHECK(post.covariance(0, 0) == doctest::Approx(0.5));

  const auto ignored = kf_measurement_update(prior, Vector::Constant(1, 4.0), Matrix::Identity(1, 1),
                                             Matrix::Constant(1, 1, 1e12));
  CHECK(std::abs(ignored.mean[0]) < 1e-10);
}

TEST_CASE("singular innovation is reported with its condition number") {
  GaussianBelief prior{Vector::Zero(2), Matrix::Zero(2, 2)};
  CHECK_THROWS_WITH_AS(kf_measurement_update(prior, Vector::Ones(2), Matrix::Identity(2, 2), Matrix::Zero(2, 2)),
                       doctest::Contains("condition number"), Error);
}

TEST_CASE("measurement update never increases uncertainty") {
  RngStream rng(52, 0);
  for (int rep = 0; rep < 200; ++rep) {
    const Index dim = rng.uniform_int(1, 8);
    const auto prior = random_belief(rng, dim);
    Vector z(dim);
    for (Index d = 0; d < dim; ++d) z[d] = rng.uniform(-5, 5);
    const auto post = kf_measurement_update(prior, z, Matrix::Identity(dim, dim), random_spd(rng, dim, 0.01));
    REQUIRE(post.covariance.trace() <= prior.covariance.trace() + 1e-12);
    REQUIRE((post.covariance - post.covariance.transpose()).norm() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> es(post.covariance);
    REQUIRE(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("two sequential updates equal batch weighted least squares") {
  RngStream rng(53, 0);
  for (int rep = 0; rep < 200; ++rep) {
    // Scalar state, two scalar observations.
    const double m0 = rng.uniform(-10, 10), p0 = rng.uniform(0.1, 5);
    const double z1 = rng.uniform(-10, 10), r1 = rng.uniform(0.1, 5);
    const double z2 = rng.uniform(-10, 10), r2 = rng.uniform(0.1, 5);
    GaussianBelief b{Vector::Constant(1, m0), Matrix::Constant(1, 1, p0)};
    const Matrix h = Matrix::Identity(1, 1);
    b = kf_measurement_update(b, Vector::Constant(1, z1), h, Matrix::Constant(1, 1, r1));
    b = kf_measurement_update(b, Vector::Constant(1, z2), h, Matrix::Constant(1, 1, r2));
    const double info = 1 / p0 + 1 / r1 + 1 / r2;
    const double wls = (m0 / p0 + z1 / r1 + z2 / r2) / info;
    REQUIRE(std::abs(b.mean[0] - wls) < 1e-10);
    REQUIRE(std::abs(b.covariance(0, 0) - 1 / info) < 1e-10);
  }
  for (int rep = 0; rep < 50; ++rep) {
    // Vector state, information-form oracle.
    const Index dim = rng.uniform_int(2, 6);
    const auto prior = random_belief(rng, dim);
    const Matrix r1 = random_spd(rng, dim, 0.5), r2 = random_spd(rng, dim, 0.5);
    Vector z1(dim), z2(dim);
    for (Index d = 0; d < dim; ++d) {
      z1[d] = rng.uniform(-3, 3);
      z2[d] = rng.uniform(-3, 3);
    }
    const Matrix h = Matrix::Identity(dim, dim);
    auto b = kf_measurement_update(prior, z1, h, r1);
    b = kf_measurement_update(b, z2, h, r2);
    const Matrix p0i = prior.covariance.inverse(), r1i = r1.inverse(), r2i = r2.inverse();
    const Matrix info = p0i + r1i + r2i;
    const Vector wls = info.ldlt().solve(p0i * prior.mean + r1i * z1 + r2i * z2);
    REQUIRE((b.mean - wls).norm() < 1e-10);
    REQUIRE((b.covariance - info.inverse()).norm() < 1e-10);
  }
}

TEST_CASE("sigma weights sum to one") {
  RngStream rng(54, 0);
  for (Index dim = 1; dim <= 30; ++dim) {
    const auto b = random_belief(rng, dim);
    for (double kappa : {default_kappa(dim), 0.0, 1.0}) {
      if (dim + kappa <= 0) continue;
      const auto s = sigma_points_standard(b, kappa);
      REQUIRE(s.points.rows() == 2 * dim + 1);
      const double sum = std::accumulate(s.weights.begin(), s.weights.end(), 0.0);
      REQUIRE(std::abs(sum - 1.0) < 1e-12);
      REQUIRE(s.weights[0] == doctest::Approx(kappa / (dim + kappa)));
    }
  }
  PointMatrix p(3, 2);
  p << 1, 2, 3, 4, 5, 6;
  const auto ps = sigma_points_from_particles(p, std::vector<double>{0.2, 0.0, 0.7}, Vector::Zero(2));
  CHECK(ps.points.rows() == 4);
  CHECK(std::abs(std::accumulate(ps.weights.begin(), ps.weights.end(), 0.0) - 1.0) < 1e-12);
  CHECK(ps.weights[3] == doctest::Approx((1.0 / 3) / (1 + 1.0 / 3)));
  const auto uniform = sigma_points_from_particles(p, std::vector<double>{0, 0, 0}, Vector::Zero(2));
  CHECK(uniform.weights[0] == doctest::Approx(uniform.weights[2]));
}

TEST_CASE("sigma points reproduce the belief moments") {
  RngStream rng(55, 0);
  for (Index dim : {1, 2, 3, 4, 9}) {
    const auto b = random_belief(rng, dim);
    const auto s = sigma_points_standard(b, default_kappa(dim));
    const auto id = ut_propagate(s, [](const Vector& x) { return x; }, Matrix::Zero(dim, dim));
    CHECK((id.mean - b.mean).norm() < 1e-8);
    CHECK((id.covariance - b.covariance).norm() < 1e-8);
  }
}

TEST_CASE("unscented transform is exact for affine maps") {
  RngStream rng(56, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const Index dim = rng.uniform_int(1, 10);
    const auto b = random_belief(rng, dim);
    const Matrix a = random_matrix(rng, dim, dim) * 2.0;
    Vector c(dim);
    for (Index d = 0; d < dim; ++d) c[d] = rng.uniform(-4, 4);
    const Matrix q = random_spd(rng, dim, 0.01) * 0.1;
    const auto s = sigma_points_standard(b, default_kappa(dim));
    const auto out = ut_propagate(s, [&](const Vector& x) { return Vector(a * x + c); }, q);
    const Vector mean = a * b.mean + c;
    const Matrix cov = a * b.covariance * a.transpose() + q;
    REQUIRE((out.mean - mean).norm() < 1e-8);
    REQUIRE((out.covariance - cov).norm() < 1e-8);
  }
}

TEST_CASE("negative centre weight falls back to the wings for the covariance") {
  const Index dim = 6;  // kappa = -3, centre weight -1
  GaussianBelief b{Vector::Zero(dim), Matrix::Identity(dim, dim)};
  const auto s = sigma_points_standard(b, default_kappa(dim));
  REQUIRE(s.weights[0] < 0.0);
  const Vector centre_image = Vector::Constant(dim, 1.0);
  const Vector wing_image = Vector::Zero(dim);
  // Every wing lands on one point, the centre on another: the full weighted
  // covariance is -2 dd^T, not PSD.
  const auto out = ut_propagate(
      s, [&](const Vector& x) { return x.isZero(0.0) ? centre_image : wing_image; }, Matrix::Zero(dim, dim));
  const Vector expected_mean = s.weights[0] * centre_image;
  CHECK((out.mean - expected_mean).norm() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> es(out.covariance);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  const Vector delta = wing_image - expected_mean;
  const double wing_total = 1.0 - s.weights[0];
  CHECK((out.covariance - wing_total * delta * delta.transpose()).norm() < 1e-12);
}

TEST_CASE("transition output is validated") {
  GaussianBelief b{Vector::Zero(2), Matrix::Identity(2, 2)};
  const auto s = sigma_points_standard(b, 1.0);
  CHECK_THROWS_AS(ut_propagate(s, [](const Vector&) { return Vector::Constant(2, NAN); }, Matrix::Zero(2, 2)),
                  Error);
  CHECK_THROWS_AS(ut_propagate(s, [](const Vector&) { return Vector::Zero(3); }, Matrix::Zero(2, 2)), Error);
  CHECK_THROWS_AS(sigma_points_standard(b, -2.0), Error);
}

TEST_CASE("make_psd and symmetric_sqrt") {
  Matrix m(2, 2);
  m << 1, 2, 0, 1;  // asymmetric; symmetric part has eigenvalues 2 and 0
  const Matrix p = make_psd(m);
  CHECK((p - p.transpose()).norm() == 0.0);
  CHECK(p(0, 1) == 1.0);

  Matrix tiny(2, 2);
  tiny << 1, 0, 0, -1e-14;
  CHECK(make_psd(tiny)(1, 1) >= 0.0);
  Matrix neg(2, 2);
  neg << 1, 0, 0, -0.5;
  CHECK_THROWS_WITH_AS(make_psd(neg), doctest::Contains("not positive semi-definite"), Error);

  RngStream rng(57, 0);
  const Matrix s = random_spd(rng, 5);
  const Matrix r = symmetric_sqrt(s);
  CHECK((r * r - s).norm() < 1e-10);
  CHECK((r - r.transpose()).norm() < 1e-12);
  Matrix singular = Matrix::Zero(3, 3);
  singular(0, 0) = 4.0;
  CHECK(symmetric_sqrt(singular)(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("isotropic noise config") {
  const auto n = NoiseConfig::isotropic(3, 0.25, 2.0);
  CHECK(n.process(1, 1) == 0.25);
  REQUIRE(n.observation);
  CHECK((*n.observation)(2, 2) == 2.0);
  CHECK_FALSE(NoiseConfig::isotropic(3, 0.25).observation);
}
