#include <doctest.h>

#include <cmath>
#include <random>

#include "bwvi/errors.hpp"
#include "bwvi/gaussian.hpp"
#include "oracles.hpp"

using namespace bwvi;

namespace {

Gaussian random_gaussian(Eigen::Index d, std::mt19937_64& gen) {
  return Gaussian(oracle::random_vector(d, gen), oracle::random_spd(d, gen, 0.2));
}

Matrix diag(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x(i++) = e;
  return x.asDiagonal();
}

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) x(i++) = e;
  return x;
}

const double kEntropy1 = 0.5 * std::log(2.0 * M_PI * M_E);

}  // namespace

TEST_CASE("Gaussian construction validates its inputs") {
  CHECK_THROWS_AS(Gaussian(Vector::Constant(2, 7.0), 1e-16 * Matrix::Identity(2, 2)),
                  NotPositiveDefinite);
  CHECK_THROWS_AS(Gaussian(Vector::Zero(3), Matrix::Identity(2, 2)), DimensionMismatch);
  CHECK_THROWS_AS(Gaussian(Vector::Constant(2, NAN), Matrix::Identity(2, 2)), Error);
  std::mt19937_64 gen(1);
  const Gaussian g = random_gaussian(5, gen);
  CHECK(oracle::rel_error(g.chol().reconstruct(), g.cov()) < 1e-10);
}

TEST_CASE("sample: moments and determinism") {
  const Gaussian g = Gaussian::standard(2);
  Rng rng(42);
  const Matrix x = sample(g, rng, 100000);
  CHECK(x.rows() == 100000);
  const Vector mean = x.colwise().mean();
  CHECK(mean.cwiseAbs().maxCoeff() < 0.02);

  Rng a(9), b(9);
  CHECK((sample(g, a, 10) - sample(g, b, 10)).norm() == 0.0);
}

TEST_CASE("sample of a correlated Gaussian has the right covariance") {
  std::mt19937_64 gen(2);
  const Gaussian g = random_gaussian(3, gen);
  Rng rng(3);
  const Matrix x = sample(g, rng, 200000);
  const Vector mean = x.colwise().mean();
  const Matrix centered = x.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  CHECK((mean - g.mean()).norm() < 0.03);
  CHECK(oracle::rel_error(cov, g.cov()) < 0.02);
}

TEST_CASE("w2_squared closed forms") {
  const Gaussian p(Vector::Zero(1), Matrix::Identity(1, 1));
  const Gaussian q(Vector::Ones(1), 4.0 * Matrix::Identity(1, 1));
  CHECK(w2_squared(p, p) == doctest::Approx(0.0));
  CHECK(w2_squared(p, q) == doctest::Approx(2.0).epsilon(1e-14));

  const Gaussian a(Vector::Zero(2), diag({1, 4}));
  const Gaussian b(Vector::Zero(2), diag({9, 16}));
  CHECK(w2_squared(a, b) == doctest::Approx(8.0).epsilon(1e-13));
  CHECK(bures_squared(diag({1, 4}), diag({9, 16})) == doctest::Approx(8.0).epsilon(1e-13));
}

TEST_CASE("w2_squared agrees with an independent evaluation and is a metric") {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index d = 1 + trial % 5;
    const Gaussian p = random_gaussian(d, gen);
    const Gaussian q = random_gaussian(d, gen);
    const Gaussian r = random_gaussian(d, gen);
    const double pq = w2_squared(p, q);
    CHECK(pq == doctest::Approx(oracle::w2_squared(p.mean(), p.cov(), q.mean(), q.cov()))
                    .epsilon(1e-9));
    CHECK(pq == doctest::Approx(w2_squared(q, p)).epsilon(1e-9));
    CHECK(std::sqrt(pq) <= std::sqrt(w2_squared(p, r)) + std::sqrt(w2_squared(r, q)) + 1e-8);
    const Gaussian q_same_mean(p.mean(), q.cov());
    CHECK(bures_squared(p.cov(), q.cov()) ==
          doctest::Approx(w2_squared(p, q_same_mean)).epsilon(1e-12));
    CHECK(w2_squared(p, p) < 1e-10);
  }
}

TEST_CASE("kl_gaussian closed forms and invariances") {
  const Gaussian p(Vector::Zero(1), Matrix::Identity(1, 1));
  const Gaussian q(Vector::Ones(1), Matrix::Identity(1, 1));
  CHECK(kl_gaussian(p, p) == doctest::Approx(0.0));
  CHECK(kl_gaussian(p, q) == doctest::Approx(0.5).epsilon(1e-15));

  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index d = 1 + trial % 6;
    const Gaussian a = random_gaussian(d, gen);
    const Gaussian b = random_gaussian(d, gen);
    const double k = kl_gaussian(a, b);
    CHECK(k >= 0.0);
    CHECK(k == doctest::Approx(oracle::kl(a.mean(), a.cov(), b.mean(), b.cov())).epsilon(1e-9));
    CHECK(kl_gaussian(a, a) < 1e-10);

    const Matrix qm = Eigen::HouseholderQR<Matrix>(oracle::random_spd(d, gen, 0.0)).householderQ();
    const Gaussian ar(qm * a.mean(), qm * a.cov() * qm.transpose());
    const Gaussian br(qm * b.mean(), qm * b.cov() * qm.transpose());
    CHECK(std::abs(kl_gaussian(ar, br) - k) < 1e-9 * std::max(1.0, k));
  }
}

TEST_CASE("kl_gaussian matches a Monte Carlo log-density ratio") {
  std::mt19937_64 gen(6);
  const Gaussian a = random_gaussian(3, gen);
  const Gaussian b = random_gaussian(3, gen);
  auto logpdf = [](const Gaussian& g, const Vector& x) {
    const Matrix p = g.cov().inverse();
    const Vector r = x - g.mean();
    return -0.5 * r.dot(p * r) - 0.5 * std::log(g.cov().determinant()) -
           0.5 * static_cast<double>(x.size()) * std::log(2 * M_PI);
  };
  Rng rng(7);
  const long n = 100000;
  const Matrix x = sample(a, rng, n);
  double sum = 0.0, sum2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const Vector xi = x.row(i).transpose();
    const double v = logpdf(a, xi) - logpdf(b, xi);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - kl_gaussian(a, b)) < 3.0 * se);
}

TEST_CASE("entropy") {
  CHECK(entropy(Gaussian::standard(1)) == doctest::Approx(kEntropy1).epsilon(1e-15));
  CHECK(entropy(Gaussian::standard(1)) == doctest::Approx(1.4189385).epsilon(1e-7));
  const Gaussian shifted(vec({3, -7}), Matrix::Identity(2, 2));
  CHECK(entropy(shifted) == doctest::Approx(2 * kEntropy1).epsilon(1e-15));
  std::mt19937_64 gen(8);
  const Gaussian g = random_gaussian(4, gen);
  const Gaussian g4(g.mean(), 4.0 * g.cov());
  CHECK(entropy(g4) - entropy(g) == doctest::Approx(2.0 * std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("ot_map") {
  std::mt19937_64 gen(9);
  const Gaussian p = random_gaussian(3, gen);
  const Vector x = oracle::random_vector(3, gen);
  CHECK((ot_map(p, p, x) - x).norm() < 1e-10);

  const Gaussian a(vec({1}), Matrix::Constant(1, 1, 4.0));
  const Gaussian b(vec({-2}), Matrix::Constant(1, 1, 9.0));
  CHECK(ot_map(a, b, vec({3}))(0) == doctest::Approx(-2.0 + 1.5 * 2.0).epsilon(1e-14));

  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = 1 + trial % 5;
    const Gaussian p0 = random_gaussian(d, gen);
    const Gaussian p1 = random_gaussian(d, gen);
    const Matrix lin = ot_map_linear(p0, p1);
    CHECK((ot_map(p0, p1, p0.mean()) - p1.mean()).norm() < 1e-10);
    CHECK((lin * p0.cov() * lin.transpose() - p1.cov()).norm() < 1e-8);
    CHECK((lin - lin.transpose()).norm() < 1e-10);
  }
}

TEST_CASE("ot_map pushforward of samples matches the target moments") {
  std::mt19937_64 gen(10);
  const Gaussian p0 = random_gaussian(2, gen);
  const Gaussian p1 = random_gaussian(2, gen);
  Rng rng(11);
  const long n = 100000;
  const Matrix x = sample(p0, rng, n);
  Matrix y(n, 2);
  for (long i = 0; i < n; ++i) y.row(i) = ot_map(p0, p1, x.row(i).transpose()).transpose();
  const Vector mean = y.colwise().mean();
  const Matrix c = y.rowwise() - mean.transpose();
  const Matrix cov = c.transpose() * c / static_cast<double>(n - 1);
  const double sd = std::sqrt(p1.cov().diagonal().maxCoeff());
  CHECK((mean - p1.mean()).cwiseAbs().maxCoeff() < 4.0 * sd / std::sqrt(double(n)));
  CHECK(oracle::rel_error(cov, p1.cov()) < 0.02);
}

TEST_CASE("stein_score") {
  std::mt19937_64 gen(12);
  const Gaussian g = random_gaussian(3, gen);
  CHECK(stein_score(g, g.mean()).norm() == 0.0);
  const Vector x = oracle::random_vector(4, gen);
  CHECK((stein_score(Gaussian::standard(4), x) - x).norm() < 1e-15);

  Rng rng(13);
  const long n = 100000;
  const Matrix draws = sample(g, rng, n);
  Vector sum = Vector::Zero(3);
  double sq = 0.0, sq2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const Vector w = stein_score(g, draws.row(i).transpose());
    sum += w;
    sq += w.squaredNorm();
    sq2 += w.squaredNorm() * w.squaredNorm();
  }
  const Vector mean = sum / n;
  const double tr = g.precision_trace();
  const double sd_mean = std::sqrt(g.precision().diagonal().maxCoeff() / n);
  CHECK(mean.cwiseAbs().maxCoeff() < 4.0 * sd_mean);
  const double m2 = sq / n;
  const double se = std::sqrt((sq2 / n - m2 * m2) / n);
  CHECK(std::abs(m2 - tr) < 3.0 * se);
}
