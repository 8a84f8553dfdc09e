#include <doctest.h>

#include <random>

#include "bwvi/errors.hpp"
#include "bwvi/estimators.hpp"
#include "bwvi/linalg.hpp"
#include "oracles.hpp"

using namespace bwvi;

namespace {

struct Setup {
  std::shared_ptr<GaussianTarget> target;
  Gaussian g;
};

Setup gaussian_setup(Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto t = gaussian_target(oracle::random_vector(d, gen), oracle::random_spd(d, gen, 0.5));
  Gaussian g(oracle::random_vector(d, gen), oracle::random_spd(d, gen, 0.5));
  return {t, g};
}

}  // namespace

TEST_CASE("CPolicy validation") {
  CHECK_THROWS_AS(CPolicy::fixed(0.0), Error);
  CHECK_THROWS_AS(CPolicy::fixed(2.5), Error);
  CHECK_NOTHROW(CPolicy::fixed(2.0));
  CHECK_THROWS_AS(CPolicy::adaptive(0.5, 0.1), Error);
  CHECK(CPolicy::adaptive().lo() == 0.05);
  CHECK(CPolicy::adaptive().hi() == 1.0);
}

TEST_CASE("resolve_c") {
  CHECK(resolve_c(CPolicy::adaptive(), Matrix::Identity(3, 3), 3.0) == 1.0);
  CHECK(resolve_c(CPolicy::adaptive(), 2.0 * Matrix::Identity(3, 3), 3.0) == 1.0);
  Matrix s = Matrix::Zero(3, 3);
  s(0, 0) = -0.5;
  CHECK(resolve_c(CPolicy::adaptive(), s, 3.0) == 0.05);
  CHECK(resolve_c(CPolicy::adaptive(0.05, 2.0), 2.0 * Matrix::Identity(3, 3), 3.0) ==
        doctest::Approx(2.0));
  CHECK(resolve_c(CPolicy::adaptive(), 0.5 * Matrix::Identity(2, 2), 2.0) ==
        doctest::Approx(0.5));
  CHECK(resolve_c(CPolicy::fixed(0.9), s, 3.0) == 0.9);
  CHECK(resolve_c(CPolicy::zero(), s, 3.0) == 0.0);
}

TEST_CASE("mc_estimate single draw is the plug-in gradient") {
  const Setup s = gaussian_setup(3, 1);
  Rng rng(2);
  const GradientEstimate e = mc_estimate(*s.target, s.g, rng, 1);
  const Vector x = e.samples.row(0).transpose();
  const Vector want = s.target->precision() * (x - s.target->distribution().mean());
  CHECK((e.b - want).norm() < 1e-12);
  CHECK((e.S - s.target->precision()).norm() < 1e-12);
  CHECK(e.c_used == 0.0);
}

TEST_CASE("mc_estimate averages over the minibatch and is unbiased") {
  const Setup s = gaussian_setup(3, 3);
  const Vector mean_grad =
      s.target->precision() * (s.g.mean() - s.target->distribution().mean());
  Rng rng(4);
  const long m = 100000;
  const GradientEstimate e = mc_estimate(*s.target, s.g, rng, m);
  const Matrix p = s.target->precision();
  const double tr = (p * s.g.cov() * p).trace();
  CHECK((e.b - mean_grad).norm() < 4.0 * std::sqrt(tr / m));
  CHECK((e.S - e.S.transpose()).norm() == 0.0);
}

TEST_CASE("minibatch variance scales as 1/m") {
  const Setup s = gaussian_setup(2, 5);
  auto total_variance = [&](long m, int reps) {
    Rng rng(6 + m);
    Matrix bs(reps, 2);
    for (int r = 0; r < reps; ++r) bs.row(r) = mc_estimate(*s.target, s.g, rng, m).b.transpose();
    const Vector mean = bs.colwise().mean();
    return (bs.rowwise() - mean.transpose()).squaredNorm() / (reps - 1);
  };
  const double ratio = total_variance(1, 10000) / total_variance(100, 10000);
  CHECK(ratio > 100.0 / 1.5);
  CHECK(ratio < 100.0 * 1.5);
}

TEST_CASE("vr_estimate with c = 0 reproduces mc_estimate") {
  const Setup s = gaussian_setup(4, 7);
  Rng a(8), b(8);
  const GradientEstimate mc = mc_estimate(*s.target, s.g, a, 5);
  const GradientEstimate vr = vr_estimate(*s.target, s.g, b, 5, CPolicy::zero());
  CHECK((mc.b - vr.b).norm() == 0.0);
  CHECK((mc.S - vr.S).norm() == 0.0);
  CHECK((mc.samples - vr.samples).norm() == 0.0);
}

TEST_CASE("vr_estimate collapses to the exact mean when covariances match") {
  const Setup s = gaussian_setup(5, 9);
  const Gaussian g(s.g.mean(), s.target->distribution().cov());
  const Vector want = s.target->precision() * (g.mean() - s.target->distribution().mean());
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const GradientEstimate e = vr_estimate(*s.target, g, rng, 1, CPolicy::fixed(1.0));
    CHECK((e.b - want).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("vr_estimate is unbiased") {
  const Setup s = gaussian_setup(3, 10);
  const int reps = 100000;
  Rng r_mc(11), r_vr(12);
  Vector sum_mc = Vector::Zero(3), sum_vr = Vector::Zero(3);
  Vector sq_mc = Vector::Zero(3), sq_vr = Vector::Zero(3);
  for (int i = 0; i < reps; ++i) {
    const Vector bm = mc_estimate(*s.target, s.g, r_mc, 1).b;
    const Vector bv = vr_estimate(*s.target, s.g, r_vr, 1, CPolicy::fixed(0.7)).b;
    sum_mc += bm;
    sum_vr += bv;
    sq_mc += bm.cwiseAbs2();
    sq_vr += bv.cwiseAbs2();
  }
  const Vector mean_mc = sum_mc / reps, mean_vr = sum_vr / reps;
  const Vector var_mc = sq_mc / reps - mean_mc.cwiseAbs2();
  const Vector var_vr = sq_vr / reps - mean_vr.cwiseAbs2();
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double se = std::sqrt((var_mc(i) + var_vr(i)) / reps);
    CHECK(std::abs(mean_mc(i) - mean_vr(i)) < 3.0 * se);
  }
}

TEST_CASE("vr_estimate reuses the cached factorization") {
  const Setup s = gaussian_setup(6, 13);
  Rng rng(14);
  const auto before = linalg::factorization_count();
  for (int i = 0; i < 10; ++i) vr_estimate(*s.target, s.g, rng, 3, CPolicy::fixed(0.9));
  for (int i = 0; i < 10; ++i) vr_estimate(*s.target, s.g, rng, 3, CPolicy::adaptive());
  CHECK(linalg::factorization_count() == before);
}

TEST_CASE("estimators reject mismatched dimensions") {
  const Setup s = gaussian_setup(3, 15);
  Rng rng(16);
  CHECK_THROWS_AS(mc_estimate(*s.target, Gaussian::standard(2), rng, 1), DimensionMismatch);
  CHECK_THROWS_AS(mc_estimate(*s.target, s.g, rng, 0), Error);
}
