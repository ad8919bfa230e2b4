#include "dgrf/qvar.hpp"

#include <doctest.h>

#include <random>

using namespace dgrf;
using doctest::Approx;

namespace {

FieldSample synthetic(const GridSpec& spec, const std::function<double(double, double)>& y)
{
  FieldSample s{ Grid(spec), {}, 0, SamplerTag::exact_cholesky, std::nullopt, std::nullopt };
  s.values.resize(s.grid.size());
  for (Eigen::Index k = 0; k < s.values.size(); ++k) {
    const Vec2 p = s.grid.point(k);
    s.values[k] = y(p.x(), p.y());
  }
  return s;
}

double integrate_2d(const std::function<double(const Vec2&)>& f, double R, int m)
{
  // midpoint rule on [-R, R]^2
  const double h = 2 * R / m;
  double s = 0.0;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i)
      s += f(Vec2(-R + (i + 0.5) * h, -R + (j + 0.5) * h));
  return s * h * h;
}

} // namespace

TEST_CASE("kernels have unit mass and consistent gradients")
{
  for (const Kernel& K : { Kernel::triweight(), Kernel::gaussian() }) {
    const double R = K.support_radius();
    CHECK(integrate_2d([&](const Vec2& x) { return K(x); }, R, 800) == Approx(1.0).epsilon(K.compact() ? 1e-6 : 1e-5));
    CHECK(integrate_2d([&](const Vec2& x) { return x.norm() * K(x); }, R, 400) < 2.0);
    for (const Vec2& x : { Vec2(0.1, -0.3), Vec2(0.5, 0.2), Vec2(-0.7, 0.6) }) {
      const double h = 1e-6;
      const Vec2 fd((K(x + Vec2(h, 0)) - K(x - Vec2(h, 0))) / (2 * h), (K(x + Vec2(0, h)) - K(x - Vec2(0, h))) / (2 * h));
      CHECK((K.gradient(x) - fd).norm() < 1e-7);
      CHECK(K(x) >= 0.0);
    }
  }
  CHECK(Kernel::triweight()(Vec2(1.0, 0.0)) == 0.0);
  CHECK(Kernel::triweight().gradient(Vec2(1.0, 0.3)).norm() == 0.0);
  CHECK(kernel_from_string("gaussian").kind() == KernelKind::gaussian);
  CHECK_THROWS_AS(kernel_from_string("box"), Error);
}

TEST_CASE("second increments")
{
  const GridSpec spec{ 16, {}, 2 };
  const double n = 16;
  const auto affine = synthetic(spec, [](double x, double y) { return 3 * x - 2 * y + 1; });
  const auto sq = synthetic(spec, [](double x, double) { return x * x; });
  const auto xy = synthetic(spec, [](double x, double y) { return x * y; });
  for (int i = 1; i <= 15; ++i) {
    for (Direction h : kDirections)
      CHECK(std::abs(second_increment(affine, i, 8, h)) < 1e-13);
    CHECK(second_increment(sq, i, 5, { 1, 0 }) == Approx(2 / (n * n)).epsilon(1e-12));
    CHECK(second_increment(xy, i, 5, { 1, 1 }) == Approx(2 / (n * n)).epsilon(1e-12));
  }
  CHECK(second_increment(sq, Vec2(0.5, 0.25), { 1, 0 }) == Approx(2 / (n * n)).epsilon(1e-12));
  CHECK_THROWS_AS(second_increment(sq, 17, 5, { 1, 0 }), Error);
  CHECK_THROWS_AS(second_increment(sq, Vec2(0.51, 0.25), { 1, 0 }), Error);
}

TEST_CASE("smoothed variation on synthetic fields")
{
  const int n = 64;
  const GridSpec spec{ n, {}, 2 };
  const Kernel K = Kernel::triweight();
  const double b = 0.25;
  const Vec2 t(0.5, 0.5);

  const auto zero = synthetic(spec, [](double, double) { return 0.0; });
  CHECK(smoothed_variation(zero, t, { 1, 0 }, b, K, 1.0) == 0.0);
  CHECK(directional_derivative_B(zero, t, { 1, 0 }, b, K, Vec2(1, 0), 1.0) == 0.0);

  // (D2 Y)^2 = n^-alpha along x: c x^2 with 2c/n^2 = n^{-alpha/2}
  const double alpha = 1.0;
  const double c = 0.5 * std::pow(n, 2.0 - alpha / 2);
  const auto quad = synthetic(spec, [c](double x, double) { return c * x * x; });
  const double B = smoothed_variation(quad, t, { 1, 0 }, b, K, alpha);
  CHECK(B == Approx(1.0).epsilon(1e-4));
  const double dB = directional_derivative_B(quad, t, { 1, 0 }, b, K, Vec2(0.6, 0.8), alpha);
  CHECK(std::abs(dB) < 10.0 / (n * std::pow(b, 4)));
  CHECK(std::abs(dB) < 1e-6);

  // kernel reaching outside the usable lattice is an error, never a truncation
  CHECK_THROWS_AS(smoothed_variation(quad, Vec2(0.2, 0.5), { 1, 0 }, b, K, alpha), Error);
  try {
    smoothed_variation(quad, Vec2(0.2, 0.5), { 1, 0 }, b, K, alpha);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::support_clipped);
  }
  const Rect ev = evaluable_region(Grid(spec), b, K);
  CHECK_NOTHROW(smoothed_variation(quad, Vec2(ev.x0, ev.y1), { 1, 1 }, b, K, alpha));
}

TEST_CASE("derivative of B matches finite differences on seeded samples")
{
  const auto model = CovarianceModel::powered_exponential(1.0, 1.0).normalized();
  const auto f = Deformation::quadratic({ 0.15, 0.05 });
  const FieldSample Y = sample_exact(model, f, GridSpec{ 48, {}, 2 }, 31);
  const Kernel K = Kernel::triweight();
  const double b = 0.3, delta = 1e-4;
  const VariationEstimator est(Y, 1.0);
  for (const Vec2& t : { Vec2(0.5, 0.5), Vec2(0.41, 0.57) })
    for (Direction h : kDirections)
      for (const Vec2& u : { Vec2(1, 0), Vec2(0, 1), Vec2(0.6, -0.8) }) {
        const double fd = (est.value(t + delta * u, h, b, K) - est.value(t - delta * u, h, b, K)) / (2 * delta);
        const double an = est.derivative(t, h, b, K, u);
        CHECK(std::abs(an - fd) <= 1e-5 * std::abs(an));
        CHECK(an == directional_derivative_B(Y, t, h, b, K, u, 1.0));
      }
  const auto [v, grad] = est.value_and_gradient(Vec2(0.5, 0.5), { 1, 1 }, b, K);
  CHECK(v == est.value(Vec2(0.5, 0.5), { 1, 1 }, b, K));
  CHECK(grad.x() == Approx(est.derivative(Vec2(0.5, 0.5), { 1, 1 }, b, K, Vec2(1, 0))));
}

TEST_CASE("variation field values are nonnegative")
{
  const auto model = CovarianceModel::powered_exponential(1.0, 1.0);
  const FieldSample Y = sample_exact(model, Deformation::identity(), GridSpec{ 32, {}, 2 }, 3);
  const Kernel K = Kernel::triweight();
  const double b = 0.2;
  const RegularGrid pts = lattice_points_in(Y.grid, evaluable_region(Y.grid, b, K));
  REQUIRE(pts.size() > 0);
  const auto B = smoothed_variation_field(Y, pts, b, K, 1.0);
  for (const auto& v : B.values)
    CHECK(v.minCoeff() >= 0.0);
}

TEST_CASE("g")
{
  const auto id = Deformation::identity();
  const auto af = Deformation::affine((Mat2() << 2, 0, 0, 1).finished());
  CHECK(g_true(id, Vec2(0.3, 0.3), { 1, 0 }, 1.0) == Approx(4.0));
  CHECK(g_true(af, Vec2(0.3, 0.3), { 1, 0 }, 1.0) == Approx(8.0));
  CHECK(g_true(id, Vec2(0.3, 0.3), { 1, 1 }, 1.999999) < 1e-4);
}

TEST_CASE("exact increment covariance")
{
  const auto model = CovarianceModel::powered_exponential(1.0, 1.0);
  const auto f = Deformation::quadratic({ 0.1, 0.1 });
  const Vec2 t(0.3, 0.4), s(0.55, 0.35);
  for (Direction h : kDirections) {
    CHECK(increment_covariance_exact(model, f, t, t, h, 64) > 0.0);
    CHECK(increment_covariance_exact(model, f, t, s, h, 64) ==
          Approx(increment_covariance_exact(model, f, s, t, h, 64)).epsilon(1e-12));
  }
  // far apart, n^4 E[D2 Y(t) D2 Y(s)] tends to the fourth derivative of R along h
  const auto id = Deformation::identity();
  for (double d : { 0.3, 0.45, 0.6 }) {
    const double v = increment_covariance_exact(model, id, Vec2(0.2, 0.5), Vec2(0.2 + d, 0.5), { 1, 0 }, 64);
    CHECK(std::pow(64.0, 4) * v == Approx(std::exp(-d)).epsilon(0.05));
  }
}

TEST_CASE("mean of B matches g (Monte Carlo)" * doctest::timeout(300))
{
  // local window around t0 holding the kernel support at b = 0.25 plus the stencil
  const int n = 128;
  const double b = 0.25;
  const Vec2 t0(0.5, 0.5);
  const Rect window{ t0.x() - 0.27, t0.y() - 0.27, t0.x() + 0.27, t0.y() + 0.27 };
  const auto model = CovarianceModel::powered_exponential(1.0, 1.0);
  const auto f = Deformation::affine((Mat2() << 2, 0, 0, 1).finished());
  const ExactSampler S(model, f, GridSpec{ n, window, 2 });
  const Kernel K = Kernel::triweight();
  const int reps = 200;
  Eigen::ArrayXd B(reps);
  for (int r = 0; r < reps; ++r)
    B[r] = smoothed_variation(S.draw(split_seed(555, r)), t0, { 1, 0 }, b, K, 1.0);
  const double mean = B.mean();
  const double se = std::sqrt((B - mean).square().sum() / (reps - 1) / reps);
  CHECK(g_true(f, t0, { 1, 0 }, 1.0) == Approx(8.0));
  CHECK(std::abs(mean - 8.0) <= 3.0 * se);
}

TEST_CASE("increment bias shrinks with n")
{
  const auto model = CovarianceModel::powered_exponential(1.0, 1.0).normalized();
  const auto f = Deformation::affine((Mat2() << 2, 0, 0, 1).finished());
  double prev = INFINITY;
  for (int n : { 16, 32, 64 }) {
    double sup = 0.0;
    for (double x : { 0.2, 0.5, 0.8 }) {
      const Vec2 t(x, 0.5);
      const double g = g_true(f, t, { 1, 0 }, 1.0);
      sup = std::max(sup, std::abs(n * increment_covariance_exact(model, f, t, t, { 1, 0 }, n) - g) / g);
    }
    CHECK(sup < prev);
    prev = sup;
  }
}

TEST_CASE("lattice points and evaluable region")
{
  const Grid g(GridSpec{ 10, {}, 2 });
  const RegularGrid pts = lattice_points_in(g, Rect{ 0.25, 0.3, 0.61, 0.9 });
  CHECK(pts.origin.x() == Approx(0.3));
  CHECK(pts.origin.y() == Approx(0.3));
  CHECK(pts.nx == 4);
  CHECK(pts.ny == 7);
  CHECK(lattice_points_in(g, Rect{ 0.25, 0.3, 0.61, 0.9 }, 2).nx == 2);

  const Rect ev = evaluable_region(g, 0.2, Kernel::triweight());
  CHECK(ev.x0 == Approx(0.2));
  CHECK(ev.x1 == Approx(0.8));
  CHECK(evaluable_region(g, 0.02, Kernel::gaussian()).x0 == Approx(0.1));
}

TEST_CASE("bandwidth schedule and validator")
{
  const BandwidthSchedule s{};
  CHECK(s(64) == Approx(1.2 * std::pow(64.0, -0.22)));
  CHECK(default_beta_prime(0.9) == Approx(0.22));
  CHECK(default_beta_prime(0.1) == Approx(0.08));

  CHECK_NOTHROW(validate_bandwidth({ 1.2, 0.3 }, 0.9, BandwidthUse::variation));
  CHECK_THROWS_AS(validate_bandwidth({ 1.2, 0.4 }, 0.9, BandwidthUse::variation), Error);
  CHECK_THROWS_AS(validate_bandwidth({ 1.2, 0.0 }, 0.9, BandwidthUse::variation), Error);
  CHECK_THROWS_AS(validate_bandwidth({ -1.0, 0.2 }, 0.9, BandwidthUse::variation), Error);
  CHECK_THROWS_AS(validate_bandwidth({ 1.2, 0.25 }, 0.9, BandwidthUse::derivative), Error);
  CHECK_THROWS_AS(validate_bandwidth({ 1.2, 0.2 }, 0.15, BandwidthUse::derivative), Error);

  // soundness: every accepted pair satisfies the rate inequalities
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-0.1, 0.6);
  for (int k = 0; k < 2000; ++k) {
    const double bp = U(rng), gamma = U(rng) + 0.1;
    try {
      validate_bandwidth({ 1.0, bp }, gamma, BandwidthUse::derivative);
      const double beta = 1 - 4 * bp;
      CHECK(beta > 0);
      CHECK(beta > 1 - 4 * gamma);
    } catch (const Error&) {
    }
    try {
      validate_bandwidth({ 1.0, bp }, gamma, BandwidthUse::variation);
      CHECK(1 - 3 * bp > 0);
      CHECK(bp > 0);
    } catch (const Error&) {
    }
  }
}
