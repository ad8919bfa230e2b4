#include "dgrf/qcmap.hpp"

#include <doctest.h>

#include <random>

using namespace dgrf;
using doctest::Approx;

namespace {

const Disk kU{};

QCMapOptions small_options()
{
  QCMapOptions o;
  o.M = 256;
  return o;
}

DilatationField constant_field(Complex mu)
{
  DilatationField D;
  D.points = RegularGrid{ Vec2(0.1, 0.1), 0.05, 17, 17 };
  D.mu.setConstant(17, 17, mu);
  D.tau.setZero(17, 17);
  D.masked.setConstant(17, 17, false);
  return D;
}

const QCMap& identity_map()
{
  static const QCMap m = build_qcmap(constant_field(0.0), kU, small_options());
  return m;
}

const QCMap& affine_map()
{
  static const QCMap m = build_qcmap(constant_field(1.0 / 3), kU, small_options());
  return m;
}

} // namespace

TEST_CASE("radial cutoff")
{
  CHECK(radial_cutoff(0.2, 0.3, 0.45) == 1.0);
  CHECK(radial_cutoff(0.3, 0.3, 0.45) == 1.0);
  CHECK(radial_cutoff(0.45, 0.3, 0.45) == 0.0);
  CHECK(radial_cutoff(0.375, 0.3, 0.45) == Approx(0.5));
  // monotone, with bounded second differences across the transition
  const double h = 1e-4;
  double prev = 1.0, worst = 0.0;
  for (double r = 0.25; r <= 0.5; r += h) {
    const double c = radial_cutoff(r, 0.3, 0.45);
    CHECK(c <= prev + 1e-15);
    prev = c;
    const double d2 = (radial_cutoff(r + h, 0.3, 0.45) - 2 * c + radial_cutoff(r - h, 0.3, 0.45)) / (h * h);
    worst = std::max(worst, std::abs(d2));
  }
  CHECK(worst < 400.0);
  // the second derivative vanishes at both ends, so it has no jump there
  const auto d2 = [&](double r) {
    return (radial_cutoff(r + h, 0.3, 0.45) - 2 * radial_cutoff(r, 0.3, 0.45) + radial_cutoff(r - h, 0.3, 0.45)) / (h * h);
  };
  CHECK(std::abs(d2(0.3 + 2 * h)) < 0.5);
  CHECK(std::abs(d2(0.45 - 2 * h)) < 0.5);
}

TEST_CASE("truncation of the coefficient")
{
  const PlaneBeltrami zero = truncate_mu(constant_field(0.0), kU, 0.45, 8.0, 64);
  CHECK(zero.mu.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.k == 0.0);

  const PlaneBeltrami c = truncate_mu(constant_field(0.3), kU, 0.45, 8.0, 128);
  CHECK(c.k == Approx(0.3));
  for (int b = 0; b < 128; ++b)
    for (int a = 0; a < 128; ++a) {
      const double r = std::abs(c.box.point(a, b) - kU.center);
      if (r <= kU.radius)
        CHECK(std::abs(c.mu(a, b) - 0.3) < 1e-15);
      if (r >= 0.45)
        CHECK(c.mu(a, b) == Complex(0.0));
    }
  CHECK(c.box.side == Approx(8 * kU.diameter()));

  CHECK_THROWS_AS(truncate_mu(constant_field(0.3), Disk{ { 0.5, 0.5 }, 0.5 }, 0.7, 8.0, 64), Error);
  CHECK_THROWS_AS(truncate_mu(constant_field(0.3), kU, 0.2, 8.0, 64), Error);
  CHECK_THROWS_AS(truncate_mu([](Complex) { return Complex(1.0); }, kU, 0.45, 8.0, 64), Error);
}

TEST_CASE("spectral operators")
{
  const SpectralOperators ops(SpectralBox{ 0.0, 4.0, 128 });
  CHECK(ops.self_test() < 1e-6);
}

TEST_CASE("plane solver")
{
  SUBCASE("zero coefficient gives the identity")
  {
    const PlaneMap f = solve_beltrami_plane(truncate_mu([](Complex) { return Complex(0.0); }, kU, 0.45, 8.0, 64));
    for (const Complex z : { Complex(0.5, 0.5), Complex(0.3, 0.7), Complex(2.0, -1.0) }) {
      CHECK(std::abs(f(z) - z) < 1e-12);
      CHECK(std::abs(f.jet(z).dz - 1.0) < 1e-12);
    }
  }
  SUBCASE("constant coefficient on a disk matches z + k conj(z) inside")
  {
    // sharp disk of radius 0.3 around the box centre; the exact solution is
    // z + k conj(z - c) inside and z + k rho^2 / (z - c) outside
    const double k = 0.3, rho = 0.3;
    PlaneBeltrami pb;
    pb.box = { Complex(0.5, 0.5), 4.8, 256 };
    pb.mu.setZero(256, 256);
    for (int b = 0; b < 256; ++b)
      for (int a = 0; a < 256; ++a)
        if (std::abs(pb.box.point(a, b) - pb.box.center) < rho)
          pb.mu(a, b) = k;
    pb.k = k;
    pb.support_radius = rho;
    const PlaneMap f = solve_beltrami_plane(pb);
    const Complex c = pb.box.center;
    double worst = 0.0;
    for (const Complex d : { Complex(0.1, 0.0), Complex(-0.05, 0.12), Complex(0.0, -0.15) }) {
      const Complex z1 = c + d, z2 = c - 0.5 * d;
      const Complex exact = (z1 - z2) + k * std::conj(z1 - z2);
      worst = std::max(worst, std::abs((f(z1) - f(z2)) - exact) / std::abs(exact));
    }
    CHECK(worst < 0.05);
    // geometric convergence at a rate no worse than k plus slack
    const auto& hist = f.history();
    REQUIRE(hist.size() >= 3);
    for (std::size_t i = 2; i < hist.size(); ++i)
      if (hist[i - 1] > 1e-13)
        CHECK(hist[i] / hist[i - 1] <= k + 0.05);
  }
  SUBCASE("smooth coefficient: spectral residual and rate")
  {
    const PlaneBeltrami pb = truncate_mu([](Complex z) { return 0.4 * std::exp(-8.0 * std::norm(z - Complex(0.5, 0.5))) * Complex(0.6, 0.8); },
                                         kU, 0.45, 8.0, 256);
    const BeltramiOptions o{ 1e-10, 500, 0.5 };
    const PlaneMap f = solve_beltrami_plane(pb, o);
    CHECK(f.residual_spectral() < 10 * o.tol);
    CHECK(std::isfinite(f.residual_fd()));
    CHECK(f.self_test_error() < 1e-6);
    // sup-norm increments may stall for one step while a slower mode takes
    // over, so the rate is checked over two steps
    const auto& hist = f.history();
    for (std::size_t i = 2; i < hist.size(); ++i)
      CHECK(std::sqrt(hist[i] / hist[i - 2]) <= pb.k + 0.05);
  }
  SUBCASE("errors")
  {
    PlaneBeltrami pb = truncate_mu([](Complex) { return Complex(0.2); }, kU, 0.45, 8.0, 64);
    CHECK_THROWS_AS(solve_beltrami_plane(pb, { 1e-10, 2, 0.5 }), Error);
    pb.k = 1.0;
    CHECK_THROWS_AS(solve_beltrami_plane(pb), Error);
    const PlaneBeltrami tight = truncate_mu([](Complex) { return Complex(0.2); }, kU, 0.45, 1.2, 64);
    try {
      solve_beltrami_plane(tight);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::aliasing);
    }
  }
}

TEST_CASE("Riemann map examples")
{
  const auto affine = [](Complex a, double r) {
    return [a, r](Complex z) { return MapJet{ a + r * z, Complex(r), Complex(0) }; };
  };
  const RiemannMap id = riemann_map(MappedDisk{ Disk{ 0.0, 1.0 }, affine(0.0, 1.0) }, 0.0);
  for (const Complex w : { Complex(0.3, 0.2), Complex(-0.7, 0.1), Complex(0.0, 0.95) }) {
    CHECK(std::abs(id(w) - w) < 1e-10);
    CHECK(std::abs(id.derivative(w) - 1.0) < 1e-10);
  }
  const Complex a(2.0, -1.0);
  const RiemannMap disk = riemann_map(MappedDisk{ Disk{ 0.0, 1.0 }, affine(a, 0.4) }, a);
  for (const Complex w : { a + 0.1, a + Complex(0.2, -0.3) })
    CHECK(std::abs(disk(w) - (w - a) / 0.4) < 1e-10);
  CHECK(disk.boundary_error() < 1e-8);

  // U carried by a conformal map: rho composed with it is conformal
  const Complex z0 = kU.center;
  const auto phi = [z0](Complex z) {
    const Complex u = z - z0;
    return MapJet{ u + 0.8 * u * u, 1.0 + 1.6 * u, Complex(0) };
  };
  const RiemannMap rho = riemann_map(MappedDisk{ kU, phi }, 0.0);
  CHECK(rho.boundary_error() < 1e-2);
  CHECK(std::abs(rho(0.0)) < 1e-12);
  CHECK(std::abs(rho.derivative(0.0).imag()) < 1e-12);
  CHECK(rho.derivative(0.0).real() > 0.0);
  for (const Complex z : { z0 + 0.1, z0 + Complex(-0.05, 0.15), z0 + Complex(0.0, -0.2) })
    CHECK(std::abs(measured_dilatation([&](Complex s) { return rho(phi(s).value); }, z)) < 1e-3);
}

TEST_CASE("QC map with zero coefficient")
{
  const QCMap& m = identity_map();
  const Complex z0 = kU.center;
  CHECK(m(z0) == Complex(0.0));
  CHECK(std::abs(m.jet(z0).dz.imag()) <= 1e-15 * std::abs(m.jet(z0).dz));
  for (const Complex z : { z0 + 0.1, z0 + Complex(-0.12, 0.2), z0 + Complex(0.25, -0.05) }) {
    CHECK(std::abs(m(z) - (z - z0) / kU.radius) < 1e-8);
    CHECK(std::abs(m.jet(z).dz - 1.0 / kU.radius) < 1e-6);
  }
  CHECK(std::abs(invert_qcmap(m, 0.0) - z0) < 1e-10);
  for (const Complex w : { Complex(0.5, 0.1), Complex(-0.3, -0.8) })
    CHECK(std::abs(invert_qcmap(m, w) - (z0 + kU.radius * w)) < 1e-8);
  CHECK_THROWS_AS(invert_qcmap(m, 0.99), Error);
}

TEST_CASE("QC map of a constant coefficient")
{
  const QCMap& m = affine_map();
  const Complex z0 = kU.center;
  CHECK(m(z0) == Complex(0.0));
  CHECK(std::abs(m.jet(z0).dz.imag()) <= 1e-15 * std::abs(m.jet(z0).dz));
  CHECK(m.jet(z0).dz.real() > 0.0);
  CHECK(m.k() == Approx(1.0 / 3));

  // dilatation fidelity on the half-radius and 0.8-radius sub-disks
  CHECK(dilatation_fidelity(m, [](Complex) { return Complex(1.0 / 3); }, 0.5) <= 0.02);
  CHECK(dilatation_fidelity(m, [](Complex) { return Complex(1.0 / 3); }, 0.8) <= 0.03);

  // boundary samples land on the unit circle and the map preserves orientation
  for (int j = 0; j < 64; ++j) {
    const Complex z = z0 + kU.radius * std::polar(1.0, 2 * kPi * j / 64);
    CHECK(std::abs(std::abs(m(z)) - 1.0) <= 1e-2);
  }
  for (int j = -4; j <= 4; ++j)
    for (int i = -4; i <= 4; ++i) {
      const Complex z = z0 + Complex(0.06 * i, 0.06 * j);
      if (std::abs(z - z0) >= kU.radius - 1e-9)
        continue;
      const double h = 1e-5;
      const Complex fx = (m(z + h) - m(z - h)) / (2 * h), fy = (m(z + Complex(0, h)) - m(z - Complex(0, h))) / (2 * h);
      CHECK(fx.real() * fy.imag() - fx.imag() * fy.real() > 0.0);
      CHECK(std::abs(m(z)) < 1.0);
    }

  // inversion round trip
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Complex w = std::polar(0.9 * std::sqrt(U(rng)), 2 * kPi * U(rng));
    worst = std::max(worst, std::abs(m(invert_qcmap(m, w)) - w));
  }
  CHECK(worst < m.options().tol_inv);
  CHECK(std::abs(invert_qcmap(m, 0.0) - z0) < 1e-10);

  // tables agree with direct evaluation
  CHECK(m.inverse_table().rows() == m.options().inverse_radial);
  CHECK(std::abs(m(m.inverse_table()(3, 5)) - std::polar(m.inverse_radius(3), m.inverse_angle(5))) < 1e-8);
}

TEST_CASE("measured dilatation")
{
  const auto f = [](Complex z) { return z + 0.25 * std::conj(z) + z * z; };
  const Complex z(0.3, 0.1);
  CHECK(std::abs(measured_dilatation(f, z) - 0.25 / (1.0 + 2.0 * z)) < 1e-8);
}
