#include "dgrf/harness.hpp"
#include "dgrf/reconstruct.hpp"

#include <doctest.h>

using namespace dgrf;
using doctest::Approx;

namespace {

const Disk kU{};

ReconstructOptions fast_options()
{
  ReconstructOptions o;
  o.qcmap.M = 256;
  o.rho_eval = 0.5;
  return o;
}

const QCMap& identity_qcmap()
{
  static const QCMap m = [] {
    DilatationField D;
    D.points = RegularGrid{ Vec2(0.1, 0.1), 0.05, 17, 17 };
    D.mu.setZero(17, 17);
    D.tau.setZero(17, 17);
    D.masked.setConstant(17, 17, false);
    QCMapOptions o;
    o.M = 256;
    return build_qcmap(D, kU, o);
  }();
  return m;
}

LogGprime on_nodes(const DiskQuadrature& quad, const std::function<double(Complex)>& phi)
{
  LogGprime p;
  p.values.resize(quad.size());
  for (Eigen::Index k = 0; k < quad.size(); ++k)
    p.values[k] = phi(quad.nodes()[k]);
  p.at_zero = phi(0.0);
  p.masked.setConstant(quad.size(), false);
  return p;
}

} // namespace

TEST_CASE("log g' for the identity deformation")
{
  const QCMap& m = identity_qcmap();
  const DiskQuadrature quad(16, 32);
  const LogGprime phi = estimate_log_gprime([](Complex) { return 0.0; }, m, quad.nodes(), 0.05, 0.9);
  CHECK(phi.masked_fraction() == 0.0);
  CHECK((phi.values.array() - std::log(kU.radius)).abs().maxCoeff() < 1e-6);
  CHECK(phi.at_zero == Approx(std::log(kU.radius)).epsilon(1e-8));

  // a constant shift of tau moves phi by exactly that constant
  const double kappa = 0.37;
  const LogGprime shifted = estimate_log_gprime([&](Complex) { return kappa; }, m, quad.nodes(), 0.05, 0.9);
  CHECK(((shifted.values - phi.values).array() - kappa).abs().maxCoeff() < 1e-12);
}

TEST_CASE("reconstruct g from log|g'|")
{
  const DiskQuadrature quad(64, 256);
  const double r = 0.3;
  const ConformalFactor g0 = reconstruct_g(on_nodes(quad, [r](Complex) { return std::log(r); }), 24, quad);
  for (const Complex w : { Complex(0.2, 0.1), Complex(-0.5, 0.6) }) {
    CHECK(std::abs(g0(w) - r * w) < 1e-13);
    CHECK(std::abs(g0.derivative(w) - r) < 1e-13);
  }
  CHECK(g0(0.0) == Complex(0.0));

  const double kappa = 0.5;
  const ConformalFactor g1 = reconstruct_g(on_nodes(quad, [kappa](Complex w) { return (kappa * w).real(); }), 24, quad);
  for (const Complex w : { Complex(0.2, 0.1), Complex(-0.5, 0.6), Complex(0.0, -0.9) })
    CHECK(std::abs(g1(w) - (std::exp(kappa * w) - 1.0) / kappa) < 1e-8);

  // adding a constant scales g by its exponential
  const auto u = [](Complex w) { return std::sin(w.real()) * w.imag() + 0.2 * w.real(); };
  const ConformalFactor a = reconstruct_g(on_nodes(quad, u), 24, quad);
  const ConformalFactor b = reconstruct_g(on_nodes(quad, [&](Complex w) { return u(w) + 0.7; }), 24, quad);
  for (const Complex w : { Complex(0.3, -0.2), Complex(-0.6, 0.1) })
    CHECK(std::abs(b(w) - std::exp(0.7) * a(w)) <= 1e-12 * std::abs(b(w)));
}

TEST_CASE("exact injection: identity")
{
  const ReconstructedMap m = reconstruct_f_exact(Deformation::identity(), fast_options());
  const Complex z0 = kU.center;
  for (const Complex z : { z0, z0 + 0.1, z0 + Complex(-0.05, 0.12) })
    CHECK(std::abs(m(z) - (z - z0)) < 1e-6);
  CHECK(m.evaluable(z0 + 0.14));
  CHECK_FALSE(m.evaluable(z0 + 0.2));
  CHECK_THROWS_AS(m(z0 + 0.2), Error);
  CHECK(m.provenance().exact);
  CHECK(aligned_error(m, Deformation::identity(), 0.5).sup_error <= 0.02 * kU.diameter());
}

TEST_CASE("exact injection: affine and rigid quotient")
{
  ReconstructOptions o = fast_options();
  o.qcmap.M = 512;
  const Deformation f = Deformation::affine((Mat2() << 2, 0, 0, 1).finished());
  const ReconstructedMap m = reconstruct_f_exact(f, o);
  const AlignmentResult a = aligned_error(m, f, 0.5);
  CHECK(a.sup_error <= 0.02 * kU.diameter());

  const Deformation g = f.then_rigid(kPi / 6, { 0.1, 0.2 });
  const ReconstructedMap mg = reconstruct_f_exact(g, o);
  const AlignmentResult b = aligned_error(mg, g, 0.5);
  CHECK(std::abs(b.sup_error - a.sup_error) <= 1e-8);
  CHECK(std::abs(std::remainder(a.theta - b.theta - kPi / 6, 2 * kPi)) < 1e-8);
}

TEST_CASE("tau shift scales the reconstruction")
{
  const ReconstructOptions o = fast_options();
  const Deformation f = Deformation::quadratic({ 0.15, 0.0 });
  const auto tau = [&](Complex z) { return f.tau(z); };
  const double kappa = 0.25;
  const ReconstructedMap a = reconstruct_from(tau, identity_qcmap(), nullptr, o, {});
  const ReconstructedMap b = reconstruct_from([&](Complex z) { return tau(z) + kappa; }, identity_qcmap(), nullptr, o, {});
  for (const Complex z : { kU.center + 0.05, kU.center + Complex(-0.1, 0.07) })
    CHECK(std::abs(b(z) - std::exp(kappa) * a(z)) <= 1e-12 * std::abs(b(z)));
}

TEST_CASE("statistical pipeline is deterministic and recovers the identity" * doctest::timeout(600))
{
  const auto model = CovarianceModel::powered_exponential(1.0, 1.0).normalized();
  const FieldSample Y = sample_fast(model, Deformation::identity(), GridSpec{ 256, {}, 2 }, split_seed(20240601, 256), { 2 });
  ReconstructOptions o;
  o.rho_eval = 0.5;
  const ReconstructedMap a = reconstruct_f(Y, o);
  const ReconstructedMap b = reconstruct_f(Y, o);
  const Eigen::VectorXcd pts = disk_sample_points(kU, 0.5);
  for (const Complex z : pts)
    CHECK(a(z) == b(z));
  REQUIRE(a.field());
  CHECK(a.provenance().n == 256);
  CHECK_FALSE(a.provenance().exact);
  const double err = aligned_error(a, Deformation::identity(), 0.5).sup_error;
  MESSAGE("aligned sup error at n = 256: " << err);
  CHECK(err <= 0.05 * kU.diameter());
}

TEST_CASE("estimation points cover U with room for inversion")
{
  const Grid g(GridSpec{ 64, {}, 2 });
  const Kernel K = Kernel::triweight();
  const RegularGrid pts = estimation_points(g, kU, 0.2, K);
  const Rect r = pts.bounds();
  CHECK(r.x0 <= kU.center.real() - kU.radius + 1.0 / 64);
  CHECK(r.x1 >= kU.center.real() + kU.radius - 1.0 / 64);
  CHECK_THROWS_AS(estimation_points(g, kU, 0.45, K), Error);
  CHECK(data_extension_from_string(to_string(DataExtension::nearest_radius)) == DataExtension::nearest_radius);
}
