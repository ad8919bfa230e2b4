#include "dgrf/selfcheck.hpp"

#include "dgrf/harness.hpp"
#include "dgrf/io.hpp"

#include <random>
#include <sstream>

namespace dgrf {

namespace {

CheckResult check(std::string name, double value, double threshold, std::string note = {})
{
  return { std::move(name), value <= threshold, value, threshold, std::move(note) };
}

CheckResult ellipse_round_trip()
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  double worst = 0.0;
  for (int k = 0; k < 10000;) {
    Mat2 J;
    J << U(rng), U(rng), U(rng), U(rng);
    if (J.determinant() <= 0.0)
      continue;
    ++k;
    const auto W = exact_scales(J);
    const auto mt = mu_tau_from_ellipse(ellipse_coefficients(W[0], W[1], W[2]), 0.0);
    const MapJet c = complex_from_jacobian(J);
    const Complex mu = c.dzbar / c.dz;
    const double tau = std::log(std::abs(c.dz));
    worst = std::max({ worst, std::abs(mt.mu - mu) / std::abs(mu), std::abs(mt.tau - tau) / std::max(1.0, std::abs(tau)) });
  }
  return check("ellipse round trip (1e4 Jacobians)", worst, 1e-10);
}

CheckResult catalog_identities()
{
  const Deformation defs[] = { Deformation::identity(),
                               Deformation::affine((Mat2() << 2, 0.3, -0.1, 1).finished()),
                               Deformation::quadratic({ 0.15, 0.05 }),
                               Deformation::modulus_quadratic({ 0.2, -0.1 }).then_rigid(0.4, { 0.1, 0.2 }) };
  double worst = 0.0;
  for (const Deformation& f : defs)
    for (int j = 0; j <= 8; ++j)
      for (int i = 0; i <= 8; ++i) {
        const Complex z(0.1 + 0.1 * i, 0.1 + 0.1 * j);
        const MapJet m = f.jet(z);
        const double det = f.jacobian(z).determinant();
        worst = std::max({ worst, std::abs(f.mu(z) * m.dz - m.dzbar) / std::abs(m.dz),
                           std::abs(std::exp(f.tau(z)) - std::abs(m.dz)) / std::abs(m.dz),
                           std::abs(det - (std::norm(m.dz) - std::norm(m.dzbar))) / std::abs(det) });
      }
  return check("catalog mu, tau and determinant identities", worst, 1e-12);
}

CheckResult alignment_recovery()
{
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXcd f(30);
    for (auto& v : f)
      v = { N(rng), N(rng) };
    const double theta = 3.0 * std::tanh(N(rng));
    const Complex c(N(rng), N(rng));
    const Eigen::VectorXcd g = (std::polar(1.0, theta) * f.array() + c).matrix();
    const AlignmentResult a = align(f, g);
    worst = std::max({ worst, std::abs(std::remainder(a.theta - theta, 2 * kPi)), std::abs(a.c - c), a.sup_error });
  }
  return check("alignment recovers random rigid motions", worst, 1e-12);
}

CheckResult bergman_monomials()
{
  const DiskQuadrature quad(64, 256);
  double worst = 0.0;
  for (int k = 0; k <= 10; ++k) {
    const HolomorphicPoly P = bergman_project([k](Complex z) { return std::pow(z, k).real(); }, 12, quad);
    for (int j = 0; j <= P.degree(); ++j)
      worst = std::max(worst, std::abs(P.coeffs()[j] - (j == k ? 1.0 : 0.0)));
  }
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  Eigen::VectorXcd c(9);
  for (auto& v : c)
    v = { N(rng), N(rng) };
  c[0] = c[0].real();
  worst = std::max(worst, project_real_part_identity_check(HolomorphicPoly(c), quad));
  return check("Bergman projection of Re z^k and Re F", worst, 1e-10);
}

CheckResult zero_coefficient_identity()
{
  const Disk U{};
  const PlaneBeltrami pb = truncate_mu([](Complex) { return Complex(0.0); }, U, 1.5 * U.radius, 8.0, 128);
  const PlaneMap f = solve_beltrami_plane(pb);
  double worst = 0.0;
  for (int j = 0; j <= 10; ++j)
    for (int i = 0; i <= 10; ++i) {
      const Complex z = U.center + U.radius * Complex(-1 + 0.2 * i, -1 + 0.2 * j);
      worst = std::max(worst, std::abs(f(z) - z));
    }
  return check("plane solver with zero coefficient is the identity", worst, 1e-8);
}

CheckResult exact_injection_identity()
{
  ReconstructOptions o;
  o.qcmap.M = 256;
  const Deformation f = Deformation::affine((Mat2() << 2, 0, 0, 1).finished());
  const ReconstructedMap m = reconstruct_f_exact(f, o);
  const double err = aligned_error(m, f, 0.5).sup_error / o.U.diameter();
  return check("exact-injection reconstruction of diag(2, 1)", err, 0.02);
}

CheckResult dump_round_trips()
{
  const FieldSample Y = sample_exact(CovarianceModel::powered_exponential(1, 1).normalized(), Deformation::identity(),
                                     GridSpec{ 12, {}, 2 }, 42);
  std::stringstream s;
  write_fgrid(s, Y);
  const FieldSample Z = read_fgrid(s);
  double worst = (Y.values - Z.values).cwiseAbs().maxCoeff();

  Eigen::VectorXcd c(4);
  c << Complex(1.0 / 3, 0.1), Complex(-2e-17, 5.5), Complex(0, 0), Complex(1e300, -1e-300);
  std::stringstream p;
  write_poly(p, HolomorphicPoly(c));
  worst = std::max(worst, (read_poly(p).coeffs() - c).cwiseAbs().maxCoeff());
  return check("fgrid and polynomial dumps round-trip exactly", worst, 0.0);
}

CheckResult validator_rejects()
{
  int accepted = 0;
  for (double beta : { 0.4, 1.0 / 3.0, -0.1 }) {
    try {
      validate_bandwidth({ 1.2, beta }, 1.0, BandwidthUse::variation);
      ++accepted;
    } catch (const Error&) {
    }
  }
  for (double beta : { 0.25, 0.3 }) {
    try {
      validate_bandwidth({ 1.2, beta }, 1.0, BandwidthUse::derivative);
      ++accepted;
    } catch (const Error&) {
    }
  }
  return check("bandwidth validator rejects out-of-range exponents", accepted, 0.0);
}

} // namespace

std::vector<CheckResult> run_selfcheck()
{
  using Fn = CheckResult (*)();
  const std::pair<const char*, Fn> checks[] = {
    { "ellipse", ellipse_round_trip },       { "catalog", catalog_identities },
    { "align", alignment_recovery },         { "bergman", bergman_monomials },
    { "solver", zero_coefficient_identity }, { "injection", exact_injection_identity },
    { "dumps", dump_round_trips },           { "validator", validator_rejects },
  };
  std::vector<CheckResult> out;
  for (const auto& [name, fn] : checks) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({ name, false, std::numeric_limits<double>::quiet_NaN(), 0.0, e.what() });
    }
  }
  return out;
}

} // namespace dgrf
