#include "dgrf/dilatation.hpp"

#include <sstream>

namespace dgrf {

Complex dmu_from_ellipse(const EllipseCoefficients<double>& e, double da, double db, double dc)
{
  const double s = std::sqrt(e.discriminant());
  const double D = s + e.a + e.c;
  const double dD = (4.0 * (da * e.c + e.a * dc) - 2.0 * e.b * db) / (2.0 * s) + da + dc;
  const Complex num(e.a - e.c, e.b);
  const Complex dnum(da - dc, db);
  return (dnum * D - num * dD) / (D * D);
}

PointDilatation dilatation_at(const std::array<double, 3>& B, double alpha,
                              const std::array<Vec2, 3>* gradB, double clamp)
{
  PointDilatation out;
  for (double v : B)
    if (!(v > 0.0) || !std::isfinite(v))
      return out;
  std::array<double, 3> W2;
  for (int k = 0; k < 3; ++k) {
    const double W = directional_scale(B[k], alpha);
    W2[k] = W * W;
  }
  const EllipseCoefficients<double> e{ W2[0], W2[2] - W2[0] - W2[1], W2[1] };
  if (!e.valid())
    return out;
  const MuTau<double> mt = mu_tau_from_ellipse(e, clamp);
  out.ok = true;
  out.mu = mt.mu;
  out.tau = mt.tau;
  if (gradB) {
    // (W^2)' = (2/alpha) W^2 B'/B
    for (int axis = 0; axis < 2; ++axis) {
      std::array<double, 3> d;
      for (int k = 0; k < 3; ++k)
        d[k] = (2.0 / alpha) * W2[k] * (*gradB)[k][axis] / B[k];
      const Complex dm = dmu_from_ellipse(e, d[0], d[2] - d[0] - d[1], d[1]);
      (axis == 0 ? out.dmu_dx : out.dmu_dy) = dm;
    }
  }
  return out;
}

double DilatationField::masked_fraction() const
{
  if (masked.size() == 0)
    return 0.0;
  return double(masked.count()) / double(masked.size());
}

namespace {

void check_masked(const DilatationField& f, double limit)
{
  const double frac = f.masked_fraction();
  if (frac > limit) {
    std::ostringstream os;
    os << int(std::round(100 * frac)) << "% of the evaluation points give degenerate ellipses (limit "
       << int(std::round(100 * limit)) << "%); increase the bandwidth";
    throw Error(ErrorCode::degenerate_field, os.str());
  }
}

template<class Eval>
DilatationField assemble(const RegularGrid& points, const DilatationOptions& options, Eval&& eval)
{
  DilatationField out;
  out.points = points;
  out.mu.setZero(points.nx, points.ny);
  out.tau.setZero(points.nx, points.ny);
  if (options.with_dmu)
    out.dmu.setZero(points.nx, points.ny);
  out.masked.setConstant(points.nx, points.ny, false);
  for (int j = 0; j < points.ny; ++j)
    for (int i = 0; i < points.nx; ++i) {
      const PointDilatation p = eval(points.point(i, j));
      if (!p.ok) {
        out.masked(i, j) = true;
        continue;
      }
      out.mu(i, j) = p.mu;
      out.tau(i, j) = p.tau;
      if (options.with_dmu)
        out.dmu(i, j) = p.dmu();
    }
  check_masked(out, options.max_masked_fraction);
  fill_masked(out.mu, out.masked);
  fill_masked(out.tau, out.masked);
  if (options.with_dmu)
    fill_masked(out.dmu, out.masked);
  return out;
}

} // namespace

DilatationField estimate_dilatation_field(const FieldSample& Y, const RegularGrid& points, double b,
                                          const Kernel& K, double alpha, const DilatationOptions& options)
{
  if (options.with_dmu && !K.compact())
    throw Error(ErrorCode::domain, "derivative estimation needs a compactly supported kernel");
  const VariationEstimator est(Y, alpha);
  DilatationField out = assemble(points, options, [&](const Vec2& t) {
    std::array<double, 3> B;
    std::array<Vec2, 3> G;
    for (int k = 0; k < 3; ++k) {
      if (options.with_dmu) {
        auto [v, g] = est.value_and_gradient(t, kDirections[k], b, K);
        B[k] = v;
        G[k] = g;
      } else {
        B[k] = est.value(t, kDirections[k], b, K);
      }
    }
    return dilatation_at(B, alpha, options.with_dmu ? &G : nullptr, options.clamp);
  });
  out.provenance = { Y.grid.n(), b, K.kind(), alpha, false };
  return out;
}

DilatationField dilatation_from_variation(const SmoothedVariationField& B, const DilatationOptions& options)
{
  DilatationOptions opt = options;
  opt.with_dmu = false;
  const RegularGrid& g = B.points;
  DilatationField out = assemble(g, opt, [&](const Vec2& t) {
    const int i = int(std::lround((t.x() - g.origin.x()) / g.spacing));
    const int j = int(std::lround((t.y() - g.origin.y()) / g.spacing));
    return dilatation_at({ B.values[0](i, j), B.values[1](i, j), B.values[2](i, j) }, B.alpha, nullptr,
                         opt.clamp);
  });
  out.provenance = { B.n, B.b, KernelKind::triweight, B.alpha, false };
  return out;
}

DirectionalDmu estimate_dmu(const FieldSample& Y, const RegularGrid& points, double b, const Kernel& K,
                            double alpha, const Vec2& u, double clamp)
{
  if (!K.compact())
    throw Error(ErrorCode::domain, "derivative estimation needs a compactly supported kernel");
  const VariationEstimator est(Y, alpha);
  DirectionalDmu out;
  out.points = points;
  out.values.setZero(points.nx, points.ny);
  out.masked.setConstant(points.nx, points.ny, false);
  for (int j = 0; j < points.ny; ++j)
    for (int i = 0; i < points.nx; ++i) {
      const Vec2 t = points.point(i, j);
      std::array<double, 3> B;
      std::array<Vec2, 3> G;
      for (int k = 0; k < 3; ++k) {
        auto [v, g] = est.value_and_gradient(t, kDirections[k], b, K);
        B[k] = v;
        G[k] = g;
      }
      const PointDilatation p = dilatation_at(B, alpha, &G, clamp);
      if (!p.ok)
        out.masked(i, j) = true;
      else
        out.values(i, j) = u.x() * p.dmu_dx + u.y() * p.dmu_dy;
    }
  return out;
}

DilatationField exact_dilatation_field(const Deformation& f, const RegularGrid& points)
{
  DilatationField out;
  out.points = points;
  out.mu.resize(points.nx, points.ny);
  out.tau.resize(points.nx, points.ny);
  out.dmu.resize(points.nx, points.ny);
  out.masked.setConstant(points.nx, points.ny, false);
  for (int j = 0; j < points.ny; ++j)
    for (int i = 0; i < points.nx; ++i) {
      const Complex z = to_complex(points.point(i, j));
      out.mu(i, j) = f.mu(z);
      out.tau(i, j) = f.tau(z);
      out.dmu(i, j) = f.dmu(z);
    }
  out.provenance.exact = true;
  return out;
}

} // namespace dgrf
