#pragma once

#include "dgrf/core.hpp"
#include "dgrf/qvar.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>

namespace dgrf {

//! a x^2 + b x y + c y^2 = 1.
template<class Scalar>
struct EllipseCoefficients
{
  Scalar a;
  Scalar b;
  Scalar c;

  Scalar discriminant() const { return Scalar(4) * a * c - b * b; }
  bool valid() const { return a > Scalar(0) && c > Scalar(0) && discriminant() > Scalar(0); }
};

//! Normalizing constant 8 - 2^{alpha+1} of the squared second increment.
inline double increment_constant(double alpha)
{
  return 8.0 - std::pow(2.0, alpha + 1.0);
}

//! W = (B / (8 - 2^{alpha+1}))^{1/alpha}.
template<class Scalar>
Scalar directional_scale(Scalar B, double alpha)
{
  using std::pow;
  if (B < Scalar(0))
    throw Error(ErrorCode::domain, "directional scale of a negative variation value");
  return pow(B / Scalar(increment_constant(alpha)), Scalar(1.0 / alpha));
}

template<class Scalar>
EllipseCoefficients<Scalar> ellipse_coefficients(Scalar W1, Scalar W2, Scalar W3)
{
  const Scalar a = W1 * W1;
  const Scalar c = W2 * W2;
  const EllipseCoefficients<Scalar> e{ a, W3 * W3 - a - c, c };
  if (!e.valid())
    throw Error(ErrorCode::degenerate_ellipse,
                "directional scales do not define an ellipse (4ac - b^2 <= 0); "
                "noise too large or bandwidth too small");
  return e;
}

//! W's of a linear map along h = 1, i, 1 + i.
template<class Derived>
auto exact_scales(const Eigen::MatrixBase<Derived>& J)
{
  using Scalar = typename Derived::Scalar;
  using V = Eigen::Matrix<Scalar, 2, 1>;
  return std::array<Scalar, 3>{ (J * V(1, 0)).norm(), (J * V(0, 1)).norm(), (J * V(1, 1)).norm() };
}

template<class Scalar>
struct MuTau
{
  std::complex<Scalar> mu;
  Scalar tau;
};

inline constexpr double kDefaultMuClamp = 1e-3;

//! mu = (a - c + i b) / D, tau = (log D - log 4) / 2, D = sqrt(4ac - b^2) + a + c,
//! with |mu| clamped to 1 - clamp.
template<class Scalar>
MuTau<Scalar> mu_tau_from_ellipse(const EllipseCoefficients<Scalar>& e, double clamp = kDefaultMuClamp)
{
  using std::log;
  using std::sqrt;
  const Scalar D = sqrt(e.discriminant()) + e.a + e.c;
  std::complex<Scalar> mu((e.a - e.c) / D, e.b / D);
  const Scalar r = std::abs(mu);
  const Scalar rmax = Scalar(1.0 - clamp);
  if (r > rmax)
    mu *= rmax / r;
  return { mu, (log(D) - log(Scalar(4))) / Scalar(2) };
}

//! Derivative of mu along a direction, given the derivatives (da, db, dc) of
//! the ellipse coefficients along it.
Complex dmu_from_ellipse(const EllipseCoefficients<double>& e, double da, double db, double dc);

//! Per-point pipeline B -> (mu, tau) and, when gradients of B are given, the
//! x- and y-derivatives of mu. `ok` is false for degenerate inputs.
struct PointDilatation
{
  bool ok = false;
  Complex mu{};
  double tau = 0.0;
  Complex dmu_dx{};
  Complex dmu_dy{};

  //! Wirtinger derivative d mu = (mu_x - i mu_y) / 2.
  Complex dmu() const { return 0.5 * (dmu_dx - Complex(0, 1) * dmu_dy); }
};

PointDilatation dilatation_at(const std::array<double, 3>& B, double alpha,
                              const std::array<Vec2, 3>* gradB = nullptr,
                              double clamp = kDefaultMuClamp);

struct DilatationProvenance
{
  int n = 0;
  double b = 0.0;
  KernelKind kernel = KernelKind::triweight;
  double alpha = 1.0;
  bool exact = false; // catalog values rather than estimates
};

//! Bilinear interpolation of samples on a regular grid; points outside the
//! grid take the value at the nearest point of the grid rectangle.
template<class Derived>
typename Derived::Scalar interpolate_bilinear(const Eigen::MatrixBase<Derived>& v, const RegularGrid& g,
                                              const Vec2& p)
{
  const auto axis = [](double x, int count, int& k, double& f) {
    if (count == 1) {
      k = 0;
      f = 0.0;
      return;
    }
    x = std::clamp(x, 0.0, double(count - 1));
    k = std::min(int(x), count - 2);
    f = x - k;
  };
  int a, b;
  double fa, fb;
  axis((p.x() - g.origin.x()) / g.spacing, g.nx, a, fa);
  axis((p.y() - g.origin.y()) / g.spacing, g.ny, b, fb);
  const int a1 = g.nx > 1 ? a + 1 : a;
  const int b1 = g.ny > 1 ? b + 1 : b;
  return (1 - fa) * (1 - fb) * v(a, b) + fa * (1 - fb) * v(a1, b) + (1 - fa) * fb * v(a, b1) +
         fa * fb * v(a1, b1);
}

//! Estimated (or injected) dilatation on a regular set of points; arrays are (nx, ny).
struct DilatationField
{
  RegularGrid points;
  Eigen::MatrixXcd mu;
  Eigen::MatrixXd tau;
  Eigen::MatrixXcd dmu; // empty unless requested
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> masked;
  DilatationProvenance provenance;

  bool has_dmu() const { return dmu.size() > 0; }
  Complex mu_at(const Vec2& p) const { return interpolate_bilinear(mu, points, p); }
  double tau_at(const Vec2& p) const { return interpolate_bilinear(tau, points, p); }
  Complex dmu_at(const Vec2& p) const { return interpolate_bilinear(dmu, points, p); }
  Rect region() const { return points.bounds(); }
  double masked_fraction() const;
  double sup_mu() const { return mu.size() ? mu.cwiseAbs().maxCoeff() : 0.0; }
};

struct DilatationOptions
{
  double clamp = kDefaultMuClamp;
  double max_masked_fraction = 0.10;
  bool with_dmu = false;
};

//! Replaces masked entries by the mean of valid 8-neighbours, sweeping until
//! every entry is filled.
template<class Derived>
void fill_masked(Eigen::MatrixBase<Derived>& v, const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& masked)
{
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> valid = !masked;
  if (!valid.any())
    return;
  while (!valid.all()) {
    auto next = valid;
    for (Eigen::Index j = 0; j < v.cols(); ++j)
      for (Eigen::Index i = 0; i < v.rows(); ++i) {
        if (valid(i, j))
          continue;
        typename Derived::Scalar sum(0);
        int count = 0;
        for (Eigen::Index dj = -1; dj <= 1; ++dj)
          for (Eigen::Index di = -1; di <= 1; ++di) {
            const Eigen::Index p = i + di, q = j + dj;
            if (p < 0 || q < 0 || p >= v.rows() || q >= v.cols() || !valid(p, q))
              continue;
            sum += v(p, q);
            ++count;
          }
        if (count > 0) {
          v(i, j) = sum / double(count);
          next(i, j) = true;
        }
      }
    valid = next;
  }
}

//! B along the three directions -> ellipse -> (mu, tau) at every point.
//! Degenerate points are masked and filled from neighbours.
DilatationField estimate_dilatation_field(const FieldSample& Y, const RegularGrid& points, double b,
                                          const Kernel& K, double alpha,
                                          const DilatationOptions& options = {});

//! Same pipeline on precomputed variation values.
DilatationField dilatation_from_variation(const SmoothedVariationField& B,
                                          const DilatationOptions& options = {});

//! Directional derivative of mu along u at every point; needs a compact kernel.
struct DirectionalDmu
{
  RegularGrid points;
  Eigen::MatrixXcd values;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> masked;
};

DirectionalDmu estimate_dmu(const FieldSample& Y, const RegularGrid& points, double b, const Kernel& K,
                            double alpha, const Vec2& u, double clamp = kDefaultMuClamp);

//! Catalog mu, tau (and d mu) of a known deformation on `points`.
DilatationField exact_dilatation_field(const Deformation& f, const RegularGrid& points);

} // namespace dgrf
