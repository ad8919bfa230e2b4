#pragma once

#include "dgrf/core.hpp"

#include <string>

namespace dgrf {

enum class CovarianceKind
{
  powered_exponential,
  matern
};

//! Small-lag behaviour R(0) - R(t) = sigma_c t^alpha + o(t^{alpha + gamma}).
struct LocalExpansion
{
  double alpha;
  double gamma;
  double sigma_c;
};

//! Isotropic autocovariance R(|t|) of a non-differentiable Gaussian field.
//!
//! Both shipped families are evaluated on a rescaled distance `scale * t`;
//! `normalized()` picks the scale that makes the principal coefficient of
//! t^alpha equal to one.
class CovarianceModel
{
public:
  //! exp(-c t^alpha), 0 < alpha < 2.
  static CovarianceModel powered_exponential(double c, double alpha);
  //! Matern with smoothness 0 < nu < 1, range rho and variance sigma2.
  static CovarianceModel matern(double nu, double range, double variance);

  double operator()(double t) const;
  //! Closed-form fourth derivative d^4 R / dt^4 for t > 0.
  double fourth_derivative(double t) const;

  LocalExpansion local_expansion() const;
  CovarianceModel normalized() const;

  CovarianceKind kind() const { return kind_; }
  double alpha() const;
  double variance() const;
  double distance_scale() const { return scale_; }
  double c() const { return c_; }
  double nu() const { return nu_; }
  double range() const { return range_; }

  std::string describe() const;

private:
  CovarianceModel() = default;

  CovarianceKind kind_ = CovarianceKind::powered_exponential;
  double c_ = 1.0;
  double alpha_ = 1.0;
  double nu_ = 0.5;
  double range_ = 1.0;
  double variance_ = 1.0;
  double scale_ = 1.0;
};

double eval_covariance(const CovarianceModel& model, double t);
LocalExpansion local_expansion(const CovarianceModel& model);

//! Fourth derivative by central differences with Richardson extrapolation.
double fourth_derivative_numeric(const CovarianceModel& model, double t);

enum class DerivativeMethod
{
  closed_form,
  numeric
};

struct R3Report
{
  double c_fit;       // smallest c with |R''''(t)| <= c t^(alpha-4) on the grid
  double tail_growth; // growth of |R''''| t^(4-alpha) across the lowest decade
  bool violated;
};

R3Report check_r3_bound(const CovarianceModel& model,
                        double t_min,
                        double t_max,
                        DerivativeMethod method = DerivativeMethod::closed_form,
                        int points = 81);

enum class DeformationKind
{
  identity,
  affine,
  quadratic,         // z + eps z^2
  modulus_quadratic  // z + eps z zbar
};

enum class SmoothnessClass
{
  c2,
  c3
};

//! First-order jet of a planar map in complex notation.
struct MapJet
{
  Complex value;
  Complex dz;
  Complex dzbar;
};

//! Analytically known orientation-preserving diffeomorphism of the plane,
//! optionally post-composed with a rigid motion z -> e^{i theta} z + shift.
class Deformation
{
public:
  static Deformation identity();
  static Deformation affine(const Mat2& A, const Vec2& shift = Vec2::Zero());
  static Deformation quadratic(Complex eps);
  static Deformation modulus_quadratic(Complex eps);

  Deformation then_rigid(double theta, Complex shift) const;

  Complex operator()(Complex z) const;
  Vec2 operator()(const Vec2& t) const { return to_vec((*this)(to_complex(t))); }

  MapJet jet(Complex z) const;
  Complex dz(Complex z) const { return jet(z).dz; }
  Complex dzbar(Complex z) const { return jet(z).dzbar; }
  Mat2 jacobian(Complex z) const;
  Complex mu(Complex z) const;
  double tau(Complex z) const;
  //! Complex derivatives of the dilatation, d mu and dbar mu.
  Complex dmu(Complex z) const;
  Complex dbar_mu(Complex z) const;

  DeformationKind kind() const { return kind_; }
  SmoothnessClass smoothness() const { return SmoothnessClass::c3; }
  Complex eps() const { return eps_; }
  const Mat2& matrix() const { return A_; }
  double rotation() const { return theta_; }
  Complex translation() const { return post_shift_; }

  std::string describe() const;

private:
  Deformation() = default;

  DeformationKind kind_ = DeformationKind::identity;
  Mat2 A_ = Mat2::Identity();
  Vec2 shift_ = Vec2::Zero();
  Complex eps_{ 0.0, 0.0 };
  double theta_ = 0.0;
  Complex post_shift_{ 0.0, 0.0 };
};

//! Jacobian matrix from the complex derivatives (dz, dzbar).
Mat2 jacobian_from_complex(Complex dz, Complex dzbar);
//! (dz, dzbar) of the linear map with matrix J.
MapJet complex_from_jacobian(const Mat2& J);

struct ValidityReport
{
  bool passed;
  double min_det;
  double c1; // smallest singular value of J over the samples
  double c2; // largest singular value
  double max_abs_mu;
  Vec2 worst_point;
};

ValidityReport deformation_validity(const Deformation& d, const Rect& region, int density = 64);

//! Builds a deformation and rejects it unless it is valid on `region`.
Deformation make_validated(const Deformation& d, const Rect& region, int density = 64);

} // namespace dgrf
