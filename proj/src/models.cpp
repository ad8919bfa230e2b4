#include "dgrf/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace dgrf {

namespace {

// x^mu K_|mu|(x); the Matern building block psi_mu.
double psi(double mu, double x)
{
  return std::pow(x, mu) * std::cyl_bessel_k(std::abs(mu), x);
}

// Remainder exponent shipped for a provable range (0, sup): a fixed
// step inside the supremum.
double shipped_gamma(double sup)
{
  return sup - std::min(0.1, 0.1 * sup);
}

} // namespace

CovarianceModel CovarianceModel::powered_exponential(double c, double alpha)
{
  if (!(c > 0.0))
    throw Error(ErrorCode::domain, "powered-exponential scale c must be positive");
  if (!(alpha > 0.0 && alpha < 2.0))
    throw Error(ErrorCode::domain, "powered-exponential exponent alpha must lie in (0, 2)");
  CovarianceModel m;
  m.kind_ = CovarianceKind::powered_exponential;
  m.c_ = c;
  m.alpha_ = alpha;
  return m;
}

CovarianceModel CovarianceModel::matern(double nu, double range, double variance)
{
  if (!(nu > 0.0))
    throw Error(ErrorCode::domain, "Matern smoothness nu must be positive");
  if (nu >= 1.0)
    throw Error(ErrorCode::domain,
                "Matern smoothness nu >= 1 is unsupported (alpha = 2 nu must stay below 2)");
  if (!(range > 0.0) || !(variance > 0.0))
    throw Error(ErrorCode::domain, "Matern range and variance must be positive");
  CovarianceModel m;
  m.kind_ = CovarianceKind::matern;
  m.nu_ = nu;
  m.range_ = range;
  m.variance_ = variance;
  return m;
}

double CovarianceModel::alpha() const
{
  return kind_ == CovarianceKind::matern ? 2.0 * nu_ : alpha_;
}

double CovarianceModel::variance() const
{
  return kind_ == CovarianceKind::matern ? variance_ : 1.0;
}

double CovarianceModel::operator()(double t) const
{
  if (!(t >= 0.0))
    throw Error(ErrorCode::domain, "covariance lag must be nonnegative");
  const double x = scale_ * t;
  if (kind_ == CovarianceKind::powered_exponential)
    return std::exp(-c_ * std::pow(x, alpha_));

  const double u = x / range_;
  if (u == 0.0)
    return variance_;
  if (u > 700.0)
    return 0.0;
  const double norm = std::pow(2.0, 1.0 - nu_) / std::tgamma(nu_);
  if (u < 1e-8) {
    // two-term small-lag expansion; the Bessel routine loses digits here
    const double coef = std::tgamma(1.0 - nu_) / (std::tgamma(1.0 + nu_) * std::pow(4.0, nu_));
    return variance_ * (1.0 - coef * std::pow(u, 2.0 * nu_));
  }
  return variance_ * norm * psi(nu_, u);
}

double CovarianceModel::fourth_derivative(double t) const
{
  if (!(t > 0.0))
    throw Error(ErrorCode::domain, "fourth derivative requires t > 0");
  if (kind_ == CovarianceKind::powered_exponential) {
    const double x = scale_ * t;
    const double a = alpha_;
    const double u1 = -c_ * a * std::pow(x, a - 1.0);
    const double u2 = -c_ * a * (a - 1.0) * std::pow(x, a - 2.0);
    const double u3 = -c_ * a * (a - 1.0) * (a - 2.0) * std::pow(x, a - 3.0);
    const double u4 = -c_ * a * (a - 1.0) * (a - 2.0) * (a - 3.0) * std::pow(x, a - 4.0);
    const double phi = std::exp(-c_ * std::pow(x, a));
    const double d4 = phi * (std::pow(u1, 4) + 6.0 * u1 * u1 * u2 + 3.0 * u2 * u2 +
                             4.0 * u1 * u3 + u4);
    return std::pow(scale_, 4) * d4;
  }
  // D psi_mu = -x psi_{mu-1}, iterated four times.
  const double x = scale_ * t / range_;
  const double norm = std::pow(2.0, 1.0 - nu_) / std::tgamma(nu_);
  const double d4 = 3.0 * psi(nu_ - 2.0, x) - 6.0 * x * x * psi(nu_ - 3.0, x) +
                    std::pow(x, 4) * psi(nu_ - 4.0, x);
  return variance_ * norm * std::pow(scale_ / range_, 4) * d4;
}

LocalExpansion CovarianceModel::local_expansion() const
{
  if (kind_ == CovarianceKind::powered_exponential) {
    // exp(-c x^a) = 1 - c x^a + O(x^{2a}): remainder exponent sup is a.
    return { alpha_, shipped_gamma(alpha_), c_ * std::pow(scale_, alpha_) };
  }
  // Matern, 0 < nu < 1: 1 - kappa u^{2nu} + O(u^2).
  const double a = 2.0 * nu_;
  const double kappa = std::tgamma(1.0 - nu_) / (std::tgamma(1.0 + nu_) * std::pow(4.0, nu_));
  const double sigma_c = variance_ * kappa * std::pow(scale_ / range_, a);
  return { a, shipped_gamma(2.0 - a), sigma_c };
}

CovarianceModel CovarianceModel::normalized() const
{
  CovarianceModel m = *this;
  const LocalExpansion e = local_expansion();
  m.scale_ = scale_ * std::pow(e.sigma_c, -1.0 / e.alpha);
  return m;
}

std::string CovarianceModel::describe() const
{
  std::ostringstream os;
  if (kind_ == CovarianceKind::powered_exponential)
    os << "powered_exponential(c=" << c_ << ", alpha=" << alpha_ << ")";
  else
    os << "matern(nu=" << nu_ << ", range=" << range_ << ", variance=" << variance_ << ")";
  if (scale_ != 1.0)
    os << " distance_scale=" << scale_;
  return os.str();
}

double eval_covariance(const CovarianceModel& model, double t)
{
  return model(t);
}

LocalExpansion local_expansion(const CovarianceModel& model)
{
  return model.local_expansion();
}

double fourth_derivative_numeric(const CovarianceModel& model, double t)
{
  if (!(t > 0.0))
    throw Error(ErrorCode::domain, "fourth derivative requires t > 0");
  const double h = 0.05 * t;
  if (!(h > 1e-70) || !std::isfinite(h))
    throw Error(ErrorCode::numerical, "finite-difference step underflow at t = " + std::to_string(t));
  auto d4 = [&](double s) {
    return (model(t - 2 * s) - 4 * model(t - s) + 6 * model(t) - 4 * model(t + s) +
            model(t + 2 * s)) /
           std::pow(s, 4);
  };
  const double coarse = d4(h);
  const double fine = d4(0.5 * h);
  const double value = (4.0 * fine - coarse) / 3.0;
  if (!std::isfinite(value))
    throw Error(ErrorCode::numerical, "non-finite fourth difference at t = " + std::to_string(t));
  return value;
}

R3Report check_r3_bound(const CovarianceModel& model,
                        double t_min,
                        double t_max,
                        DerivativeMethod method,
                        int points)
{
  if (!(t_min > 0.0) || !(t_max > t_min))
    throw Error(ErrorCode::domain, "check_r3_bound requires 0 < t_min < t_max");
  if (points < 4)
    throw Error(ErrorCode::domain, "check_r3_bound needs at least 4 grid points");

  const double alpha = model.alpha();
  std::vector<double> ts(points), ratio(points);
  bool finite = true;
  const double step = std::log(t_max / t_min) / (points - 1);
  for (int k = 0; k < points; ++k) {
    ts[k] = t_min * std::exp(step * k);
    const double d4 = method == DerivativeMethod::closed_form ? model.fourth_derivative(ts[k])
                                                              : fourth_derivative_numeric(model, ts[k]);
    ratio[k] = std::abs(d4) * std::pow(ts[k], 4.0 - alpha);
    finite = finite && std::isfinite(ratio[k]);
  }

  R3Report report{};
  report.c_fit = *std::max_element(ratio.begin(), ratio.end());

  // least-squares slope of log ratio against log t over the lowest decade
  const double t_top = std::min(10.0 * t_min, t_max);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int k = 0; k < points && ts[k] <= t_top * (1 + 1e-12); ++k) {
    const double x = std::log(ts[k]);
    const double y = std::log(std::max(ratio[k], std::numeric_limits<double>::min()));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  double slope = 0.0;
  if (m >= 2)
    slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  report.tail_growth = std::pow(10.0, -slope);
  report.violated = !finite || report.tail_growth > std::pow(10.0, 0.05);
  return report;
}

// ---------------------------------------------------------------------------

Mat2 jacobian_from_complex(Complex dz, Complex dzbar)
{
  const Complex fx = dz + dzbar;
  const Complex fy = Complex(0, 1) * (dz - dzbar);
  Mat2 J;
  J << fx.real(), fy.real(), fx.imag(), fy.imag();
  return J;
}

MapJet complex_from_jacobian(const Mat2& J)
{
  const Complex fx(J(0, 0), J(1, 0));
  const Complex fy(J(0, 1), J(1, 1));
  const Complex i(0, 1);
  return { Complex(0, 0), 0.5 * (fx - i * fy), 0.5 * (fx + i * fy) };
}

Deformation Deformation::identity()
{
  return Deformation();
}

Deformation Deformation::affine(const Mat2& A, const Vec2& shift)
{
  if (!(A.determinant() > 0.0))
    throw Error(ErrorCode::domain, "affine deformation requires det A > 0");
  Deformation d;
  d.kind_ = DeformationKind::affine;
  d.A_ = A;
  d.shift_ = shift;
  return d;
}

Deformation Deformation::quadratic(Complex eps)
{
  Deformation d;
  d.kind_ = DeformationKind::quadratic;
  d.eps_ = eps;
  return d;
}

Deformation Deformation::modulus_quadratic(Complex eps)
{
  Deformation d;
  d.kind_ = DeformationKind::modulus_quadratic;
  d.eps_ = eps;
  return d;
}

Deformation Deformation::then_rigid(double theta, Complex shift) const
{
  Deformation d = *this;
  const Complex rot = std::polar(1.0, theta);
  d.theta_ = theta_ + theta;
  d.post_shift_ = rot * post_shift_ + shift;
  return d;
}

MapJet Deformation::jet(Complex z) const
{
  MapJet j{};
  switch (kind_) {
    case DeformationKind::identity:
      j = { z, 1.0, 0.0 };
      break;
    case DeformationKind::affine: {
      const Vec2 v = A_ * to_vec(z) + shift_;
      j = complex_from_jacobian(A_);
      j.value = to_complex(v);
      break;
    }
    case DeformationKind::quadratic:
      j = { z + eps_ * z * z, 1.0 + 2.0 * eps_ * z, 0.0 };
      break;
    case DeformationKind::modulus_quadratic:
      j = { z + eps_ * z * std::conj(z), 1.0 + eps_ * std::conj(z), eps_ * z };
      break;
  }
  if (theta_ != 0.0 || post_shift_ != Complex(0, 0)) {
    const Complex rot = std::polar(1.0, theta_);
    j.value = rot * j.value + post_shift_;
    j.dz *= rot;
    j.dzbar *= rot;
  }
  return j;
}

Complex Deformation::operator()(Complex z) const
{
  return jet(z).value;
}

Mat2 Deformation::jacobian(Complex z) const
{
  const MapJet j = jet(z);
  return jacobian_from_complex(j.dz, j.dzbar);
}

Complex Deformation::mu(Complex z) const
{
  const MapJet j = jet(z);
  return j.dzbar / j.dz;
}

double Deformation::tau(Complex z) const
{
  return std::log(std::abs(jet(z).dz));
}

Complex Deformation::dmu(Complex z) const
{
  if (kind_ != DeformationKind::modulus_quadratic)
    return 0.0;
  return eps_ / (1.0 + eps_ * std::conj(z));
}

Complex Deformation::dbar_mu(Complex z) const
{
  if (kind_ != DeformationKind::modulus_quadratic)
    return 0.0;
  const Complex q = 1.0 + eps_ * std::conj(z);
  return -eps_ * eps_ * z / (q * q);
}

std::string Deformation::describe() const
{
  std::ostringstream os;
  switch (kind_) {
    case DeformationKind::identity: os << "identity"; break;
    case DeformationKind::affine:
      os << "affine(A=[" << A_(0, 0) << " " << A_(0, 1) << "; " << A_(1, 0) << " " << A_(1, 1)
         << "], shift=(" << shift_.x() << "," << shift_.y() << "))";
      break;
    case DeformationKind::quadratic: os << "quadratic(eps=" << eps_ << ")"; break;
    case DeformationKind::modulus_quadratic: os << "modulus_quadratic(eps=" << eps_ << ")"; break;
  }
  if (theta_ != 0.0 || post_shift_ != Complex(0, 0))
    os << " then rigid(theta=" << theta_ << ", shift=" << post_shift_ << ")";
  return os.str();
}

ValidityReport deformation_validity(const Deformation& d, const Rect& region, int density)
{
  if (density < 2)
    density = 2;
  ValidityReport r{ true, std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity(), 0.0, 0.0, Vec2::Zero() };
  for (int j = 0; j < density; ++j) {
    for (int i = 0; i < density; ++i) {
      const Vec2 p(region.x0 + region.width() * i / (density - 1),
                   region.y0 + region.height() * j / (density - 1));
      const MapJet jet = d.jet(to_complex(p));
      const double a = std::abs(jet.dz);
      const double b = std::abs(jet.dzbar);
      const double det = a * a - b * b;
      if (det < r.min_det) {
        r.min_det = det;
        r.worst_point = p;
      }
      r.c1 = std::min(r.c1, std::abs(a - b));
      r.c2 = std::max(r.c2, a + b);
      r.max_abs_mu = std::max(r.max_abs_mu, a > 0 ? b / a : std::numeric_limits<double>::infinity());
    }
  }
  r.passed = r.min_det > 0.0 && r.max_abs_mu < 1.0;

  if (d.kind() == DeformationKind::quadratic) {
    // z + eps z^2 is univalent where |2 eps z| < 1; sup |z| sits at a corner.
    const Vec2 corners[4] = { { region.x0, region.y0 }, { region.x1, region.y0 },
                              { region.x0, region.y1 }, { region.x1, region.y1 } };
    for (const Vec2& c : corners) {
      if (2.0 * std::abs(d.eps()) * c.norm() >= 1.0) {
        r.passed = false;
        r.worst_point = c;
      }
    }
  }
  return r;
}

Deformation make_validated(const Deformation& d, const Rect& region, int density)
{
  const ValidityReport r = deformation_validity(d, region, density);
  if (!r.passed) {
    std::ostringstream os;
    os << d.describe() << " is not a valid deformation on the region; failing point ("
       << r.worst_point.x() << ", " << r.worst_point.y() << "), min det J = " << r.min_det
       << ", max |mu| = " << r.max_abs_mu;
    throw Error(ErrorCode::domain, os.str());
  }
  return d;
}

} // namespace dgrf
