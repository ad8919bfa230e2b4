#pragma once

#include "dgrf/core.hpp"
#include "dgrf/models.hpp"
#include "dgrf/simulate.hpp"

#include <array>

namespace dgrf {

enum class KernelKind
{
  triweight, // product of (35/32)(1-u^2)^3 on [-1, 1]; C^2, compact
  gaussian   // standard bivariate normal density, summed over |x|_inf <= 5
};

//! Bivariate smoothing kernel with unit mass.
class Kernel
{
public:
  static Kernel triweight() { return Kernel(KernelKind::triweight); }
  static Kernel gaussian() { return Kernel(KernelKind::gaussian); }

  double operator()(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;
  //! Half-width of the square outside which the kernel is treated as zero.
  double support_radius() const { return kind_ == KernelKind::triweight ? 1.0 : 5.0; }
  bool compact() const { return kind_ == KernelKind::triweight; }
  KernelKind kind() const { return kind_; }

private:
  explicit Kernel(KernelKind kind)
    : kind_(kind)
  {}
  KernelKind kind_;
};

Kernel kernel_from_string(const std::string& name);
std::string to_string(KernelKind kind);

//! Increment direction h on the integer lattice (scaled by 1/n when used).
struct Direction
{
  int dx;
  int dy;

  Vec2 vector() const { return { double(dx), double(dy) }; }
  bool operator==(const Direction&) const = default;
};

//! h = 1, i, 1 + i in complex notation.
inline constexpr std::array<Direction, 3> kDirections{ Direction{ 1, 0 }, Direction{ 0, 1 },
                                                       Direction{ 1, 1 } };

//! Y(t) - 2 Y(t + h/n) + Y(t + 2h/n) at lattice indices (i, j).
double second_increment(const FieldSample& Y, int i, int j, Direction h);
double second_increment(const FieldSample& Y, const Vec2& t, Direction h);

//! Kernel-smoothed, n^alpha-normalized squared second increments.
//!
//! Squared increments are computed once per direction; each evaluation is a
//! weighted sum over the lattice points of Omega_n under the kernel support.
class VariationEstimator
{
public:
  VariationEstimator(const FieldSample& Y, double alpha);

  double value(const Vec2& t, Direction h, double b, const Kernel& K) const;
  //! Directional t-derivative along u of `value`.
  double derivative(const Vec2& t, Direction h, double b, const Kernel& K, const Vec2& u) const;
  //! Value together with its t-gradient.
  std::pair<double, Vec2> value_and_gradient(const Vec2& t, Direction h, double b, const Kernel& K) const;

  const Grid& grid() const { return Y_->grid; }
  double alpha() const { return alpha_; }

private:
  int direction_slot(Direction h) const;
  template<class Visit>
  void visit(const Vec2& t, Direction h, double b, const Kernel& K, Visit&& f) const;

  const FieldSample* Y_;
  double alpha_;
  std::array<Eigen::VectorXd, 3> squared_; // NaN where w is outside Omega_n or its stencil
};

double smoothed_variation(const FieldSample& Y, const Vec2& t, Direction h, double b,
                          const Kernel& K, double alpha);
double directional_derivative_B(const FieldSample& Y, const Vec2& t, Direction h, double b,
                                const Kernel& K, const Vec2& u, double alpha);

//! (8 - 2^{alpha+1}) |J_f(t) h|^alpha.
double g_true(const Deformation& f, const Vec2& t, Direction h, double alpha);

//! Exact E[D2 Y(t) D2 Y(s)] as the signed 3x3 sum of covariances.
double increment_covariance_exact(const CovarianceModel& model, const Deformation& f,
                                  const Vec2& t, const Vec2& s, Direction h, int n);

//! Lattice-aligned evaluation points: origin + spacing * (a, b).
struct RegularGrid
{
  Vec2 origin = Vec2::Zero();
  double spacing = 1.0;
  int nx = 0;
  int ny = 0;

  Vec2 point(int a, int b) const { return origin + spacing * Vec2(a, b); }
  Eigen::Index size() const { return Eigen::Index(nx) * ny; }
  Rect bounds() const
  {
    return { origin.x(), origin.y(), origin.x() + spacing * (nx - 1), origin.y() + spacing * (ny - 1) };
  }
};

//! Lattice points of `grid` inside `region` (closed), every `stride` points.
RegularGrid lattice_points_in(const Grid& grid, const Rect& region, int stride = 1);

//! Region of t where the kernel support at bandwidth b lies inside Omega_n.
Rect evaluable_region(const Grid& grid, double b, const Kernel& K);

struct SmoothedVariationField
{
  RegularGrid points;
  std::array<Eigen::MatrixXd, 3> values; // (nx, ny) per direction
  double b = 0.0;
  int n = 0;
  double alpha = 1.0;
};

SmoothedVariationField smoothed_variation_field(const FieldSample& Y, const RegularGrid& points,
                                                double b, const Kernel& K, double alpha);

//! b(n) = C_b n^{-beta'}.
struct BandwidthSchedule
{
  double c_b = 1.2;
  double beta_prime = 0.22;

  double operator()(int n) const;
};

enum class BandwidthUse
{
  variation,  // uniform convergence of B only
  derivative  // also its directional derivatives (reconstruction)
};

//! min(0.8 gamma, 0.22).
double default_beta_prime(double gamma);

//! Rejects schedules outside the convergence conditions:
//! 0 < beta' < 1/3 for variation runs, 0 < beta' < min(1/4, gamma) for derivative runs.
void validate_bandwidth(const BandwidthSchedule& schedule, double gamma, BandwidthUse use);

} // namespace dgrf
