#include "dgrf/qvar.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dgrf {

namespace {

constexpr double kTriweightNorm = 35.0 / 32.0;

double triweight_1d(double u)
{
  const double s = 1.0 - u * u;
  return s > 0.0 ? kTriweightNorm * s * s * s : 0.0;
}

double triweight_derivative(double u)
{
  const double s = 1.0 - u * u;
  return s > 0.0 ? -6.0 * kTriweightNorm * u * s * s : 0.0;
}

// second-difference filter (d0, d1, d2)
constexpr std::array<double, 3> kFilter{ 1.0, -2.0, 1.0 };

} // namespace

double Kernel::operator()(const Vec2& x) const
{
  if (kind_ == KernelKind::triweight)
    return triweight_1d(x.x()) * triweight_1d(x.y());
  if (std::abs(x.x()) > 5.0 || std::abs(x.y()) > 5.0)
    return 0.0;
  return std::exp(-0.5 * x.squaredNorm()) / (2.0 * kPi);
}

Vec2 Kernel::gradient(const Vec2& x) const
{
  if (kind_ == KernelKind::triweight)
    return Vec2(triweight_derivative(x.x()) * triweight_1d(x.y()), triweight_1d(x.x()) * triweight_derivative(x.y()));
  if (std::abs(x.x()) > 5.0 || std::abs(x.y()) > 5.0)
    return Vec2::Zero();
  return -x * (std::exp(-0.5 * x.squaredNorm()) / (2.0 * kPi));
}

Kernel kernel_from_string(const std::string& name)
{
  if (name == "triweight")
    return Kernel::triweight();
  if (name == "gaussian")
    return Kernel::gaussian();
  throw Error(ErrorCode::config, "unknown kernel '" + name + "'");
}

std::string to_string(KernelKind kind)
{
  return kind == KernelKind::triweight ? "triweight" : "gaussian";
}

double second_increment(const FieldSample& Y, int i, int j, Direction h)
{
  const Grid& g = Y.grid;
  if (!g.contains(i, j) || !g.contains(i + 2 * h.dx, j + 2 * h.dy)) {
    std::ostringstream os;
    os << "second increment at lattice (" << i << ", " << j << ") along (" << h.dx << ", " << h.dy
       << ") leaves the sampled grid";
    throw Error(ErrorCode::out_of_grid, os.str());
  }
  return Y.at(i, j) - 2.0 * Y.at(i + h.dx, j + h.dy) + Y.at(i + 2 * h.dx, j + 2 * h.dy);
}

double second_increment(const FieldSample& Y, const Vec2& t, Direction h)
{
  const auto ij = Y.grid.lattice_index(t);
  if (!ij)
    throw Error(ErrorCode::out_of_grid, "point is not on the observation lattice");
  return second_increment(Y, ij->first, ij->second, h);
}

// ---------------------------------------------------------------------------

VariationEstimator::VariationEstimator(const FieldSample& Y, double alpha)
  : Y_(&Y)
  , alpha_(alpha)
{
  if (!(alpha > 0.0 && alpha < 2.0))
    throw Error(ErrorCode::domain, "alpha must lie in (0, 2)");
  const Grid& g = Y.grid;
  const double scale = std::pow(double(g.n()), alpha);
  for (int slot = 0; slot < 3; ++slot) {
    const Direction h = kDirections[slot];
    Eigen::VectorXd& sq = squared_[slot];
    sq.setConstant(g.size(), std::numeric_limits<double>::quiet_NaN());
    for (int j = g.j_first(); j <= g.j_interior_last(); ++j)
      for (int i = g.i_first(); i <= g.i_interior_last(); ++i) {
        if (!g.contains(i + 2 * h.dx, j + 2 * h.dy))
          continue;
        const double d = Y.at(i, j) - 2.0 * Y.at(i + h.dx, j + h.dy) + Y.at(i + 2 * h.dx, j + 2 * h.dy);
        sq[g.index(i, j)] = d * d * scale;
      }
  }
}

int VariationEstimator::direction_slot(Direction h) const
{
  for (int s = 0; s < 3; ++s)
    if (kDirections[s] == h)
      return s;
  throw Error(ErrorCode::domain, "increment direction must be (1,0), (0,1) or (1,1)");
}

template<class Visit>
void VariationEstimator::visit(const Vec2& t, Direction h, double b, const Kernel& K, Visit&& f) const
{
  if (!(b > 0.0))
    throw Error(ErrorCode::domain, "bandwidth must be positive");
  const Grid& g = Y_->grid;
  const Eigen::VectorXd& sq = squared_[direction_slot(h)];
  const double n = g.n();
  const double r = K.support_radius() * b;
  const int i0 = int(std::ceil((t.x() - r) * n));
  const int i1 = int(std::floor((t.x() + r) * n));
  const int j0 = int(std::ceil((t.y() - r) * n));
  const int j1 = int(std::floor((t.y() + r) * n));
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Vec2 x = (g.point(i, j) - t) / b;
      const double w = K(x);
      const bool inside = g.interior(i, j) && !std::isnan(sq[g.index(i, j)]);
      if (!inside) {
        if (w != 0.0 || K.gradient(x).squaredNorm() != 0.0) {
          std::ostringstream os;
          os << "kernel support at t = (" << t.x() << ", " << t.y() << "), b = " << b
             << " reaches lattice point (" << i << ", " << j << ") outside the usable grid";
          throw Error(ErrorCode::support_clipped, os.str());
        }
        continue;
      }
      f(x, sq[g.index(i, j)]);
    }
  }
}

double VariationEstimator::value(const Vec2& t, Direction h, double b, const Kernel& K) const
{
  double sum = 0.0;
  visit(t, h, b, K, [&](const Vec2& x, double s) { sum += K(x) * s; });
  const double n = Y_->grid.n();
  return sum / (n * n * b * b);
}

double VariationEstimator::derivative(const Vec2& t, Direction h, double b, const Kernel& K,
                                      const Vec2& u) const
{
  double sum = 0.0;
  visit(t, h, b, K, [&](const Vec2& x, double s) { sum += u.dot(K.gradient(x)) * s; });
  const double n = Y_->grid.n();
  return -sum / (n * n * b * b * b);
}

std::pair<double, Vec2> VariationEstimator::value_and_gradient(const Vec2& t, Direction h, double b,
                                                               const Kernel& K) const
{
  double sum = 0.0;
  Vec2 grad = Vec2::Zero();
  visit(t, h, b, K, [&](const Vec2& x, double s) {
    sum += K(x) * s;
    grad += K.gradient(x) * s;
  });
  const double n = Y_->grid.n();
  const double norm = n * n * b * b;
  return { sum / norm, -grad / (norm * b) };
}

double smoothed_variation(const FieldSample& Y, const Vec2& t, Direction h, double b,
                          const Kernel& K, double alpha)
{
  return VariationEstimator(Y, alpha).value(t, h, b, K);
}

double directional_derivative_B(const FieldSample& Y, const Vec2& t, Direction h, double b,
                                const Kernel& K, const Vec2& u, double alpha)
{
  return VariationEstimator(Y, alpha).derivative(t, h, b, K, u);
}

double g_true(const Deformation& f, const Vec2& t, Direction h, double alpha)
{
  const Vec2 v = f.jacobian(to_complex(t)) * h.vector();
  return (8.0 - std::pow(2.0, alpha + 1.0)) * std::pow(v.norm(), alpha);
}

double increment_covariance_exact(const CovarianceModel& model, const Deformation& f,
                                  const Vec2& t, const Vec2& s, Direction h, int n)
{
  const Vec2 step = h.vector() / double(n);
  std::array<Vec2, 3> ft, fs;
  for (int k = 0; k < 3; ++k) {
    ft[k] = f(Vec2(t + k * step));
    fs[k] = f(Vec2(s + k * step));
  }
  double sum = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 3; ++c)
      sum += kFilter[a] * kFilter[c] * model((ft[a] - fs[c]).norm());
  return sum;
}

RegularGrid lattice_points_in(const Grid& grid, const Rect& region, int stride)
{
  if (stride < 1)
    stride = 1;
  const double n = grid.n();
  const int i0 = int(std::ceil(region.x0 * n - 1e-9));
  const int i1 = int(std::floor(region.x1 * n + 1e-9));
  const int j0 = int(std::ceil(region.y0 * n - 1e-9));
  const int j1 = int(std::floor(region.y1 * n + 1e-9));
  RegularGrid out;
  out.origin = grid.point(i0, j0);
  out.spacing = stride / n;
  out.nx = i1 >= i0 ? (i1 - i0) / stride + 1 : 0;
  out.ny = j1 >= j0 ? (j1 - j0) / stride + 1 : 0;
  return out;
}

Rect evaluable_region(const Grid& grid, double b, const Kernel& K)
{
  const double n = grid.n();
  const double r = K.support_radius() * b;
  return { (grid.i_first() - 1) / n + r, (grid.j_first() - 1) / n + r,
           (grid.i_interior_last() + 1) / n - r, (grid.j_interior_last() + 1) / n - r };
}

SmoothedVariationField smoothed_variation_field(const FieldSample& Y, const RegularGrid& points,
                                                double b, const Kernel& K, double alpha)
{
  VariationEstimator est(Y, alpha);
  SmoothedVariationField out;
  out.points = points;
  out.b = b;
  out.n = Y.grid.n();
  out.alpha = alpha;
  for (int s = 0; s < 3; ++s) {
    out.values[s].resize(points.nx, points.ny);
    for (int bb = 0; bb < points.ny; ++bb)
      for (int a = 0; a < points.nx; ++a)
        out.values[s](a, bb) = est.value(points.point(a, bb), kDirections[s], b, K);
  }
  return out;
}

double BandwidthSchedule::operator()(int n) const
{
  return c_b * std::pow(double(n), -beta_prime);
}

double default_beta_prime(double gamma)
{
  return std::min(0.8 * gamma, 0.22);
}

void validate_bandwidth(const BandwidthSchedule& schedule, double gamma, BandwidthUse use)
{
  std::ostringstream os;
  if (!(schedule.c_b > 0.0)) {
    os << "bandwidth constant C_b = " << schedule.c_b << " must be positive";
    throw Error(ErrorCode::config, os.str());
  }
  if (!(schedule.beta_prime > 0.0)) {
    os << "bandwidth exponent beta' = " << schedule.beta_prime << " must be positive (b -> 0)";
    throw Error(ErrorCode::config, os.str());
  }
  if (use == BandwidthUse::variation) {
    // n^-1 b^-3 = O(n^-beta) with beta = 1 - 3 beta' > 0
    if (!(schedule.beta_prime < 1.0 / 3.0)) {
      os << "beta' = " << schedule.beta_prime << " violates beta' < 1/3 (n^-1 b^-3 -> 0)";
      throw Error(ErrorCode::config, os.str());
    }
    return;
  }
  // n^-1 b^-4 = O(n^-beta), beta = 1 - 4 beta' > max(0, 1 - 4 gamma)
  const double limit = std::min(0.25, gamma);
  if (!(schedule.beta_prime < limit)) {
    os << "beta' = " << schedule.beta_prime << " violates beta' < min(1/4, gamma) = " << limit;
    throw Error(ErrorCode::config, os.str());
  }
}

} // namespace dgrf
