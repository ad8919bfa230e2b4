#include "dgrf/bergman.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace dgrf {

GaussLegendre gauss_legendre(int count)
{
  if (count < 1)
    throw Error(ErrorCode::domain, "Gauss-Legendre rule needs at least one node");
  GaussLegendre gl{ Eigen::VectorXd(count), Eigen::VectorXd(count) };
  if (count == 1) {
    gl.nodes[0] = 0.0;
    gl.weights[0] = 2.0;
    return gl;
  }
  // P_n(x) and P_n'(x) by the three-term recurrence
  const auto legendre = [count](double x) {
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= count; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::make_pair(p1, count * (x * p1 - p0) / (x * x - 1.0));
  };
  for (int i = 0; i < (count + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (count + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    const double dp = legendre(x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[i] = -x;
    gl.nodes[count - 1 - i] = x;
    gl.weights[i] = w;
    gl.weights[count - 1 - i] = w;
  }
  if (count % 2 == 1)
    gl.nodes[count / 2] = 0.0;
  return gl;
}

DiskQuadrature::DiskQuadrature(int q_r, int q_theta)
  : q_r_(q_r)
  , q_theta_(q_theta)
{
  if (q_r < 1 || q_theta < 1)
    throw Error(ErrorCode::domain, "disk quadrature needs positive node counts");
  const GaussLegendre gl = gauss_legendre(q_r);
  nodes_.resize(Eigen::Index(q_r) * q_theta);
  weights_.resize(nodes_.size());
  const double dtheta = 2.0 * kPi / q_theta;
  for (int i = 0; i < q_r; ++i) {
    const double r = 0.5 * (gl.nodes[i] + 1.0);
    const double wr = 0.5 * gl.weights[i] * r;
    for (int j = 0; j < q_theta; ++j) {
      const Eigen::Index k = Eigen::Index(i) * q_theta + j;
      nodes_[k] = std::polar(r, j * dtheta);
      weights_[k] = wr * dtheta;
    }
  }
}

Complex HolomorphicPoly::operator()(Complex w) const
{
  Complex s(0.0, 0.0);
  for (Eigen::Index k = c_.size() - 1; k >= 0; --k)
    s = s * w + c_[k];
  return s;
}

HolomorphicPoly HolomorphicPoly::derivative() const
{
  if (c_.size() <= 1)
    return HolomorphicPoly(Eigen::VectorXcd::Zero(1));
  Eigen::VectorXcd d(c_.size() - 1);
  for (Eigen::Index k = 1; k < c_.size(); ++k)
    d[k - 1] = double(k) * c_[k];
  return HolomorphicPoly(std::move(d));
}

HolomorphicPoly bergman_project(const Eigen::VectorXd& values, double u0, int N, const DiskQuadrature& quad)
{
  if (N < 0)
    throw Error(ErrorCode::domain, "projection degree must be nonnegative");
  if (values.size() != quad.size())
    throw Error(ErrorCode::domain, "sample count does not match the quadrature");
  if (!values.allFinite() || !std::isfinite(u0))
    throw Error(ErrorCode::domain, "non-finite values passed to the Bergman projection");
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(N + 1);
  const Eigen::VectorXcd& z = quad.nodes();
  const Eigen::VectorXd& w = quad.weights();
  for (Eigen::Index q = 0; q < z.size(); ++q) {
    const Complex zb = std::conj(z[q]);
    Complex p = values[q] * w[q];
    for (int k = 0; k <= N; ++k) {
      c[k] += p;
      p *= zb;
    }
  }
  for (int k = 0; k <= N; ++k)
    c[k] *= 2.0 * (k + 1) / kPi;
  c[0] -= u0;
  return HolomorphicPoly(std::move(c));
}

HolomorphicPoly bergman_project(const std::function<double(Complex)>& u, int N, const DiskQuadrature& quad,
                                double r_data)
{
  Eigen::VectorXd values(quad.size());
  for (Eigen::Index q = 0; q < quad.size(); ++q) {
    Complex z = quad.nodes()[q];
    const double r = std::abs(z);
    if (r > r_data)
      z *= r_data / r;
    values[q] = u(z);
  }
  return bergman_project(values, u(Complex(0.0, 0.0)), N, quad);
}

double project_real_part_identity_check(const HolomorphicPoly& F, const DiskQuadrature& quad)
{
  const auto re = [&](Complex z) { return F(z).real(); };
  const HolomorphicPoly P = bergman_project(re, F.degree(), quad);
  Eigen::VectorXcd expected = F.coeffs();
  expected[0] -= Complex(0.0, F.coeffs()[0].imag());
  return (P.coeffs() - expected).cwiseAbs().maxCoeff();
}

Complex integrate_exp_along_segment(const HolomorphicPoly& p, Complex w, int q_seg)
{
  static std::mutex m;
  static std::map<int, GaussLegendre> cache;
  const GaussLegendre* gl;
  {
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(q_seg);
    if (it == cache.end())
      it = cache.emplace(q_seg, gauss_legendre(q_seg)).first;
    gl = &it->second;
  }
  Complex s(0.0, 0.0);
  for (int i = 0; i < q_seg; ++i)
    s += 0.5 * gl->weights[i] * std::exp(p(0.5 * (gl->nodes[i] + 1.0) * w));
  return s * w;
}

} // namespace dgrf
