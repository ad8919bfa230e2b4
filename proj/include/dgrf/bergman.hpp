#pragma once

#include "dgrf/core.hpp"

#include <functional>

namespace dgrf {

//! Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre
{
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

GaussLegendre gauss_legendre(int count);

//! Polar product rule on the unit disk: Gauss-Legendre in r (weight r dr)
//! times the uniform rule in theta.
class DiskQuadrature
{
public:
  explicit DiskQuadrature(int q_r = 64, int q_theta = 256);

  const Eigen::VectorXcd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::Index size() const { return nodes_.size(); }
  int radial_count() const { return q_r_; }
  int angular_count() const { return q_theta_; }

  //! Sum of w_k u(z_k).
  template<class Derived>
  auto integrate(const Eigen::MatrixBase<Derived>& values) const
  {
    return (values.array() * weights_.array().template cast<typename Derived::Scalar>()).sum();
  }

private:
  int q_r_;
  int q_theta_;
  Eigen::VectorXcd nodes_;
  Eigen::VectorXd weights_;
};

//! c_0 + c_1 w + ... + c_N w^N.
class HolomorphicPoly
{
public:
  HolomorphicPoly() = default;
  explicit HolomorphicPoly(Eigen::VectorXcd coeffs)
    : c_(std::move(coeffs))
  {}

  Complex operator()(Complex w) const;
  HolomorphicPoly derivative() const;
  int degree() const { return int(c_.size()) - 1; }
  const Eigen::VectorXcd& coeffs() const { return c_; }
  Eigen::VectorXcd& coeffs() { return c_; }

private:
  Eigen::VectorXcd c_;
};

//! 2 sum_k <u, e_k> e_k - u(0) over k <= N, e_k = sqrt((k+1)/pi) z^k, with
//! `values` sampled at the quadrature nodes.
HolomorphicPoly bergman_project(const Eigen::VectorXd& values, double u0, int N, const DiskQuadrature& quad);

//! As above, sampling u; nodes beyond r_data are replaced by the point of the
//! same argument on the circle of radius r_data.
HolomorphicPoly bergman_project(const std::function<double(Complex)>& u, int N, const DiskQuadrature& quad,
                                double r_data = 1.0);

//! max_k |P(Re F)_k - (F - i Im F(0))_k|.
double project_real_part_identity_check(const HolomorphicPoly& F, const DiskQuadrature& quad);

//! Integral of exp(p(s)) ds over the segment from 0 to w, Gauss-Legendre in q_seg nodes.
Complex integrate_exp_along_segment(const HolomorphicPoly& p, Complex w, int q_seg = 32);

} // namespace dgrf
