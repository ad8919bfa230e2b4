#pragma once

#include "dgrf/bergman.hpp"
#include "dgrf/core.hpp"
#include "dgrf/dilatation.hpp"
#include "dgrf/fft.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace dgrf {

//! Periodic M x M box of side L centred at `center`; sample (a, b) sits at
//! center + L (a/M - 1/2) + i L (b/M - 1/2).
struct SpectralBox
{
  Complex center{};
  double side = 1.0;
  int M = 512;

  double spacing() const { return side / M; }
  Complex point(int a, int b) const
  {
    return center + Complex(side * (double(a) / M - 0.5), side * (double(b) / M - 0.5));
  }
};

//! Compactly supported Beltrami coefficient sampled on a periodic box.
struct PlaneBeltrami
{
  SpectralBox box;
  Eigen::MatrixXcd mu; // (M, M)
  double k = 0.0;      // sup |mu|
  double support_radius = 0.0;
};

//! 1 on [0, r_in], 0 beyond r_out, C^3 in between (integrated triweight profile).
double radial_cutoff(double r, double r_in, double r_out);

//! chi * mu_hat with mu_hat continued by its nearest value outside the field.
PlaneBeltrami truncate_mu(const DilatationField& mu_hat, const Disk& U, double rho_out,
                          double box_factor = 8.0, int M = 512);
//! Same, from an analytic coefficient.
PlaneBeltrami truncate_mu(const std::function<Complex(Complex)>& mu, const Disk& U, double rho_out,
                          double box_factor = 8.0, int M = 512);

struct BeltramiOptions
{
  double tol = 1e-10;
  int max_iter = 500;
  //! Largest allowed support diameter as a fraction of the box side.
  double max_support_fraction = 0.5;
};

//! Beurling and Cauchy transforms as Fourier multipliers on a periodic box.
class SpectralOperators
{
public:
  SpectralOperators(const SpectralBox& box);

  //! conj(xi)/xi, zero mode dropped.
  Eigen::MatrixXcd beurling(const Eigen::MatrixXcd& h) const;
  //! -2i/xi, zero mode dropped.
  Eigen::MatrixXcd cauchy(const Eigen::MatrixXcd& h) const;
  //! Spectral d/dz and d/dzbar of a periodic function.
  Eigen::MatrixXcd dz(const Eigen::MatrixXcd& p) const;
  Eigen::MatrixXcd dzbar(const Eigen::MatrixXcd& p) const;

  //! Checks the Beurling convention on the derivatives of zbar exp(-|z|^2/s^2);
  //! returns the relative sup error.
  double self_test() const;

private:
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& symbol) const;

  SpectralBox box_;
  Eigen::MatrixXcd s_symbol_;
  Eigen::MatrixXcd t_symbol_;
  Eigen::MatrixXcd dz_symbol_;
  Eigen::MatrixXcd dzbar_symbol_;
  mutable Fft2 fft_;
};

//! Normalized-at-infinity plane solution f(z) = z + m zbar + T h, where h
//! solves h = mu (1 + S h) and m is the mean of h over the box.
class PlaneMap
{
public:
  MapJet jet(Complex z) const;
  Complex operator()(Complex z) const { return jet(z).value; }

  const SpectralBox& box() const { return box_; }
  const Eigen::MatrixXcd& density() const { return h_; }
  const Eigen::MatrixXcd& periodic_part() const { return p_; }
  const std::vector<double>& history() const { return history_; }
  int iterations() const { return int(history_.size()); }
  double k() const { return k_; }
  //! Sup of dbar f - mu d f using spectral derivatives of the stored samples.
  double residual_spectral() const { return residual_spectral_; }
  //! Same with second-order central differences, on the support interior.
  double residual_fd() const { return residual_fd_; }
  double self_test_error() const { return self_test_; }

private:
  friend PlaneMap solve_beltrami_plane(const PlaneBeltrami&, const BeltramiOptions&);

  SpectralBox box_;
  Complex mean_h_{};
  double k_ = 0.0;
  Eigen::MatrixXcd h_;  // dbar f
  Eigen::MatrixXcd sh_; // S h, so d f = 1 + S h
  Eigen::MatrixXcd p_;  // T h
  std::vector<double> history_;
  double residual_spectral_ = 0.0;
  double residual_fd_ = 0.0;
  double self_test_ = 0.0;
};

PlaneMap solve_beltrami_plane(const PlaneBeltrami& pb, const BeltramiOptions& options = {});

//! A disk U carried into the plane by a smooth orientation-preserving map.
struct MappedDisk
{
  Disk U;
  std::function<MapJet(Complex)> map;
};

struct RiemannOptions
{
  int degree = 32;
  double tol_boundary = 1e-2;
  int q_r = 64;
  int q_theta = 256;
  int boundary_samples = 256;
  //! Relative size of a new orthogonal direction below which the degree stops.
  double breakdown = 1e-10;
};

//! Conformal map of the image domain onto the unit disk, rho(w0) = 0,
//! rho'(w0) > 0, from its Bergman kernel.
class RiemannMap
{
public:
  Complex operator()(Complex w) const;
  Complex derivative(Complex w) const;
  int degree() const { return int(dcoef_.size()) - 1; }
  double boundary_error() const { return boundary_error_; }
  Complex anchor() const { return w0_; }
  //! Monomial coefficients of rho' in s = (w - w0)/sigma.
  const Eigen::VectorXcd& derivative_coeffs() const { return dcoef_; }
  double scale() const { return sigma_; }

private:
  friend RiemannMap riemann_map(const MappedDisk&, Complex, const RiemannOptions&);

  Complex w0_{};
  double sigma_ = 1.0;
  Eigen::VectorXcd dcoef_; // rho'(w) = sum dcoef_k s^k
  Eigen::VectorXcd coef_;  // rho(w) = sum coef_k s^k
  double boundary_error_ = 0.0;
};

//! Orthonormalizes 1, s, s^2, ... (Arnoldi in s) under the area inner product
//! of the image domain, pulled back to U by the Jacobian of the map.
RiemannMap riemann_map(const MappedDisk& domain, Complex w0, const RiemannOptions& options = {});

struct QCMapOptions
{
  double box_factor = 8.0;
  int M = 512;
  double rho_out_factor = 1.5; // cutoff radius / U radius
  BeltramiOptions beltrami{};
  RiemannOptions riemann{};
  int forward_samples = 65;  // per side of the square covering U
  int inverse_radial = 24;
  int inverse_angular = 96;
  double delta_inv = 0.05;
  double tol_inv = 1e-10;
};

//! Normalized quasiconformal map of U onto the unit disk: f(z0) = 0, d f(z0) > 0.
class QCMap
{
public:
  Complex operator()(Complex z) const { return jet(z).value; }
  MapJet jet(Complex z) const;
  //! Newton inversion of the map for |w| <= 1 - delta_inv.
  Complex inverse(Complex w) const;

  const Disk& U() const { return U_; }
  const PlaneMap& plane() const { return *plane_; }
  const RiemannMap& riemann() const { return riemann_; }
  double rotation() const { return phi_; }
  const QCMapOptions& options() const { return options_; }
  double k() const { return plane_->k(); }

  // Precomputed tables.
  const Eigen::MatrixXcd& forward_table() const { return forward_; }  // on the square covering U
  const Eigen::MatrixXcd& inverse_table() const { return inverse_; }  // (radial, angular)
  double inverse_radius(int i) const;
  double inverse_angle(int j) const;

private:
  friend QCMap build_qcmap(const PlaneBeltrami&, const Disk&, const QCMapOptions&);

  Complex initial_guess(Complex w) const;
  Complex newton(Complex w, Complex z) const;

  Disk U_;
  std::shared_ptr<const PlaneMap> plane_;
  RiemannMap riemann_;
  double phi_ = 0.0;
  QCMapOptions options_;
  Eigen::MatrixXcd forward_;
  Eigen::MatrixXcd inverse_;
};

QCMap build_qcmap(const DilatationField& mu_hat, const Disk& U, const QCMapOptions& options = {});
QCMap build_qcmap(const PlaneBeltrami& pb, const Disk& U, const QCMapOptions& options = {});

//! Inverts one point; throws InversionFailure when Newton does not settle.
Complex invert_qcmap(const QCMap& m, Complex w);

//! Central-difference estimate of dbar f / d f at z.
Complex measured_dilatation(const std::function<Complex(Complex)>& f, Complex z, double step = 1e-4);

//! Sup over the sub-disk of radius `fraction * r` of |measured - expected| dilatation.
double dilatation_fidelity(const QCMap& m, const std::function<Complex(Complex)>& expected_mu,
                           double fraction = 0.8, int samples_per_axis = 25);

} // namespace dgrf
