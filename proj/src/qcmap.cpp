#include "dgrf/qcmap.hpp"

#include "dgrf/simulate.hpp"

#include <sstream>

namespace dgrf {

namespace {

constexpr Complex kI(0.0, 1.0);

// Integrated triweight profile on [-1, 1], from 0 to 1.
double triweight_cdf(double u)
{
  if (u <= -1.0)
    return 0.0;
  if (u >= 1.0)
    return 1.0;
  const double u2 = u * u;
  return 0.5 + (35.0 / 32.0) * u * (1.0 - u2 + u2 * u2 * (3.0 / 5.0) - u2 * u2 * u2 / 7.0);
}

// Cubic Lagrange weights on nodes -1, 0, 1, 2 at offset t.
std::array<double, 4> cubic_weights(double t)
{
  return { -t * (t - 1) * (t - 2) / 6.0, (t + 1) * (t - 1) * (t - 2) / 2.0, -(t + 1) * t * (t - 2) / 2.0,
           (t + 1) * t * (t - 1) / 6.0 };
}

int wrap(int k, int M)
{
  k %= M;
  return k < 0 ? k + M : k;
}

template<class Fn>
PlaneBeltrami sample_truncated(const Disk& U, double rho_out, double box_factor, int M, Fn&& mu)
{
  if (!(rho_out > U.radius))
    throw Error(ErrorCode::geometry, "cutoff radius must exceed the radius of U");
  if (M < 16 || M % 2 != 0)
    throw Error(ErrorCode::domain, "spectral box resolution must be even and at least 16");
  PlaneBeltrami pb;
  pb.box = { U.center, box_factor * U.diameter(), M };
  pb.mu.setZero(M, M);
  pb.support_radius = rho_out;
  for (int b = 0; b < M; ++b)
    for (int a = 0; a < M; ++a) {
      const Complex z = pb.box.point(a, b);
      const double chi = radial_cutoff(std::abs(z - U.center), U.radius, rho_out);
      if (chi > 0.0)
        pb.mu(a, b) = chi * mu(z);
    }
  pb.k = pb.mu.cwiseAbs().maxCoeff();
  if (!(pb.k < 1.0))
    throw Error(ErrorCode::domain, "Beltrami coefficient has sup norm >= 1");
  return pb;
}

} // namespace

double radial_cutoff(double r, double r_in, double r_out)
{
  if (r <= r_in)
    return 1.0;
  if (r >= r_out)
    return 0.0;
  return 1.0 - triweight_cdf(2.0 * (r - r_in) / (r_out - r_in) - 1.0);
}

PlaneBeltrami truncate_mu(const DilatationField& mu_hat, const Disk& U, double rho_out, double box_factor, int M)
{
  const Rect R = mu_hat.region();
  // up to one sample step of nearest-value continuation is accepted
  const double eps = mu_hat.points.spacing * (1.0 + 1e-9);
  if (U.center.real() - U.radius < R.x0 - eps || U.center.real() + U.radius > R.x1 + eps ||
      U.center.imag() - U.radius < R.y0 - eps || U.center.imag() + U.radius > R.y1 + eps) {
    std::ostringstream os;
    os << "U = disk((" << U.center.real() << ", " << U.center.imag() << "), " << U.radius
       << ") is not inside the dilatation field region [" << R.x0 << ", " << R.x1 << "] x [" << R.y0 << ", "
       << R.y1 << "]";
    throw Error(ErrorCode::geometry, os.str());
  }
  return sample_truncated(U, rho_out, box_factor, M, [&](Complex z) { return mu_hat.mu_at(to_vec(z)); });
}

PlaneBeltrami truncate_mu(const std::function<Complex(Complex)>& mu, const Disk& U, double rho_out,
                          double box_factor, int M)
{
  return sample_truncated(U, rho_out, box_factor, M, mu);
}

// ---------------------------------------------------------------------------

SpectralOperators::SpectralOperators(const SpectralBox& box)
  : box_(box)
{
  const int M = box.M;
  s_symbol_.resize(M, M);
  t_symbol_.resize(M, M);
  dz_symbol_.resize(M, M);
  dzbar_symbol_.resize(M, M);
  for (int b = 0; b < M; ++b)
    for (int a = 0; a < M; ++a) {
      const Complex xi(fft_frequency(a, M, box.side), fft_frequency(b, M, box.side));
      if (a == 0 && b == 0) {
        s_symbol_(a, b) = t_symbol_(a, b) = dz_symbol_(a, b) = dzbar_symbol_(a, b) = 0.0;
        continue;
      }
      s_symbol_(a, b) = std::conj(xi) / xi;
      t_symbol_(a, b) = -2.0 * kI / xi;
      dz_symbol_(a, b) = 0.5 * kI * std::conj(xi);
      dzbar_symbol_(a, b) = 0.5 * kI * xi;
    }
}

Eigen::MatrixXcd SpectralOperators::apply(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& symbol) const
{
  Eigen::MatrixXcd x = h;
  fft_.forward(x);
  x.array() *= symbol.array();
  fft_.inverse(x);
  return x;
}

Eigen::MatrixXcd SpectralOperators::beurling(const Eigen::MatrixXcd& h) const { return apply(h, s_symbol_); }
Eigen::MatrixXcd SpectralOperators::cauchy(const Eigen::MatrixXcd& h) const { return apply(h, t_symbol_); }
Eigen::MatrixXcd SpectralOperators::dz(const Eigen::MatrixXcd& p) const { return apply(p, dz_symbol_); }
Eigen::MatrixXcd SpectralOperators::dzbar(const Eigen::MatrixXcd& p) const { return apply(p, dzbar_symbol_); }

double SpectralOperators::self_test() const
{
  const int M = box_.M;
  const double s2 = std::pow(box_.side / 16.0, 2);
  Eigen::MatrixXcd dbar(M, M), d(M, M);
  for (int b = 0; b < M; ++b)
    for (int a = 0; a < M; ++a) {
      const Complex z = box_.point(a, b) - box_.center;
      const double e = std::exp(-std::norm(z) / s2);
      dbar(a, b) = (1.0 - std::norm(z) / s2) * e;
      d(a, b) = -std::conj(z) * std::conj(z) / s2 * e;
    }
  return (beurling(dbar) - d).cwiseAbs().maxCoeff() / d.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

MapJet PlaneMap::jet(Complex z) const
{
  const double dx = box_.spacing();
  const Complex origin = box_.point(0, 0);
  const double u = (z.real() - origin.real()) / dx;
  const double v = (z.imag() - origin.imag()) / dx;
  const double fu = std::floor(u), fv = std::floor(v);
  const auto wu = cubic_weights(u - fu);
  const auto wv = cubic_weights(v - fv);
  const int M = box_.M;
  Complex p(0.0), h(0.0), sh(0.0);
  for (int q = 0; q < 4; ++q) {
    const int b = wrap(int(fv) + q - 1, M);
    for (int r = 0; r < 4; ++r) {
      const int a = wrap(int(fu) + r - 1, M);
      const double w = wu[r] * wv[q];
      p += w * p_(a, b);
      h += w * h_(a, b);
      sh += w * sh_(a, b);
    }
  }
  return { z + mean_h_ * std::conj(z - box_.center) + p, 1.0 + sh, h };
}

PlaneMap solve_beltrami_plane(const PlaneBeltrami& pb, const BeltramiOptions& options)
{
  if (!(pb.k < 1.0))
    throw Error(ErrorCode::domain, "Beltrami coefficient has sup norm >= 1");
  if (2.0 * pb.support_radius > options.max_support_fraction * pb.box.side) {
    std::ostringstream os;
    os << "support diameter " << 2.0 * pb.support_radius << " exceeds " << options.max_support_fraction
       << " of the periodic box side " << pb.box.side << "; periodic images would interact";
    throw Error(ErrorCode::aliasing, os.str());
  }

  const SpectralOperators ops(pb.box);
  PlaneMap out;
  out.box_ = pb.box;
  out.k_ = pb.k;
  out.self_test_ = ops.self_test();
  if (!(out.self_test_ < 1e-6)) {
    std::ostringstream os;
    os << "Beurling transform self-test failed (relative error " << out.self_test_ << ")";
    throw Error(ErrorCode::numerical, os.str());
  }

  Eigen::MatrixXcd h = pb.mu;
  bool converged = false;
  double diff = 0.0;
  for (int it = 0; it < options.max_iter; ++it) {
    Eigen::MatrixXcd next = pb.mu.array() * (1.0 + ops.beurling(h).array());
    diff = (next - h).cwiseAbs().maxCoeff();
    h.swap(next);
    out.history_.push_back(diff);
    if (diff < options.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "Beltrami iteration stopped after " << options.max_iter << " steps with increment " << diff
       << " (k = " << pb.k << ", tol = " << options.tol << ")";
    throw Error(ErrorCode::no_convergence, os.str());
  }

  out.h_ = std::move(h);
  out.sh_ = ops.beurling(out.h_);
  out.mean_h_ = out.h_.mean();
  out.p_ = ops.cauchy(out.h_);

  // residuals recomputed from the stored samples of T h
  const Eigen::MatrixXcd dbar_f = ops.dzbar(out.p_).array() + out.mean_h_;
  const Eigen::MatrixXcd d_f = ops.dz(out.p_).array() + 1.0;
  out.residual_spectral_ = (dbar_f.array() - pb.mu.array() * d_f.array()).abs().maxCoeff();

  const int M = pb.box.M;
  const double dx = pb.box.spacing();
  double fd = 0.0;
  for (int b = 0; b < M; ++b)
    for (int a = 0; a < M; ++a) {
      if (std::abs(pb.box.point(a, b) - pb.box.center) > pb.support_radius)
        continue;
      const Complex px = (out.p_(wrap(a + 1, M), b) - out.p_(wrap(a - 1, M), b)) / (2 * dx);
      const Complex py = (out.p_(a, wrap(b + 1, M)) - out.p_(a, wrap(b - 1, M))) / (2 * dx);
      const Complex fdz = 1.0 + 0.5 * (px - kI * py);
      const Complex fdzbar = out.mean_h_ + 0.5 * (px + kI * py);
      fd = std::max(fd, std::abs(fdzbar - pb.mu(a, b) * fdz));
    }
  out.residual_fd_ = fd;
  return out;
}

// ---------------------------------------------------------------------------

Complex RiemannMap::operator()(Complex w) const
{
  const Complex s = (w - w0_) / sigma_;
  Complex acc(0.0);
  for (Eigen::Index k = coef_.size() - 1; k >= 0; --k)
    acc = acc * s + coef_[k];
  return acc;
}

Complex RiemannMap::derivative(Complex w) const
{
  const Complex s = (w - w0_) / sigma_;
  Complex acc(0.0);
  for (Eigen::Index k = dcoef_.size() - 1; k >= 0; --k)
    acc = acc * s + dcoef_[k];
  return acc;
}

RiemannMap riemann_map(const MappedDisk& domain, Complex w0, const RiemannOptions& options)
{
  const Disk& U = domain.U;
  const DiskQuadrature quad(options.q_r, options.q_theta);
  const Eigen::Index nq = quad.size();
  Eigen::VectorXcd w(nq);
  Eigen::VectorXd weight(nq);
  const double r2 = U.radius * U.radius;
  for (Eigen::Index q = 0; q < nq; ++q) {
    const MapJet j = domain.map(U.center + U.radius * quad.nodes()[q]);
    const double J = std::norm(j.dz) - std::norm(j.dzbar);
    if (!(J > 0.0))
      throw Error(ErrorCode::geometry, "map of U is not orientation preserving at a quadrature node");
    w[q] = j.value;
    weight[q] = r2 * quad.weights()[q] * J;
  }
  Eigen::VectorXcd boundary(options.boundary_samples);
  for (int k = 0; k < options.boundary_samples; ++k)
    boundary[k] = domain.map(U.center + std::polar(U.radius, 2.0 * kPi * k / options.boundary_samples)).value;

  RiemannMap rm;
  rm.w0_ = w0;
  rm.sigma_ = (boundary.array() - w0).abs().maxCoeff();
  const Eigen::VectorXcd s = (w.array() - w0) / rm.sigma_;

  const auto inner = [&](const Eigen::VectorXcd& f, const Eigen::VectorXcd& g) {
    return (weight.array().cast<Complex>() * f.array() * g.array().conjugate()).sum();
  };

  const int N = options.degree;
  Eigen::MatrixXcd Q(nq, N + 1);
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(N + 1, N + 1); // column k: monomial coefficients of q_k
  const double norm0 = std::sqrt(weight.sum());
  Q.col(0).setConstant(1.0 / norm0);
  C(0, 0) = 1.0 / norm0;
  int deg = 0;
  for (int k = 0; k < N; ++k) {
    Eigen::VectorXcd v = s.array() * Q.col(k).array();
    Eigen::VectorXcd cv = Eigen::VectorXcd::Zero(N + 1);
    cv.tail(N) = C.col(k).head(N);
    const double vnorm = std::sqrt(inner(v, v).real());
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j <= k; ++j) {
        const Complex hjk = inner(v, Q.col(j));
        v -= hjk * Q.col(j);
        cv -= hjk * C.col(j);
      }
    const double nrm = std::sqrt(inner(v, v).real());
    if (!(nrm > options.breakdown * vnorm)) {
      warn("Bergman orthonormalization stopped at degree " + std::to_string(k) + " of " + std::to_string(N));
      break;
    }
    Q.col(k + 1) = v / nrm;
    C.col(k + 1) = cv / nrm;
    deg = k + 1;
  }

  // K(w, w0) = sum q_k(w) conj(q_k(w0)); q_k(w0) is the constant coefficient.
  const Eigen::VectorXcd at0 = C.row(0).head(deg + 1).transpose();
  const double K0 = at0.squaredNorm();
  const Eigen::VectorXcd kernel = C.leftCols(deg + 1) * at0.conjugate();
  rm.dcoef_ = std::sqrt(kPi / K0) * kernel.head(deg + 1);
  rm.coef_ = Eigen::VectorXcd::Zero(deg + 2);
  for (int k = 0; k <= deg; ++k)
    rm.coef_[k + 1] = rm.sigma_ * rm.dcoef_[k] / double(k + 1);

  double err = 0.0;
  for (Eigen::Index k = 0; k < boundary.size(); ++k)
    err = std::max(err, std::abs(std::abs(rm(boundary[k])) - 1.0));
  rm.boundary_error_ = err;
  if (!(err <= options.tol_boundary)) {
    std::ostringstream os;
    os << "Riemann map misses the unit circle by " << err << " on the boundary (tolerance "
       << options.tol_boundary << ", degree " << deg << ")";
    throw Error(ErrorCode::riemann_map_inaccurate, os.str());
  }
  return rm;
}

// ---------------------------------------------------------------------------

MapJet QCMap::jet(Complex z) const
{
  const MapJet p = plane_->jet(z);
  const Complex rot = std::polar(1.0, -phi_);
  const Complex d = rot * riemann_.derivative(p.value);
  return { rot * riemann_(p.value), d * p.dz, d * p.dzbar };
}

double QCMap::inverse_radius(int i) const
{
  return (1.0 - options_.delta_inv) * double(i) / double(options_.inverse_radial - 1);
}

double QCMap::inverse_angle(int j) const
{
  return 2.0 * kPi * double(j) / double(options_.inverse_angular);
}

Complex QCMap::newton(Complex w, Complex z) const
{
  MapJet j = jet(z);
  Complex r = w - j.value;
  double res = std::abs(r);
  for (int it = 0; it < 60 && res >= options_.tol_inv; ++it) {
    const double det = std::norm(j.dz) - std::norm(j.dzbar);
    if (!(det > 0.0))
      break;
    const Complex step = (std::conj(j.dz) * r - j.dzbar * std::conj(r)) / det;
    double t = 1.0;
    bool improved = false;
    for (int half = 0; half < 30; ++half, t *= 0.5) {
      const Complex zn = z + t * step;
      const MapJet jn = jet(zn);
      const Complex rn = w - jn.value;
      if (std::abs(rn) < res) {
        z = zn;
        j = jn;
        r = rn;
        res = std::abs(rn);
        improved = true;
        break;
      }
    }
    if (!improved)
      break;
  }
  if (!(res < options_.tol_inv)) {
    std::ostringstream os;
    os << "Newton inversion at w = (" << w.real() << ", " << w.imag() << ") stalled with residual " << res;
    throw Error(ErrorCode::inversion_failure, os.str());
  }
  return z;
}

Complex QCMap::initial_guess(Complex w) const
{
  const double rmax = 1.0 - options_.delta_inv;
  const double x = std::min(std::abs(w), rmax) / rmax * (options_.inverse_radial - 1);
  const int i = std::min(int(x), options_.inverse_radial - 2);
  const double fr = x - i;
  double th = std::arg(w);
  if (th < 0)
    th += 2 * kPi;
  const double y = th / (2 * kPi) * options_.inverse_angular;
  const int j = int(y) % options_.inverse_angular;
  const int j1 = (j + 1) % options_.inverse_angular;
  const double ft = y - std::floor(y);
  return (1 - fr) * ((1 - ft) * inverse_(i, j) + ft * inverse_(i, j1)) +
         fr * ((1 - ft) * inverse_(i + 1, j) + ft * inverse_(i + 1, j1));
}

Complex QCMap::inverse(Complex w) const
{
  if (std::abs(w) > 1.0 - options_.delta_inv + 1e-12) {
    std::ostringstream os;
    os << "|w| = " << std::abs(w) << " exceeds the invertible radius " << 1.0 - options_.delta_inv;
    throw Error(ErrorCode::inversion_failure, os.str());
  }
  return newton(w, initial_guess(w));
}

Complex invert_qcmap(const QCMap& m, Complex w)
{
  return m.inverse(w);
}

QCMap build_qcmap(const PlaneBeltrami& pb, const Disk& U, const QCMapOptions& options)
{
  QCMap m;
  m.U_ = U;
  m.options_ = options;
  if (options.inverse_radial < 2 || options.inverse_angular < 3 || options.forward_samples < 2)
    throw Error(ErrorCode::domain, "QC map tables need at least 2 radial, 3 angular and 2 forward samples");
  auto plane = std::make_shared<PlaneMap>(solve_beltrami_plane(pb, options.beltrami));
  m.plane_ = plane;
  const MapJet at0 = plane->jet(U.center);
  m.riemann_ = riemann_map(MappedDisk{ U, [plane](Complex z) { return plane->jet(z); } }, at0.value,
                           options.riemann);
  m.phi_ = std::arg(at0.dz);

  const int F = options.forward_samples;
  m.forward_.resize(F, F);
  for (int b = 0; b < F; ++b)
    for (int a = 0; a < F; ++a) {
      const Complex z = U.center + U.radius * Complex(-1.0 + 2.0 * a / (F - 1), -1.0 + 2.0 * b / (F - 1));
      m.forward_(a, b) = m(z);
    }

  m.inverse_.resize(options.inverse_radial, options.inverse_angular);
  m.inverse_.row(0).setConstant(U.center);
  for (int i = 1; i < options.inverse_radial; ++i)
    for (int j = 0; j < options.inverse_angular; ++j) {
      const Complex w = std::polar(m.inverse_radius(i), m.inverse_angle(j));
      const Complex guess = i == 1 ? U.center + U.radius * w : m.inverse_(i - 1, j);
      m.inverse_(i, j) = m.newton(w, guess);
    }
  return m;
}

QCMap build_qcmap(const DilatationField& mu_hat, const Disk& U, const QCMapOptions& options)
{
  return build_qcmap(truncate_mu(mu_hat, U, options.rho_out_factor * U.radius, options.box_factor, options.M),
                     U, options);
}

Complex measured_dilatation(const std::function<Complex(Complex)>& f, Complex z, double step)
{
  const Complex fx = (f(z + step) - f(z - step)) / (2 * step);
  const Complex fy = (f(z + kI * step) - f(z - kI * step)) / (2 * step);
  return (fx + kI * fy) / (fx - kI * fy);
}

double dilatation_fidelity(const QCMap& m, const std::function<Complex(Complex)>& expected_mu, double fraction,
                           int samples_per_axis)
{
  const Disk& U = m.U();
  const double R = fraction * U.radius;
  double worst = 0.0;
  for (int b = 0; b < samples_per_axis; ++b)
    for (int a = 0; a < samples_per_axis; ++a) {
      const Complex off(-R + 2 * R * a / (samples_per_axis - 1), -R + 2 * R * b / (samples_per_axis - 1));
      if (std::abs(off) > R)
        continue;
      const Complex z = U.center + off;
      const Complex mu = measured_dilatation([&](Complex x) { return m(x); }, z);
      worst = std::max(worst, std::abs(mu - expected_mu(z)));
    }
  return worst;
}

} // namespace dgrf
