#include "dgrf/reconstruct.hpp"

#include <sstream>

namespace dgrf {

namespace {

template<class Fn>
auto stage(const char* name, Fn&& fn)
{
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty())
      throw;
    throw e.in_stage(name);
  }
}

} // namespace

std::string to_string(DataExtension e)
{
  return e == DataExtension::rescaled_disk ? "rescaled-disk" : "nearest-radius";
}

DataExtension data_extension_from_string(const std::string& s)
{
  if (s == "rescaled-disk")
    return DataExtension::rescaled_disk;
  if (s == "nearest-radius")
    return DataExtension::nearest_radius;
  throw Error(ErrorCode::config, "unknown data extension '" + s + "'");
}

LogGprime estimate_log_gprime(const std::function<double(Complex)>& tau, const QCMap& m,
                              const Eigen::VectorXcd& nodes, double max_masked_fraction, double node_scale)
{
  LogGprime out;
  out.node_scale = node_scale;
  out.data_radius = 1.0 - m.options().delta_inv;
  out.values.resize(nodes.size());
  out.masked.setConstant(nodes.size(), false);
  const auto phi_at = [&](Complex w) {
    const Complex z = m.inverse(w);
    return tau(z) - std::log(std::abs(m.jet(z).dz));
  };
  for (Eigen::Index q = 0; q < nodes.size(); ++q) {
    Complex w = node_scale * nodes[q];
    const double r = std::abs(w);
    if (r > out.data_radius)
      w *= out.data_radius / r;
    try {
      out.values[q] = phi_at(w);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::inversion_failure)
        throw;
      out.masked[q] = true;
    }
  }
  out.at_zero = tau(m.U().center) - std::log(std::abs(m.jet(m.U().center).dz));

  const double frac = out.masked_fraction();
  if (frac > max_masked_fraction) {
    std::ostringstream os;
    os << int(std::round(100 * frac)) << "% of the disk nodes could not be inverted (limit "
       << int(std::round(100 * max_masked_fraction)) << "%); use a smaller evaluation radius";
    throw Error(ErrorCode::too_many_masked, os.str());
  }
  // masked nodes take the value of the nearest valid node
  if (out.masked.any()) {
    const Eigen::VectorXd filled = out.values;
    for (Eigen::Index q = 0; q < nodes.size(); ++q) {
      if (!out.masked[q])
        continue;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index p = 0; p < nodes.size(); ++p)
        if (!out.masked[p] && std::abs(nodes[p] - nodes[q]) < best) {
          best = std::abs(nodes[p] - nodes[q]);
          out.values[q] = filled[p];
        }
    }
  }
  return out;
}

ConformalFactor reconstruct_g(const LogGprime& phi, int N, const DiskQuadrature& quad, int q_seg)
{
  HolomorphicPoly P = bergman_project(phi.values, phi.at_zero, N, quad);
  double scale = 1.0;
  for (Eigen::Index k = 1; k < P.coeffs().size(); ++k) {
    scale /= phi.node_scale;
    P.coeffs()[k] *= scale;
  }
  return { std::move(P), q_seg };
}

Complex ReconstructedMap::operator()(Complex z) const
{
  if (!evaluable(z)) {
    std::ostringstream os;
    os << "point (" << z.real() << ", " << z.imag() << ") is outside the evaluable disk of radius "
       << rho_eval_ * U_.radius;
    throw Error(ErrorCode::domain, os.str());
  }
  return g_((*qcmap_)(z));
}

bool ReconstructedMap::evaluable(Complex z) const
{
  return std::abs(z - U_.center) <= rho_eval_ * U_.radius * (1.0 + 1e-12);
}

ReconstructedMap reconstruct_from(const std::function<double(Complex)>& tau, QCMap m,
                                  std::shared_ptr<const DilatationField> field, const ReconstructOptions& options,
                                  ReconstructionProvenance provenance)
{
  if (!(options.rho_eval > 0.0 && options.rho_eval <= 1.0))
    throw Error(ErrorCode::config, "evaluation radius fraction must lie in (0, 1]");
  ReconstructedMap out;
  out.qcmap_ = std::make_shared<const QCMap>(std::move(m));
  out.field_ = std::move(field);
  out.U_ = options.U;
  out.rho_eval_ = options.rho_eval;
  out.provenance_ = std::move(provenance);

  const DiskQuadrature quad(options.q_r, options.q_theta);
  const double node_scale =
    options.extension == DataExtension::rescaled_disk ? 1.0 - out.qcmap_->options().delta_inv : 1.0;
  out.phi_ = stage("log-gprime", [&] {
    return estimate_log_gprime(tau, *out.qcmap_, quad.nodes(), options.max_masked_fraction, node_scale);
  });
  out.g_ = stage("projection", [&] { return reconstruct_g(out.phi_, options.degree, quad, options.q_seg); });

  double res = 0.0;
  for (Eigen::Index q = 0; q < quad.size(); ++q) {
    const Complex w = node_scale * quad.nodes()[q];
    if (std::abs(w) <= out.phi_.data_radius)
      res = std::max(res, std::abs(out.g_.log_derivative(w).real() - out.phi_.values[q]));
  }
  out.projection_residual_ = res;
  return out;
}

RegularGrid estimation_points(const Grid& grid, const Disk& U, double b, const Kernel& K)
{
  const Rect ev = evaluable_region(grid, b, K);
  const double h = 1.0 / grid.n();
  // one lattice step beyond U's bounding square so interpolation never extrapolates inside U
  const Rect want{ U.center.real() - U.radius - h, U.center.imag() - U.radius - h, U.center.real() + U.radius + h,
                   U.center.imag() + U.radius + h };
  const Rect use{ std::max(want.x0, ev.x0), std::max(want.y0, ev.y0), std::min(want.x1, ev.x1),
                  std::min(want.y1, ev.y1) };
  const RegularGrid pts = lattice_points_in(grid, use);
  const Rect got = pts.bounds();
  // the outermost lattice row may sit up to one step inside U's bounding square
  const double tol = h * (1.0 + 1e-9);
  if (pts.nx < 2 || pts.ny < 2 || got.x0 > U.center.real() - U.radius + tol ||
      got.x1 < U.center.real() + U.radius - tol || got.y0 > U.center.imag() - U.radius + tol ||
      got.y1 < U.center.imag() + U.radius - tol) {
    std::ostringstream os;
    os << "U = disk((" << U.center.real() << ", " << U.center.imag() << "), " << U.radius
       << ") is not inside the evaluable interior [" << ev.x0 << ", " << ev.x1 << "] x [" << ev.y0 << ", " << ev.y1
       << "] at bandwidth " << b << "; reduce the bandwidth constant or the radius of U";
    throw Error(ErrorCode::geometry, os.str());
  }
  return pts;
}

ReconstructedMap reconstruct_f(const FieldSample& Y, const ReconstructOptions& options)
{
  if (!Y.model)
    throw Error(ErrorCode::config, "sample carries no covariance model; pass alpha and gamma explicitly");
  const LocalExpansion le = Y.model->local_expansion();
  return reconstruct_f(Y, le.alpha, le.gamma, options);
}

ReconstructedMap reconstruct_f(const FieldSample& Y, double alpha, double gamma, const ReconstructOptions& options)
{
  stage("config", [&] {
    validate_bandwidth(options.bandwidth, gamma, BandwidthUse::derivative);
    return 0;
  });
  const Kernel K = options.kernel == KernelKind::triweight ? Kernel::triweight() : Kernel::gaussian();
  const double b = options.bandwidth(Y.grid.n());
  const RegularGrid pts = stage("geometry", [&] { return estimation_points(Y.grid, options.U, b, K); });
  auto field = std::make_shared<const DilatationField>(
    stage("estimate", [&] { return estimate_dilatation_field(Y, pts, b, K, alpha, options.dilatation); }));
  QCMap m = stage("qcmap", [&] { return build_qcmap(*field, options.U, options.qcmap); });
  ReconstructionProvenance prov{ Y.grid.n(), b, Y.seed, false, Y.model ? Y.model->describe() : std::string(),
                                 Y.deformation ? Y.deformation->describe() : std::string() };
  const DilatationField* fp = field.get();
  return reconstruct_from([fp](Complex z) { return fp->tau_at(to_vec(z)); }, std::move(m), field, options,
                          std::move(prov));
}

ReconstructedMap reconstruct_f_exact(const Deformation& f, const ReconstructOptions& options)
{
  const Disk& U = options.U;
  QCMap m = stage("qcmap", [&] {
    const PlaneBeltrami pb = truncate_mu([&f](Complex z) { return f.mu(z); }, U,
                                         options.qcmap.rho_out_factor * U.radius, options.qcmap.box_factor,
                                         options.qcmap.M);
    return build_qcmap(pb, U, options.qcmap);
  });
  ReconstructionProvenance prov;
  prov.exact = true;
  prov.deformation = f.describe();
  return reconstruct_from([f](Complex z) { return f.tau(z); }, std::move(m), nullptr, options, std::move(prov));
}

} // namespace dgrf
