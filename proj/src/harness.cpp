#include "dgrf/harness.hpp"

#include "dgrf/io.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dgrf {

AlignmentResult align(const Eigen::VectorXcd& truth, const Eigen::VectorXcd& estimate, std::string set)
{
  if (truth.size() != estimate.size())
    throw Error(ErrorCode::domain, "alignment needs matched point sets");
  if (truth.size() < 2)
    throw Error(ErrorCode::domain, "alignment needs at least two points");
  const Complex mf = truth.mean();
  const Complex mg = estimate.mean();
  const Eigen::VectorXcd a = truth.array() - mf;
  const Eigen::VectorXcd b = estimate.array() - mg;
  if (a.cwiseAbs().maxCoeff() == 0.0)
    throw Error(ErrorCode::domain, "alignment points all coincide");
  const Complex cross = (b.array() * a.array().conjugate()).sum();

  AlignmentResult r;
  r.theta = std::arg(cross);
  const Complex rot = std::polar(1.0, r.theta);
  r.c = mg - rot * mf;
  const Eigen::ArrayXd err = (rot * truth.array() + r.c - estimate.array()).abs();
  r.sup_error = err.maxCoeff();
  r.rms_error = std::sqrt(err.square().mean());
  r.count = truth.size();
  r.set = std::move(set);
  return r;
}

Eigen::VectorXcd disk_sample_points(const Disk& U, double fraction, int per_axis)
{
  const double R = fraction * U.radius;
  std::vector<Complex> pts;
  for (int b = 0; b < per_axis; ++b)
    for (int a = 0; a < per_axis; ++a) {
      const Complex off(-R + 2.0 * R * a / (per_axis - 1), -R + 2.0 * R * b / (per_axis - 1));
      if (std::abs(off) <= R * (1.0 + 1e-12))
        pts.push_back(U.center + off);
    }
  return Eigen::Map<Eigen::VectorXcd>(pts.data(), Eigen::Index(pts.size()));
}

AlignmentResult aligned_error(const ReconstructedMap& fhat, const Deformation& truth, double fraction, int per_axis)
{
  const Eigen::VectorXcd z = disk_sample_points(fhat.U(), fraction, per_axis);
  Eigen::VectorXcd t(z.size()), e(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    t[k] = truth(z[k]);
    e[k] = fhat(z[k]);
  }
  return align(t, e, "disk radius " + std::to_string(fraction) + " r, " + std::to_string(z.size()) + " points");
}

FieldSample draw_sample(const CovarianceModel& model, const Deformation& f, const GridSpec& spec,
                        std::uint64_t seed, const SamplerConfig& sampler)
{
  if (sampler.tag == SamplerTag::exact_cholesky)
    return sample_exact(model, f, spec, seed, sampler.exact);
  return sample_fast(model, f, spec, seed, sampler.fast);
}

Rect sweep_metric_region(const ExperimentConfig& config)
{
  const Kernel K = kernel_from_string(to_string(config.kernel));
  Rect theta{ -INFINITY, -INFINITY, INFINITY, INFINITY };
  for (int n : config.sweep_n) {
    const Rect r = evaluable_region(Grid(GridSpec{ n, config.grid.domain, config.grid.margin }), config.bandwidth(n), K);
    theta = { std::max(theta.x0, r.x0), std::max(theta.y0, r.y0), std::min(theta.x1, r.x1), std::min(theta.y1, r.y1) };
  }
  return theta;
}

namespace {

SweepRow sweep_row(const ExperimentConfig& config, int n, const Rect& theta)
{
  SweepRow row;
  row.n = n;
  row.b = config.bandwidth(n);
  row.seed = split_seed(config.seed, std::uint64_t(n));
  const auto t0 = std::chrono::steady_clock::now();
  const auto finish = [&] {
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
  };
  const char* stage = "simulate";
  try {
    const LocalExpansion le = config.model.local_expansion();
    const Kernel K = kernel_from_string(to_string(config.kernel));
    const FieldSample Y =
      draw_sample(config.model, config.deformation, GridSpec{ n, config.grid.domain, config.grid.margin }, row.seed,
                  config.sampler);

    stage = "variation";
    const RegularGrid pts = lattice_points_in(Y.grid, theta);
    if (pts.size() == 0)
      throw Error(ErrorCode::geometry, "no lattice points in the metric region");
    const SmoothedVariationField B = smoothed_variation_field(Y, pts, row.b, K, le.alpha);
    double sup_err = 0.0, sup_g = 0.0;
    for (std::size_t d = 0; d < kDirections.size(); ++d)
      for (int j = 0; j < pts.ny; ++j)
        for (int i = 0; i < pts.nx; ++i) {
          const double g = le.sigma_c * g_true(config.deformation, pts.point(i, j), kDirections[d], le.alpha);
          sup_err = std::max(sup_err, std::abs(B.values[d](i, j) - g));
          sup_g = std::max(sup_g, g);
        }
    row.sup_B_error = sup_err;
    row.sup_g = sup_g;

    stage = "estimate";
    const DilatationField D = dilatation_from_variation(B);
    const DilatationField E = exact_dilatation_field(config.deformation, pts);
    row.sup_mu_error = (D.mu - E.mu).cwiseAbs().maxCoeff();
    row.sup_tau_error = (D.tau - E.tau).cwiseAbs().maxCoeff();

    if (config.reconstruct) {
      stage = "reconstruct";
      const ReconstructedMap fhat = reconstruct_f(Y, le.alpha, le.gamma, config.reconstruct_options());
      row.aligned_error = aligned_error(fhat, config.deformation, config.metric_fraction).sup_error;
    }
  } catch (const Error& e) {
    row.error = e.stage().empty() ? std::string(stage) + ": " + e.what() : std::string(e.what());
  }
  return finish();
}

std::string csv_field(const std::string& s)
{
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"')
      out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + '"';
}

} // namespace

SweepResult convergence_sweep(const ExperimentConfig& config)
{
  config.validate();
  SweepResult out;
  out.theta = sweep_metric_region(config);
  out.b_max = config.bandwidth(config.sweep_n.front());
  std::ostringstream os;
  os << "[" << format_double(out.theta.x0) << ", " << format_double(out.theta.x1) << "] x ["
     << format_double(out.theta.y0) << ", " << format_double(out.theta.y1) << "]";
  out.theta_description = os.str();
  for (int n : config.sweep_n)
    out.rows.push_back(sweep_row(config, n, out.theta));
  return out;
}

std::string sweep_csv(const SweepResult& result, const ExperimentConfig& config)
{
  std::ostringstream os;
  os << "# variation metrics over theta = " << result.theta_description
     << " (intersection of the kernel-evaluable regions; b_max = " << format_double(result.b_max) << ")\n"
     << "# reconstruction metric: aligned sup error on the disk of radius " << format_double(config.metric_fraction)
     << " r about (" << format_double(config.U.center.real()) << ", " << format_double(config.U.center.imag())
     << "), r = " << format_double(config.U.radius) << "\n"
     << "# model = " << config.model.describe() << "; deformation = " << config.deformation.describe() << "\n"
     << "# sampler = " << to_string(config.sampler.tag) << "; kernel = " << to_string(config.kernel)
     << "; b(n) = " << format_double(config.bandwidth.c_b) << " n^-" << format_double(config.bandwidth.beta_prime)
     << "\n"
     << "# seed(n) = split_seed(" << config.seed << ", n)\n"
     << "n,b,seed,sup_abs_B_minus_g,sup_g,sup_abs_mu_error,sup_abs_tau_error,aligned_sup_error,error\n";
  for (const SweepRow& r : result.rows) {
    os << r.n << ',' << format_double(r.b) << ',' << r.seed << ',' << format_double(r.sup_B_error) << ','
       << format_double(r.sup_g) << ',' << format_double(r.sup_mu_error) << ',' << format_double(r.sup_tau_error)
       << ',' << format_double(r.aligned_error) << ',' << csv_field(r.error) << '\n';
  }
  return os.str();
}

std::string timing_csv(const SweepResult& result)
{
  std::ostringstream os;
  os << "n,seconds\n";
  for (const SweepRow& r : result.rows)
    os << r.n << ',' << format_double(r.seconds) << '\n';
  return os.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& content)
{
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error(ErrorCode::io, "cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out)
      throw Error(ErrorCode::io, "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::io, "cannot rename into '" + path.string() + "'");
  }
}

} // namespace dgrf
