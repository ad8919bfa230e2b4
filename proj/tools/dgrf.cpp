// Command-line front end: one subcommand per pipeline stage plus sweep, demo
// and selfcheck. Exit codes: 0 ok, 1 usage or I/O, 2 configuration, 3 numerical.

#include "dgrf/harness.hpp"
#include "dgrf/io.hpp"
#include "dgrf/selfcheck.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace dgrf;

namespace {

struct Common
{
  std::string config;
  std::string input;
  std::string output;
};

ExperimentConfig config_or_default(const std::string& path)
{
  if (path.empty()) {
    ExperimentConfig c;
    c.validate();
    return c;
  }
  return load_config(path);
}

template<class Write>
void emit(const std::string& path, Write&& write)
{
  std::ostringstream os;
  write(os);
  if (path.empty() || path == "-")
    std::cout << os.str();
  else
    write_atomic(path, os.str());
}

std::ifstream open_input(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::io, "cannot open '" + path + "'");
  return in;
}

Kernel kernel_of(const ExperimentConfig& c) { return kernel_from_string(to_string(c.kernel)); }

//! Model from the configuration, attached to a sample read from disk.
FieldSample attach(FieldSample Y, const ExperimentConfig& c)
{
  Y.model = c.model;
  Y.deformation = c.deformation;
  return Y;
}

int run_simulate(const Common& o, std::optional<int> n, std::optional<std::uint64_t> seed)
{
  ExperimentConfig c = config_or_default(o.config);
  if (n)
    c.grid.n = *n;
  if (seed)
    c.seed = *seed;
  c.validate();
  const FieldSample Y = draw_sample(c.model, c.deformation, c.grid, c.seed, c.sampler);
  emit(o.output, [&](std::ostream& os) { write_fgrid(os, Y); });
  return 0;
}

int run_qvar(const Common& o, int stride)
{
  const ExperimentConfig c = config_or_default(o.config);
  auto in = open_input(o.input);
  const FieldSample Y = read_fgrid(in);
  const double b = c.bandwidth(Y.grid.n());
  const Kernel K = kernel_of(c);
  const RegularGrid pts = lattice_points_in(Y.grid, evaluable_region(Y.grid, b, K), stride);
  if (pts.size() == 0)
    throw Error(ErrorCode::geometry, "no evaluable points at bandwidth " + format_double(b));
  const auto B = smoothed_variation_field(Y, pts, b, K, c.model.local_expansion().alpha);
  emit(o.output, [&](std::ostream& os) { write_vfield(os, B); });
  return 0;
}

int run_estimate(const Common& o, bool full, bool dmu)
{
  const ExperimentConfig c = config_or_default(o.config);
  auto in = open_input(o.input);
  const FieldSample Y = read_fgrid(in);
  const double b = c.bandwidth(Y.grid.n());
  const Kernel K = kernel_of(c);
  const RegularGrid pts =
    full ? lattice_points_in(Y.grid, evaluable_region(Y.grid, b, K)) : estimation_points(Y.grid, c.U, b, K);
  DilatationOptions opts;
  opts.with_dmu = dmu;
  const DilatationField D = estimate_dilatation_field(Y, pts, b, K, c.model.local_expansion().alpha, opts);
  emit(o.output, [&](std::ostream& os) { write_dfield(os, D); });
  return 0;
}

int run_qcmap(const Common& o)
{
  const ExperimentConfig c = config_or_default(o.config);
  auto in = open_input(o.input);
  const DilatationField D = read_dfield(in);
  const QCMap m = build_qcmap(D, c.U, c.qcmap);
  emit(o.output, [&](std::ostream& os) { write_qcmap(os, m); });
  return 0;
}

void print_metrics(const ReconstructedMap& m, const Deformation& truth, double fraction)
{
  const AlignmentResult a = aligned_error(m, truth, fraction);
  std::cout << "k=" << format_double(m.qcmap().k()) << '\n'
            << "boundary_error=" << format_double(m.qcmap().riemann().boundary_error()) << '\n'
            << "projection_residual=" << format_double(m.projection_residual()) << '\n'
            << "masked_fraction=" << format_double(m.log_gprime().masked_fraction()) << '\n'
            << "aligned_sup_error=" << format_double(a.sup_error) << '\n'
            << "aligned_sup_error_over_diam=" << format_double(a.sup_error / m.U().diameter()) << '\n'
            << "aligned_rms_error=" << format_double(a.rms_error) << '\n'
            << "theta=" << format_double(a.theta) << '\n'
            << "translation=" << format_double(a.c.real()) << ' ' << format_double(a.c.imag()) << '\n'
            << "metric_set=" << a.set << '\n';
}

int run_reconstruct(const Common& o, bool exact, int per_axis)
{
  const ExperimentConfig c = config_or_default(o.config);
  const ReconstructOptions opts = c.reconstruct_options();
  const ReconstructedMap m = [&] {
    if (exact)
      return reconstruct_f_exact(c.deformation, opts);
    if (o.input.empty())
      throw Error(ErrorCode::io, "reconstruct needs --input unless --exact is given");
    auto in = open_input(o.input);
    const FieldSample Y = attach(read_fgrid(in), c);
    const LocalExpansion le = c.model.local_expansion();
    return reconstruct_f(Y, le.alpha, le.gamma, opts);
  }();
  if (!o.output.empty())
    emit(o.output, [&](std::ostream& os) { write_rmap(os, m, per_axis); });
  print_metrics(m, c.deformation, c.metric_fraction);
  return 0;
}

int run_sweep(const Common& o)
{
  const ExperimentConfig c = load_config(o.config);
  const SweepResult r = convergence_sweep(c);
  const std::filesystem::path out = o.output.empty() ? std::filesystem::path(c.output_dir) / "sweep.csv"
                                                     : std::filesystem::path(o.output);
  if (out.has_parent_path())
    std::filesystem::create_directories(out.parent_path());
  write_atomic(out, sweep_csv(r, c));
  std::filesystem::path timing = out;
  timing.replace_extension(".timing.csv");
  write_atomic(timing, timing_csv(r));
  std::cout << sweep_csv(r, c);
  bool failed = false;
  for (const SweepRow& row : r.rows)
    failed |= !row.error.empty();
  if (failed)
    std::cerr << "dgrf: some sweep rows failed; see the error column\n";
  return failed ? 3 : 0;
}

//! Images of a square grid of line segments clipped to the disk of radius R.
void write_polylines(std::ostream& os, const Disk& U, double R, int lines, const std::function<Complex(Complex)>& f,
                     const std::string& what)
{
  os << "# polyline v1\n"
     << "map=" << what << '\n';
  const int samples = 41;
  int id = 0;
  for (int axis = 0; axis < 2; ++axis)
    for (int l = 0; l < lines; ++l) {
      const double s = -R + 2.0 * R * (l + 0.5) / lines;
      const double half = std::sqrt(R * R - s * s);
      os << "line=" << id++ << '\n';
      for (int k = 0; k < samples; ++k) {
        const double t = -half + 2.0 * half * k / (samples - 1);
        const Complex z = U.center + (axis == 0 ? Complex(t, s) : Complex(s, t));
        const Complex w = f(z);
        os << format_double(w.real()) << ' ' << format_double(w.imag()) << '\n';
      }
    }
}

int run_demo(const Common& o)
{
  const ExperimentConfig c = config_or_default(o.config);
  const std::filesystem::path dir = o.output.empty() ? c.output_dir : o.output;
  std::filesystem::create_directories(dir);

  const FieldSample Y = draw_sample(c.model, c.deformation, c.grid, c.seed, c.sampler);
  write_atomic(dir / "field.fgrid", [&] {
    std::ostringstream os;
    write_fgrid(os, Y);
    return os.str();
  }());

  const LocalExpansion le = c.model.local_expansion();
  const ReconstructedMap m = reconstruct_f(Y, le.alpha, le.gamma, c.reconstruct_options());
  write_atomic(dir / "dilatation.dfield", [&] {
    std::ostringstream os;
    write_dfield(os, *m.field());
    return os.str();
  }());

  const double R = c.rho_eval * c.U.radius;
  const Eigen::VectorXcd z = disk_sample_points(c.U, c.rho_eval, 31);
  Eigen::VectorXcd t(z.size()), e(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    t[k] = c.deformation(z[k]);
    e[k] = m(z[k]);
  }
  const AlignmentResult a = align(t, e);
  // the estimate is brought back onto the truth by the inverse rigid motion
  const Complex rot = std::polar(1.0, -a.theta);
  const auto write_grid = [&](const char* name, const std::function<Complex(Complex)>& f, const char* what) {
    std::ostringstream os;
    write_polylines(os, c.U, R, 10, f, what);
    write_atomic(dir / name, os.str());
  };
  write_grid("grid_true.txt", [&](Complex p) { return c.deformation(p); }, "truth");
  write_grid("grid_estimate.txt", [&](Complex p) { return rot * (m(p) - a.c); }, "aligned estimate");
  write_atomic(dir / "reconstruction.rmap", [&] {
    std::ostringstream os;
    write_rmap(os, m);
    return os.str();
  }());
  print_metrics(m, c.deformation, c.metric_fraction);
  std::cout << "output_dir=" << dir.string() << '\n';
  return 0;
}

int run_checks()
{
  bool ok = true;
  for (const CheckResult& r : dgrf::run_selfcheck()) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << format_double(r.value)
              << " <= " << format_double(r.threshold);
    if (!r.note.empty())
      std::cout << " (" << r.note << ')';
    std::cout << '\n';
    ok &= r.passed;
  }
  return ok ? 0 : 3;
}

int exit_code(const Error& e)
{
  switch (e.code()) {
    case ErrorCode::config:
    case ErrorCode::geometry:
      return 2;
    case ErrorCode::io:
      return 1;
    default:
      return 3;
  }
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Deformed Gaussian random fields: simulation and single-realization recovery of the deformation" };
  app.require_subcommand(1);
  Common o;
  std::optional<int> n;
  std::optional<std::uint64_t> seed;
  int stride = 1, per_axis = 41;
  bool full = false, dmu = false, exact = false;

  const auto add_common = [&](CLI::App* sub, bool input, bool input_required) {
    sub->add_option("-c,--config", o.config, "Configuration file")->check(CLI::ExistingFile);
    if (input) {
      auto* opt = sub->add_option("-i,--input", o.input, "Input dump")->check(CLI::ExistingFile);
      if (input_required)
        opt->required();
    }
    sub->add_option("-o,--output", o.output, "Output path ('-' or omitted: stdout)");
  };

  auto* simulate = app.add_subcommand("simulate", "Draw one realization and write an fgrid dump");
  add_common(simulate, false, false);
  simulate->add_option("-n,--n", n, "Grid resolution (overrides [grid] n)")->check(CLI::Range(4, 1 << 14));
  simulate->add_option("-s,--seed", seed, "Seed (overrides [grid] seed)");

  auto* qvar = app.add_subcommand("qvar", "Smoothed quadratic variations of an fgrid dump");
  add_common(qvar, true, true);
  qvar->add_option("--stride", stride, "Keep every k-th lattice point")->check(CLI::PositiveNumber);

  auto* estimate = app.add_subcommand("estimate", "Dilatation and log-scale estimates of an fgrid dump");
  add_common(estimate, true, true);
  estimate->add_flag("--full", full, "Whole evaluable region instead of the square around U");
  estimate->add_flag("--dmu", dmu, "Also estimate the derivative of the dilatation");

  auto* qcmap = app.add_subcommand("qcmap", "Solve for the normalized map of U from a dfield dump");
  add_common(qcmap, true, true);

  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct the deformation from an fgrid dump");
  add_common(reconstruct, true, false);
  reconstruct->add_flag("--exact", exact, "Use the configured deformation's exact dilatation instead of data");
  reconstruct->add_option("--per-axis", per_axis, "Lattice points per side of the dump")->check(CLI::Range(2, 1001));

  auto* sweep = app.add_subcommand("sweep", "Convergence sweep over the configured list of n");
  sweep->add_option("-c,--config", o.config, "Configuration file")->required()->check(CLI::ExistingFile);
  sweep->add_option("-o,--output", o.output, "CSV path (default: <output_dir>/sweep.csv)");

  auto* demo = app.add_subcommand("demo", "Seeded end-to-end run writing plot-ready dumps");
  demo->add_option("-c,--config", o.config, "Configuration file")->check(CLI::ExistingFile);
  demo->add_option("-o,--output", o.output, "Output directory (default: [sweep] output_dir)");

  auto* selfcheck = app.add_subcommand("selfcheck", "Deterministic invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (sub == simulate)
      return run_simulate(o, n, seed);
    if (sub == qvar)
      return run_qvar(o, stride);
    if (sub == estimate)
      return run_estimate(o, full, dmu);
    if (sub == qcmap)
      return run_qcmap(o);
    if (sub == reconstruct)
      return run_reconstruct(o, exact, per_axis);
    if (sub == sweep)
      return run_sweep(o);
    if (sub == demo)
      return run_demo(o);
    if (sub == selfcheck)
      return run_checks();
  } catch (const Error& e) {
    std::cerr << "dgrf " << sub->get_name() << ": ";
    if (exit_code(e) == 3)
      std::cerr << "stage '" << (e.stage().empty() ? sub->get_name() : e.stage()) << "' failed: ";
    std::cerr << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "dgrf " << sub->get_name() << ": stage '" << sub->get_name() << "' failed: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
