#include "dgrf/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace dgrf;
using doctest::Approx;

namespace {

Eigen::VectorXcd some_points()
{
  std::mt19937_64 rng(2);
  std::normal_distribution<double> N;
  Eigen::VectorXcd f(40);
  for (auto& v : f)
    v = { N(rng), N(rng) };
  return f;
}

ErrorCode config_code(const std::string& text)
{
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::numerical; // sentinel: accepted
}

const char* kSmallSweep = R"(
[model]
family = powered-exponential
alpha = 1

[deformation]
kind = affine
matrix = 2 0 0 1

[grid]
n = 24
sampler = exact
seed = 7

[bandwidth]
c_b = 0.6
use = variation

[sweep]
n = 24 32
reconstruct = false
)";

} // namespace

TEST_CASE("alignment examples")
{
  const Eigen::VectorXcd f = some_points();
  const AlignmentResult same = align(f, f);
  CHECK(std::abs(same.theta) < 1e-15);
  CHECK(std::abs(same.c) < 1e-14);
  CHECK(same.sup_error < 1e-14);
  CHECK(same.count == 40);

  const Eigen::VectorXcd g = (std::polar(1.0, kPi / 4) * f.array() + Complex(1, 2)).matrix();
  const AlignmentResult r = align(f, g);
  CHECK(r.theta == Approx(kPi / 4).epsilon(1e-14));
  CHECK(std::abs(r.c - Complex(1, 2)) < 1e-14);
  CHECK(r.sup_error < 1e-14);
  CHECK(r.rms_error < 1e-14);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::VectorXcd noisy = f;
  for (auto& v : noisy) {
    const Complex e(U(rng), U(rng));
    v += 0.01 * e / std::max(1.0, std::abs(e));
  }
  CHECK(align(f, noisy).sup_error <= 0.02);
  // the closed form is the least-squares optimum: nearby motions do no better
  const auto sse = [&](double th, Complex c) { return (std::polar(1.0, th) * f.array() + c - noisy.array()).abs2().sum(); };
  const AlignmentResult best = align(f, noisy);
  for (double d : { -1e-3, 1e-3 }) {
    CHECK(sse(best.theta, best.c) <= sse(best.theta + d, best.c));
    CHECK(sse(best.theta, best.c) <= sse(best.theta, best.c + d));
  }

  Eigen::VectorXcd coincident = Eigen::VectorXcd::Constant(5, Complex(0.3, 0.1));
  CHECK_THROWS_AS(align(coincident, f.head(5)), Error);
  CHECK_THROWS_AS(align(f.head(1), f.head(1)), Error);
  CHECK_THROWS_AS(align(f.head(3), f.head(4)), Error);
}

TEST_CASE("disk sample points")
{
  const Disk U{};
  const Eigen::VectorXcd p = disk_sample_points(U, 0.5, 21);
  CHECK(p.size() > 300);
  CHECK(p.size() < 21 * 21);
  for (const Complex z : p)
    CHECK(std::abs(z - U.center) <= 0.15 + 1e-12);
}

TEST_CASE("configuration parsing")
{
  const ExperimentConfig c = parse_config(R"(
# comment
[model]
family = matern
nu = 0.4
range = 0.5

[deformation]
kind = quadratic
eps = 0.15 0.0
rotation = 0.5
translation = 0.1 -0.2

[grid]
n = 64
domain = 0 0 1 1
margin = 2
seed = 11

[bandwidth]
c_b = 0.45
beta_prime = 0.2
kernel = triweight

[solver]
center = 0.5 0.5
radius = 0.3
rho_eval = 0.5
M = 256

[sweep]
n = 64 96
metric_fraction = 0.5
output_dir = out
)");
  CHECK(c.model.local_expansion().alpha == Approx(0.8));
  CHECK(c.model.local_expansion().sigma_c == Approx(1.0));
  CHECK(c.deformation.mu(Complex(0.3, 0.2)) == Deformation::quadratic({ 0.15, 0 }).mu(Complex(0.3, 0.2)));
  CHECK(std::abs(c.deformation(0.0) - Complex(0.1, -0.2)) < 1e-15);
  CHECK(c.grid.n == 64);
  CHECK(c.seed == 11);
  CHECK(c.bandwidth.c_b == 0.45);
  CHECK(c.bandwidth.beta_prime == 0.2);
  CHECK(c.qcmap.M == 256);
  CHECK(c.sweep_n == std::vector<int>{ 64, 96 });
  CHECK(c.output_dir == "out");
  CHECK(c.reconstruct_options().rho_eval == 0.5);
  CHECK(c.reconstruct_options().qcmap.M == 256);

  // defaults: the shipped bandwidth exponent follows gamma of the model
  const ExperimentConfig d = parse_config("[bandwidth]\nc_b = 0.48\n");
  CHECK(d.bandwidth.beta_prime == Approx(0.22));
  CHECK(d.seed == 20240601);
}

TEST_CASE("configuration errors are reported before computation")
{
  CHECK(config_code("[bandwidth]\nc_b = 0.48\nbeta_prime = 0.4\nuse = variation\n") == ErrorCode::config);
  CHECK(config_code("[bandwidth]\nc_b = 0.48\nbeta_prime = 0.25\n") == ErrorCode::config);
  CHECK(config_code("[bandwidth]\nc_b = 0.48\nbeta_prime = 0.3\nuse = variation\n[sweep]\nreconstruct = false\n") ==
        ErrorCode::numerical);
  CHECK(config_code("[model]\ncolour = red\n") == ErrorCode::config);
  CHECK(config_code("[models]\n") == ErrorCode::config);
  CHECK(config_code("[grid]\nn = sixty\n") == ErrorCode::config);
  CHECK(config_code("[grid\nn = 4\n") == ErrorCode::config);
  CHECK(config_code("[model]\nalpha = 2.5\n") == ErrorCode::config);
  CHECK(config_code("[deformation]\nkind = quadratic\neps = 0.8 0\n") == ErrorCode::config);
  CHECK(config_code("[deformation]\nkind = affine\nmatrix = 1 0 0 -1\n") == ErrorCode::config);
  CHECK(config_code("[bandwidth]\nc_b = 0.48\n[sweep]\nn = 96 64\n") == ErrorCode::config);
  CHECK(config_code("[bandwidth]\nc_b = 0.48\n[grid]\nn = 200\n") == ErrorCode::config);
  CHECK(config_code("[bandwidth]\nc_b = 0.48\n[solver]\nM = 300\n") == ErrorCode::config);
  // U too large for the estimation region at the bandwidth of the first n
  CHECK(config_code("[bandwidth]\nc_b = 1.2\n") == ErrorCode::config);
  CHECK(config_code("[bandwidth]\nc_b = 0.48\n[solver]\nrho_eval = 0.4\n[sweep]\nmetric_fraction = 0.5\n") ==
        ErrorCode::config);
  CHECK_THROWS_AS(load_config("/nonexistent/dgrf.ini"), Error);
}

TEST_CASE("sweep is deterministic and writes a stable CSV" * doctest::timeout(300))
{
  const ExperimentConfig c = parse_config(kSmallSweep);
  const SweepResult a = convergence_sweep(c);
  const SweepResult b = convergence_sweep(c);
  REQUIRE(a.rows.size() == 2);
  for (const SweepRow& r : a.rows) {
    CHECK(r.error.empty());
    CHECK(std::isfinite(r.sup_B_error));
    CHECK(std::isfinite(r.sup_mu_error));
    CHECK(std::isnan(r.aligned_error));
    CHECK(r.seed == split_seed(7, std::uint64_t(r.n)));
    CHECK(r.b == Approx(0.6 * std::pow(double(r.n), -0.22)));
  }
  CHECK_FALSE(a.theta.empty());
  CHECK(a.b_max == a.rows[0].b);

  const std::string csv = sweep_csv(a, c);
  CHECK(csv == sweep_csv(b, c));
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> data;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#')
      data.push_back(line);
  REQUIRE(data.size() == 3);
  CHECK(data[0] == "n,b,seed,sup_abs_B_minus_g,sup_g,sup_abs_mu_error,sup_abs_tau_error,aligned_sup_error,error");
  CHECK(data[1].rfind("24,", 0) == 0);
  CHECK(timing_csv(a).rfind("n,seconds\n24,", 0) == 0);

  const auto dir = std::filesystem::temp_directory_path() / "dgrf_test_harness";
  std::filesystem::create_directories(dir);
  write_atomic(dir / "sweep.csv", csv);
  std::ifstream f(dir / "sweep.csv");
  std::stringstream back;
  back << f.rdbuf();
  CHECK(back.str() == csv);
  CHECK_FALSE(std::filesystem::exists(dir / "sweep.csv.tmp"));
  CHECK_THROWS_AS(write_atomic(dir / "missing" / "x.csv", csv), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("sweep records stage failures and continues")
{
  ExperimentConfig c = parse_config(kSmallSweep);
  // a smooth covariance on an unpadded torus needs clipping, which this forbids
  c.model = CovarianceModel::powered_exponential(1.0, 1.9).normalized();
  c.sampler.tag = SamplerTag::circulant_interp;
  c.sampler.fast.oversample = 2;
  c.sampler.fast.max_padding_doublings = 0;
  c.sampler.fast.max_negative_mass = 0.0;
  const SweepResult r = convergence_sweep(c);
  REQUIRE(r.rows.size() == 2);
  for (const SweepRow& row : r.rows) {
    CHECK(row.error.find("embedding") != std::string::npos);
    CHECK(std::isnan(row.sup_B_error));
  }
  const std::string csv = sweep_csv(r, c);
  CHECK(csv.find("embedding") != std::string::npos);
}

TEST_CASE("sup |mu_hat| falls with n for the identity deformation" * doctest::timeout(600))
{
  ExperimentConfig c = parse_config(R"(
[grid]
sampler = circulant-interp
oversample = 2
[bandwidth]
use = variation
[sweep]
n = 64 128
reconstruct = false
)");
  const SweepResult r = convergence_sweep(c);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].error.empty());
  CHECK(r.rows[1].error.empty());
  MESSAGE("sup |mu_hat|: " << r.rows[0].sup_mu_error << " -> " << r.rows[1].sup_mu_error);
  CHECK(r.rows[1].sup_mu_error < r.rows[0].sup_mu_error);
}
