#pragma once

#include "dgrf/core.hpp"
#include "dgrf/models.hpp"
#include "dgrf/qvar.hpp"
#include "dgrf/reconstruct.hpp"
#include "dgrf/simulate.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dgrf {

//! Best rigid motion e^{i theta} f + c onto the estimate, with residuals.
struct AlignmentResult
{
  double theta = 0.0;
  Complex c{};
  double sup_error = 0.0;
  double rms_error = 0.0;
  Eigen::Index count = 0;
  std::string set;
};

AlignmentResult align(const Eigen::VectorXcd& truth, const Eigen::VectorXcd& estimate, std::string set = {});

//! Square-lattice points with `per_axis` nodes per side restricted to the
//! closed sub-disk of radius fraction * r.
Eigen::VectorXcd disk_sample_points(const Disk& U, double fraction, int per_axis = 21);

//! Aligned error of f_hat against the truth on the sub-disk of radius fraction * r.
AlignmentResult aligned_error(const ReconstructedMap& fhat, const Deformation& truth, double fraction = 0.5,
                              int per_axis = 21);

struct SamplerConfig
{
  SamplerTag tag = SamplerTag::exact_cholesky;
  ExactSamplerOptions exact{};
  FastSamplerOptions fast{};
};

FieldSample draw_sample(const CovarianceModel& model, const Deformation& f, const GridSpec& spec,
                        std::uint64_t seed, const SamplerConfig& sampler);

//! Everything a run needs, parsed from an INI-style text file.
struct ExperimentConfig
{
  CovarianceModel model = CovarianceModel::powered_exponential(1.0, 1.0).normalized();
  Deformation deformation = Deformation::identity();
  GridSpec grid{};
  SamplerConfig sampler{};
  std::uint64_t seed = 20240601;
  KernelKind kernel = KernelKind::triweight;
  BandwidthSchedule bandwidth{};
  bool bandwidth_derivative = true; // validate for reconstruction, not only variation
  Disk U{};
  double rho_eval = 0.9;
  double metric_fraction = 0.5;
  QCMapOptions qcmap{};
  int degree = 24;
  DataExtension extension = DataExtension::rescaled_disk;
  std::vector<int> sweep_n{ 64, 96 };
  std::string output_dir = ".";
  bool reconstruct = true;

  ReconstructOptions reconstruct_options() const;
  //! Throws Config on any inconsistency, before computation.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

//! One sweep row; `error` is non-empty when a stage failed.
struct SweepRow
{
  int n = 0;
  double b = 0.0;
  std::uint64_t seed = 0;
  double sup_B_error = std::numeric_limits<double>::quiet_NaN();
  double sup_g = std::numeric_limits<double>::quiet_NaN();
  double sup_mu_error = std::numeric_limits<double>::quiet_NaN();
  double sup_tau_error = std::numeric_limits<double>::quiet_NaN();
  double aligned_error = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
  std::string error;
};

struct SweepResult
{
  std::vector<SweepRow> rows;
  Rect theta{};         // compact set for variation metrics
  double b_max = 0.0;
  std::string theta_description;
};

//! Fixed compact set: Omega_n's evaluable region at the largest bandwidth of
//! the sweep, shared by every row.
Rect sweep_metric_region(const ExperimentConfig& config);

SweepResult convergence_sweep(const ExperimentConfig& config);

//! CSV with a '#' provenance header and 17 significant digits. Wall times
//! are left out so that identical configurations give identical files.
std::string sweep_csv(const SweepResult& result, const ExperimentConfig& config);
//! `n,seconds` per row.
std::string timing_csv(const SweepResult& result);

//! Writes via a temporary file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace dgrf
