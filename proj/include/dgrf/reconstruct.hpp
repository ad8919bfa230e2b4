#pragma once

#include "dgrf/bergman.hpp"
#include "dgrf/dilatation.hpp"
#include "dgrf/qcmap.hpp"
#include "dgrf/qvar.hpp"

#include <memory>

namespace dgrf {

//! How log|g'| is carried past the radius where the inverse map is available.
enum class DataExtension
{
  rescaled_disk, // project on the disk of the data radius, then rescale the argument
  nearest_radius // continue by the value at the same argument on the data radius
};

std::string to_string(DataExtension e);
DataExtension data_extension_from_string(const std::string& s);

struct ReconstructOptions
{
  Disk U{};
  KernelKind kernel = KernelKind::triweight;
  BandwidthSchedule bandwidth{ 0.48, 0.22 };
  DilatationOptions dilatation{};
  QCMapOptions qcmap{};
  double rho_eval = 0.9;
  int degree = 24;
  int q_r = 64;
  int q_theta = 256;
  int q_seg = 32;
  double max_masked_fraction = 0.05;
  DataExtension extension = DataExtension::rescaled_disk;
};

//! log|g'| sampled at node_scale times the unit-disk quadrature nodes; nodes
//! beyond the invertible radius carry the value at the same argument on that radius.
struct LogGprime
{
  Eigen::VectorXd values;
  double node_scale = 1.0;
  double at_zero = 0.0;
  Eigen::Array<bool, Eigen::Dynamic, 1> masked;
  double data_radius = 1.0;

  double masked_fraction() const
  {
    return masked.size() ? double(masked.count()) / double(masked.size()) : 0.0;
  }
};

//! tau(f^{-1}(w)) - log|d f(f^{-1}(w))| at node_scale * nodes.
LogGprime estimate_log_gprime(const std::function<double(Complex)>& tau, const QCMap& m,
                              const Eigen::VectorXcd& nodes, double max_masked_fraction = 0.05,
                              double node_scale = 1.0);

//! g(w) = integral of exp(P(s)) ds from 0 to w.
struct ConformalFactor
{
  HolomorphicPoly log_derivative;
  int q_seg = 32;

  Complex operator()(Complex w) const { return integrate_exp_along_segment(log_derivative, w, q_seg); }
  Complex derivative(Complex w) const { return std::exp(log_derivative(w)); }
};

//! Projects phi (on the disk of radius node_scale) and integrates exp of the result.
ConformalFactor reconstruct_g(const LogGprime& phi, int N, const DiskQuadrature& quad, int q_seg = 32);

struct ReconstructionProvenance
{
  int n = 0;
  double b = 0.0;
  std::uint64_t seed = 0;
  bool exact = false;
  std::string model;
  std::string deformation;
};

//! f_hat = g o f_mu on the sub-disk of U of radius rho_eval r.
class ReconstructedMap
{
public:
  Complex operator()(Complex z) const;
  bool evaluable(Complex z) const;

  const QCMap& qcmap() const { return *qcmap_; }
  const ConformalFactor& g() const { return g_; }
  const LogGprime& log_gprime() const { return phi_; }
  const std::shared_ptr<const DilatationField>& field() const { return field_; }
  double rho_eval() const { return rho_eval_; }
  const Disk& U() const { return U_; }
  const ReconstructionProvenance& provenance() const { return provenance_; }
  //! sup |Re P(phi) - phi| over nodes within the data radius.
  double projection_residual() const { return projection_residual_; }

private:
  friend ReconstructedMap reconstruct_from(const std::function<double(Complex)>&, QCMap,
                                           std::shared_ptr<const DilatationField>, const ReconstructOptions&,
                                           ReconstructionProvenance);

  std::shared_ptr<const QCMap> qcmap_;
  std::shared_ptr<const DilatationField> field_;
  ConformalFactor g_;
  LogGprime phi_;
  Disk U_;
  double rho_eval_ = 0.9;
  double projection_residual_ = 0.0;
  ReconstructionProvenance provenance_;
};

//! Shared tail of the pipeline: log|g'| -> projection -> composition.
ReconstructedMap reconstruct_from(const std::function<double(Complex)>& tau, QCMap m,
                                  std::shared_ptr<const DilatationField> field, const ReconstructOptions& options,
                                  ReconstructionProvenance provenance);

//! Lattice points on which mu and tau are estimated for the given U.
RegularGrid estimation_points(const Grid& grid, const Disk& U, double b, const Kernel& K);

//! Full statistical pipeline on a sample. The model attached to the sample
//! supplies alpha and gamma; otherwise pass them explicitly.
ReconstructedMap reconstruct_f(const FieldSample& Y, const ReconstructOptions& options);
ReconstructedMap reconstruct_f(const FieldSample& Y, double alpha, double gamma, const ReconstructOptions& options);

//! Same pipeline with the catalog mu and tau of `f` in place of estimates.
ReconstructedMap reconstruct_f_exact(const Deformation& f, const ReconstructOptions& options);

} // namespace dgrf
