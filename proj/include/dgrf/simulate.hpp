#pragma once

#include "dgrf/core.hpp"
#include "dgrf/models.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dgrf {

//! Observation lattice: Omega intersected with Z^2/n, plus `margin` extra
//! layers of lattice points on the +x and +y sides (layers strictly beyond
//! the boundary, together with the boundary layer itself when it falls on
//! the lattice).
struct GridSpec
{
  int n = 64;
  Rect domain{};
  int margin = 2;
};

class Grid
{
public:
  explicit Grid(const GridSpec& spec);

  int n() const { return n_; }
  const GridSpec& spec() const { return spec_; }

  // Lattice index ranges, inclusive.
  int i_first() const { return i_first_; }
  int i_last() const { return i_last_; }
  int j_first() const { return j_first_; }
  int j_last() const { return j_last_; }
  int i_interior_last() const { return i_int_last_; }
  int j_interior_last() const { return j_int_last_; }

  int nx() const { return i_last_ - i_first_ + 1; }
  int ny() const { return j_last_ - j_first_ + 1; }
  Eigen::Index size() const { return Eigen::Index(nx()) * ny(); }
  Eigen::Index interior_size() const
  {
    return Eigen::Index(i_int_last_ - i_first_ + 1) * (j_int_last_ - j_first_ + 1);
  }

  bool contains(int i, int j) const
  {
    return i >= i_first_ && i <= i_last_ && j >= j_first_ && j <= j_last_;
  }
  //! True for points of Omega_n (excludes the margin).
  bool interior(int i, int j) const
  {
    return i >= i_first_ && i <= i_int_last_ && j >= j_first_ && j <= j_int_last_;
  }

  //! Row-major storage index (rows are constant y).
  Eigen::Index index(int i, int j) const
  {
    return Eigen::Index(j - j_first_) * nx() + (i - i_first_);
  }
  Vec2 point(int i, int j) const { return { double(i) / n_, double(j) / n_ }; }
  Vec2 point(Eigen::Index k) const
  {
    return point(i_first_ + int(k % nx()), j_first_ + int(k / nx()));
  }

  //! Lattice indices of `t`, if it is a lattice point (up to rounding).
  std::optional<std::pair<int, int>> lattice_index(const Vec2& t) const;

  std::vector<Vec2> points() const;

private:
  GridSpec spec_;
  int n_;
  int i_first_, i_int_last_, i_last_;
  int j_first_, j_int_last_, j_last_;
};

//! Ordered (row-major) list of all grid points including the margin.
std::vector<Vec2> make_grid(const GridSpec& spec);

enum class SamplerTag
{
  exact_cholesky,
  circulant_interp
};

std::string to_string(SamplerTag tag);
SamplerTag sampler_from_string(const std::string& s);

//! One realization of Y = Z o f on a grid.
struct FieldSample
{
  Grid grid;
  Eigen::VectorXd values;
  std::uint64_t seed = 0;
  SamplerTag sampler = SamplerTag::exact_cholesky;
  std::optional<CovarianceModel> model;
  std::optional<Deformation> deformation;

  double at(int i, int j) const { return values[grid.index(i, j)]; }
};

//! Counter-based standard normal stream: entry k depends only on (seed, k).
double standard_normal(std::uint64_t seed, std::uint64_t counter);
Eigen::VectorXd standard_normals(std::uint64_t seed, Eigen::Index count);

struct ExactSamplerOptions
{
  Eigen::Index cap = 12000;
};

//! Dense covariance factorization reused across draws.
class ExactSampler
{
public:
  ExactSampler(const CovarianceModel& model,
               const Deformation& deformation,
               const GridSpec& spec,
               ExactSamplerOptions options = {});

  FieldSample draw(std::uint64_t seed) const;

  const Grid& grid() const { return grid_; }
  double jitter() const { return jitter_; }

private:
  CovarianceModel model_;
  Deformation deformation_;
  Grid grid_;
  Eigen::MatrixXd factor_; // lower triangle holds L
  double jitter_ = 0.0;
};

FieldSample sample_exact(const CovarianceModel& model,
                         const Deformation& deformation,
                         const GridSpec& spec,
                         std::uint64_t seed,
                         ExactSamplerOptions options = {});

struct FastSamplerOptions
{
  int oversample = 4;
  int max_padding_doublings = 2;
  Eigen::Index max_cells = Eigen::Index(1) << 24;
  //! Largest fraction of negative eigenvalue mass clipped to zero when no
  //! padding makes the embedding nonnegative definite.
  double max_negative_mass = 0.01;
};

//! Circulant-embedding simulation of Z on a fine lattice covering f(Omega),
//! followed by bilinear interpolation at the deformed grid points.
//! The embedding spectrum is computed once; draws only cost one FFT.
class FastSampler
{
public:
  FastSampler(const CovarianceModel& model,
              const Deformation& deformation,
              const GridSpec& spec,
              FastSamplerOptions options = {});

  FieldSample draw(std::uint64_t seed) const;

  const Grid& grid() const { return grid_; }
  //! Fraction of eigenvalue mass clipped to zero (0 when the embedding is exact).
  double clipped_mass() const { return clipped_mass_; }

private:
  CovarianceModel model_;
  Deformation deformation_;
  Grid grid_;
  Eigen::Matrix2Xd image_;
  Eigen::Vector2d lo_;
  double dx_ = 0.0;
  Eigen::Index mx_ = 0, my_ = 0;
  Eigen::MatrixXd sqrt_lambda_; // sqrt(max(lambda, 0) / M)
  double clipped_mass_ = 0.0;
};

FieldSample sample_fast(const CovarianceModel& model,
                        const Deformation& deformation,
                        const GridSpec& spec,
                        std::uint64_t seed,
                        FastSamplerOptions options = {});

//! Routes non-fatal diagnostics; defaults to stderr, which an empty handler restores.
void set_warning_handler(std::function<void(const std::string&)> handler);
void warn(const std::string& message);

} // namespace dgrf
