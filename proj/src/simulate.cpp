#include "dgrf/simulate.hpp"

#include "dgrf/fft.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

namespace dgrf {

namespace {

void warn_to_stderr(const std::string& m)
{
  std::cerr << "warning: " << m << "\n";
}

std::function<void(const std::string&)>& warning_handler()
{
  static std::function<void(const std::string&)> handler = warn_to_stderr;
  return handler;
}

// x * n, snapped to the nearest integer when it is one up to rounding.
double snapped(double x, int n)
{
  const double v = x * n;
  const double r = std::round(v);
  return std::abs(v - r) < 1e-9 * std::max(1.0, std::abs(v)) ? r : v;
}

int next_pow2(Eigen::Index v)
{
  int p = 1;
  while (p < v)
    p <<= 1;
  return p;
}

} // namespace

void set_warning_handler(std::function<void(const std::string&)> handler)
{
  warning_handler() = handler ? std::move(handler) : warn_to_stderr;
}

void warn(const std::string& message)
{
  if (warning_handler())
    warning_handler()(message);
}

Grid::Grid(const GridSpec& spec)
  : spec_(spec)
  , n_(spec.n)
{
  if (spec.n < 1)
    throw Error(ErrorCode::domain, "grid density n must be positive");
  if (spec.domain.empty())
    throw Error(ErrorCode::domain, "grid domain is empty");
  if (spec.margin < 0)
    throw Error(ErrorCode::domain, "grid margin must be nonnegative");
  if (spec.n < 4)
    warn("grid density n = " + std::to_string(spec.n) + " is below 4");

  auto axis = [&](double lo, double hi, int& first, int& int_last, int& last) {
    const double vlo = snapped(lo, n_);
    const double vhi = snapped(hi, n_);
    first = int(std::floor(vlo)) + 1;
    int_last = int(std::ceil(vhi)) - 1;
    last = spec.margin > 0 ? int(std::floor(vhi + spec.margin)) : int_last;
  };
  axis(spec.domain.x0, spec.domain.x1, i_first_, i_int_last_, i_last_);
  axis(spec.domain.y0, spec.domain.y1, j_first_, j_int_last_, j_last_);
  if (i_int_last_ < i_first_ || j_int_last_ < j_first_)
    throw Error(ErrorCode::domain, "grid has no interior points at this density");
}

std::optional<std::pair<int, int>> Grid::lattice_index(const Vec2& t) const
{
  const double x = t.x() * n_;
  const double y = t.y() * n_;
  const double rx = std::round(x);
  const double ry = std::round(y);
  if (std::abs(x - rx) > 1e-7 || std::abs(y - ry) > 1e-7)
    return std::nullopt;
  return std::make_pair(int(rx), int(ry));
}

std::vector<Vec2> Grid::points() const
{
  std::vector<Vec2> out;
  out.reserve(size());
  for (int j = j_first_; j <= j_last_; ++j)
    for (int i = i_first_; i <= i_last_; ++i)
      out.push_back(point(i, j));
  return out;
}

std::vector<Vec2> make_grid(const GridSpec& spec)
{
  return Grid(spec).points();
}

std::string to_string(SamplerTag tag)
{
  return tag == SamplerTag::exact_cholesky ? "exact-cholesky" : "circulant-interp";
}

SamplerTag sampler_from_string(const std::string& s)
{
  if (s == "exact-cholesky" || s == "exact")
    return SamplerTag::exact_cholesky;
  if (s == "circulant-interp" || s == "fast")
    return SamplerTag::circulant_interp;
  throw Error(ErrorCode::config, "unknown sampler tag '" + s + "'");
}

double standard_normal(std::uint64_t seed, std::uint64_t counter)
{
  const std::uint64_t a = mix64(split_seed(seed, 2 * counter));
  const std::uint64_t b = mix64(split_seed(seed, 2 * counter + 1));
  const double u1 = (double((a >> 11) + 1)) * 0x1.0p-53; // (0, 1]
  const double u2 = double(b >> 11) * 0x1.0p-53;         // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

Eigen::VectorXd standard_normals(std::uint64_t seed, Eigen::Index count)
{
  Eigen::VectorXd w(count);
  for (Eigen::Index k = 0; k < count; ++k)
    w[k] = standard_normal(seed, std::uint64_t(k));
  return w;
}

// ---------------------------------------------------------------------------

ExactSampler::ExactSampler(const CovarianceModel& model,
                           const Deformation& deformation,
                           const GridSpec& spec,
                           ExactSamplerOptions options)
  : model_(model)
  , deformation_(deformation)
  , grid_(spec)
{
  const Eigen::Index N = grid_.size();
  if (N > options.cap) {
    std::ostringstream os;
    os << "exact sampler needs a " << N << "x" << N << " factorization (cap " << options.cap
       << "); use the circulant sampler for this grid";
    throw Error(ErrorCode::cap_exceeded, os.str());
  }

  Eigen::Matrix2Xd image(2, N);
  for (Eigen::Index k = 0; k < N; ++k)
    image.col(k) = deformation_(grid_.point(k));

  const double r0 = model_(0.0);
  for (double rel : { 1e-12, 1e-11, 1e-10, 1e-9, 1e-8 }) {
    factor_.resize(N, N);
    for (Eigen::Index j = 0; j < N; ++j) {
      factor_(j, j) = r0 * (1.0 + rel);
      for (Eigen::Index i = j + 1; i < N; ++i)
        factor_(i, j) = model_((image.col(i) - image.col(j)).norm());
    }
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>, Eigen::Lower> llt(factor_);
    if (llt.info() == Eigen::Success) {
      jitter_ = rel * r0;
      return;
    }
  }
  factor_.resize(0, 0);
  throw Error(ErrorCode::not_positive_definite,
              "covariance matrix is not positive definite after jitter 1e-8 R(0)");
}

FieldSample ExactSampler::draw(std::uint64_t seed) const
{
  const Eigen::VectorXd w = standard_normals(seed, grid_.size());
  FieldSample s{ grid_, factor_.triangularView<Eigen::Lower>() * w, seed,
                 SamplerTag::exact_cholesky, model_, deformation_ };
  return s;
}

FieldSample sample_exact(const CovarianceModel& model,
                         const Deformation& deformation,
                         const GridSpec& spec,
                         std::uint64_t seed,
                         ExactSamplerOptions options)
{
  return ExactSampler(model, deformation, spec, options).draw(seed);
}

// ---------------------------------------------------------------------------

FastSampler::FastSampler(const CovarianceModel& model,
                         const Deformation& deformation,
                         const GridSpec& spec,
                         FastSamplerOptions options)
  : model_(model)
  , deformation_(deformation)
  , grid_(spec)
{
  if (options.oversample < 2)
    throw Error(ErrorCode::domain, "fast sampler oversample factor q must be at least 2");

  const Eigen::Index N = grid_.size();
  image_.resize(2, N);
  double smin = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < N; ++k) {
    const MapJet j = deformation_.jet(to_complex(grid_.point(k)));
    image_.col(k) = to_vec(j.value);
    smin = std::min(smin, std::abs(std::abs(j.dz) - std::abs(j.dzbar)));
  }
  if (!(smin > 0.0))
    throw Error(ErrorCode::domain, "deformation Jacobian is singular on the grid");

  lo_ = image_.rowwise().minCoeff();
  const Eigen::Vector2d hi = image_.rowwise().maxCoeff();
  dx_ = smin / (double(options.oversample) * grid_.n());
  mx_ = Eigen::Index(std::ceil((hi.x() - lo_.x()) / dx_)) + 2;
  my_ = Eigen::Index(std::ceil((hi.y() - lo_.y()) / dx_)) + 2;

  Eigen::Index Mx = next_pow2(2 * mx_);
  Eigen::Index My = next_pow2(2 * my_);
  Eigen::MatrixXcd lambda;
  Fft2 fft;
  bool ok = false;
  double negative_mass = 1.0;
  for (int attempt = 0; attempt <= options.max_padding_doublings; ++attempt) {
    if (Mx * My > options.max_cells) {
      Mx /= 2;
      My /= 2;
      break;
    }
    lambda.resize(Mx, My);
    for (Eigen::Index b = 0; b < My; ++b) {
      const double ly = dx_ * double(std::min(b, My - b));
      for (Eigen::Index a = 0; a < Mx; ++a) {
        const double lx = dx_ * double(std::min(a, Mx - a));
        lambda(a, b) = model_(std::hypot(lx, ly));
      }
    }
    fft.forward(lambda);
    const double lmax = lambda.real().maxCoeff();
    const double lmin = lambda.real().minCoeff();
    if (lmin >= -1e-10 * lmax) {
      ok = true;
      break;
    }
    const Eigen::ArrayXd re = lambda.real().reshaped().array();
    negative_mass = -re.min(0.0).sum() / re.abs().sum();
    if (attempt == options.max_padding_doublings)
      break;
    Mx *= 2;
    My *= 2;
  }
  if (!ok) {
    if (lambda.size() == 0 || negative_mass > options.max_negative_mass)
      throw Error(ErrorCode::embedding_failure,
                  "circulant embedding is not nonnegative definite at the largest padding (negative eigenvalue mass " +
                    std::to_string(negative_mass) + ")");
    clipped_mass_ = negative_mass;
    warn("circulant embedding clipped a negative eigenvalue mass of " + std::to_string(negative_mass));
  }
  const double M = double(Mx) * double(My);
  sqrt_lambda_ = (lambda.real().array().max(0.0) / M).sqrt().matrix();
}

FieldSample FastSampler::draw(std::uint64_t seed) const
{
  const Eigen::Index Mx = sqrt_lambda_.rows(), My = sqrt_lambda_.cols();
  Eigen::MatrixXcd field(Mx, My);
  for (Eigen::Index b = 0; b < My; ++b)
    for (Eigen::Index a = 0; a < Mx; ++a) {
      const std::uint64_t k = std::uint64_t(b) * std::uint64_t(Mx) + std::uint64_t(a);
      const Complex eps(standard_normal(seed, 2 * k), standard_normal(seed, 2 * k + 1));
      field(a, b) = sqrt_lambda_(a, b) * eps;
    }
  Fft2 fft;
  fft.forward(field);

  const Eigen::Index N = grid_.size();
  FieldSample s{ grid_, Eigen::VectorXd(N), seed, SamplerTag::circulant_interp, model_, deformation_ };
  for (Eigen::Index k = 0; k < N; ++k) {
    const double u = (image_(0, k) - lo_.x()) / dx_;
    const double v = (image_(1, k) - lo_.y()) / dx_;
    const Eigen::Index a = std::min<Eigen::Index>(Eigen::Index(u), mx_ - 2);
    const Eigen::Index b = std::min<Eigen::Index>(Eigen::Index(v), my_ - 2);
    const double fu = u - double(a);
    const double fv = v - double(b);
    s.values[k] = (1 - fu) * (1 - fv) * field(a, b).real() + fu * (1 - fv) * field(a + 1, b).real() +
                  (1 - fu) * fv * field(a, b + 1).real() + fu * fv * field(a + 1, b + 1).real();
  }
  return s;
}

FieldSample sample_fast(const CovarianceModel& model,
                        const Deformation& deformation,
                        const GridSpec& spec,
                        std::uint64_t seed,
                        FastSamplerOptions options)
{
  return FastSampler(model, deformation, spec, options).draw(seed);
}

} // namespace dgrf
