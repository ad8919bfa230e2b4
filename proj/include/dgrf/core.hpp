#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dgrf {

using Complex = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorCode
{
  domain,
  config,
  not_positive_definite,
  cap_exceeded,
  embedding_failure,
  out_of_grid,
  support_clipped,
  degenerate_ellipse,
  degenerate_field,
  no_convergence,
  aliasing,
  riemann_map_inaccurate,
  inversion_failure,
  geometry,
  too_many_masked,
  numerical,
  io
};

const char* to_string(ErrorCode code);

//! Library-wide exception; `code()` identifies the failure class and
//! `stage()` the pipeline stage, when one was attached.
class Error : public std::runtime_error
{
public:
  Error(ErrorCode code, const std::string& detail, const std::string& stage = {})
    : std::runtime_error(std::string(to_string(code)) + ": " + (stage.empty() ? "" : "[" + stage + "] ") + detail)
    , code_(code)
    , detail_(detail)
    , stage_(stage)
  {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  const std::string& stage() const noexcept { return stage_; }

  Error in_stage(const std::string& stage) const { return Error(code_, detail_, stage); }

private:
  ErrorCode code_;
  std::string detail_;
  std::string stage_;
};

inline Complex to_complex(const Vec2& v) { return { v.x(), v.y() }; }
inline Vec2 to_vec(Complex z) { return { z.real(), z.imag() }; }

//! Axis-aligned rectangle (x0, x1) x (y0, y1).
struct Rect
{
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool contains(const Vec2& p) const
  {
    return p.x() >= x0 && p.x() <= x1 && p.y() >= y0 && p.y() <= y1;
  }
  Rect shrunk(double d) const { return { x0 + d, y0 + d, x1 - d, y1 - d }; }
  bool empty() const { return !(x1 > x0 && y1 > y0); }
};

struct Disk
{
  Complex center{ 0.5, 0.5 };
  double radius = 0.3;

  double diameter() const { return 2.0 * radius; }
};

// splitmix64 finalizer; the building block of every seeded stream here.
inline std::uint64_t mix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

//! Derives an independent child seed from a parent seed and a stream label.
inline std::uint64_t split_seed(std::uint64_t parent, std::uint64_t label)
{
  return mix64(parent ^ mix64(label + 0x632be59bd9b4e019ULL));
}

} // namespace dgrf
