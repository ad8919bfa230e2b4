#pragma once

#include "dgrf/core.hpp"

#include <unsupported/Eigen/FFT>

#include <vector>

namespace dgrf {

//! Two-dimensional discrete Fourier transform of a dense complex matrix,
//! applied as column transforms followed by row transforms.
//! `inverse` includes the 1/(rows*cols) normalization.
class Fft2
{
public:
  void forward(Eigen::MatrixXcd& a) { apply(a, false); }
  void inverse(Eigen::MatrixXcd& a) { apply(a, true); }

private:
  void apply(Eigen::MatrixXcd& a, bool inv)
  {
    const Eigen::Index rows = a.rows();
    const Eigen::Index cols = a.cols();
    in_.resize(rows);
    out_.resize(rows);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i)
        in_[i] = a(i, j);
      inv ? fft_.inv(out_, in_) : fft_.fwd(out_, in_);
      for (Eigen::Index i = 0; i < rows; ++i)
        a(i, j) = out_[i];
    }
    in_.resize(cols);
    out_.resize(cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j)
        in_[j] = a(i, j);
      inv ? fft_.inv(out_, in_) : fft_.fwd(out_, in_);
      for (Eigen::Index j = 0; j < cols; ++j)
        a(i, j) = out_[j];
    }
  }

  Eigen::FFT<double> fft_;
  std::vector<Complex> in_;
  std::vector<Complex> out_;
};

//! Angular frequency of DFT bin k on a periodic interval of length L with M
//! samples, using the symmetric range [-M/2, M/2).
inline double fft_frequency(Eigen::Index k, Eigen::Index M, double L)
{
  const Eigen::Index kk = k < (M + 1) / 2 ? k : k - M;
  return 2.0 * kPi * static_cast<double>(kk) / L;
}

} // namespace dgrf
