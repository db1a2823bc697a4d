#pragma once

// Internal numerics shared by the representation and dynamics modules.

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

#include "gplvc/representation.hpp"

namespace gplvc::detail {

// Dense symmetric eigendecomposition (LAPACK dsyevd, divide and conquer).
Eigensystem eigh(const Mat& A);

// C = alpha * A * B + beta * C through BLAS zgemm (multithreaded OpenBLAS);
// the TCL2 inner loop lives on this.
void zgemm_nn(cplx alpha, const CMat& A, const CMat& B, cplx beta, CMat& C);

// y = M * x for real M and complex x.
inline CVec real_times_complex(const Mat& M, const CVec& x) {
  CVec out(M.rows());
  out.real() = M * x.real();
  out.imag() = M * x.imag();
  return out;
}
inline CMat real_times_complex(const Mat& M, const CMat& X) {
  CMat out(M.rows(), X.cols());
  out.real() = M * X.real();
  out.imag() = M * X.imag();
  return out;
}

// Cached FFTW plans for one 2D complex transform size. Plans are created per
// thread; execute-with-array reuse keeps applications allocation-free.
class Fft2D {
 public:
  Fft2D(int nx, int ny);
  ~Fft2D();
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  // In-place forward/backward on an nx*ny complex buffer (x-major).
  void forward(cplx* data) const;
  void backward_scaled(cplx* data) const;  // includes 1/(nx ny)

 private:
  int nx_, ny_;
  fftw_plan fwd_, bwd_;
  cplx* work_;
};

const Fft2D& fft_for(int nx, int ny);

// Signed Fourier wavenumbers 2*pi*m'/L; `drop_nyquist` zeroes the unpaired
// mode (first-derivative convention).
Vec fourier_wavenumbers(int n, double length, bool drop_nyquist);

// Composite Simpson weights for an odd number of uniformly spaced points.
Vec simpson_weights(int n_points, double h);

struct QuadratureSegment {
  Vec points;
  Vec weights;
};
// Simpson segments over [a, b], optionally split one-sidedly at `cut`
// (points get nudged by +-side_eps so field evaluations see the right side).
std::vector<QuadratureSegment> simpson_segments(double a, double b, int n_per_segment,
                                                std::optional<double> cut,
                                                double side_eps = 1e-9);

}  // namespace gplvc::detail
