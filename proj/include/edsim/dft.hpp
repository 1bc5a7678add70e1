#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

namespace edsim {

template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

namespace detail {
template <typename Scalar>
Eigen::FFT<Scalar>& fft_engine() {
  // Eigen::FFT caches plans internally and is not safe to share.
  thread_local Eigen::FFT<Scalar> engine = [] {
    Eigen::FFT<Scalar> e;
    e.SetFlag(Eigen::FFT<Scalar>::Unscaled);
    return e;
  }();
  return engine;
}
}  // namespace detail

/// Unitary forward DFT: X[m] = N^{-1/2} sum_n x[n] e^{-j 2 pi m n / N}.
template <typename Scalar>
ComplexVector<Scalar> unitary_dft(const ComplexVector<Scalar>& x) {
  ComplexVector<Scalar> out(x.size());
  detail::fft_engine<Scalar>().fwd(out, x);
  out *= Scalar(1) / std::sqrt(static_cast<Scalar>(x.size()));
  return out;
}

/// Unitary inverse DFT.
template <typename Scalar>
ComplexVector<Scalar> unitary_idft(const ComplexVector<Scalar>& spectrum) {
  ComplexVector<Scalar> out(spectrum.size());
  detail::fft_engine<Scalar>().inv(out, spectrum);
  out *= Scalar(1) / std::sqrt(static_cast<Scalar>(spectrum.size()));
  return out;
}

}  // namespace edsim
