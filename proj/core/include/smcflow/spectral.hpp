#pragma once

// Periodic Fourier transforms and spectral differentiation on uniform 1D grids.

#include <complex>
#include <memory>
#include <vector>

namespace smc::spectral {

using cplx = std::complex<double>;

/// Complex DFT of fixed length. forward() is unnormalized, inverse() divides
/// by n so that inverse(forward(x)) == x.
class Fft {
 public:
  explicit Fft(int n);
  ~Fft();
  Fft(Fft&&) noexcept;
  Fft& operator=(Fft&&) noexcept;
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  int size() const;
  std::vector<cplx> forward(const std::vector<cplx>& x) const;
  std::vector<cplx> inverse(const std::vector<cplx>& x) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Angular wavenumbers 2 pi j / L in FFT order (0, 1, ..., n/2, -n/2+1, ..., -1).
std::vector<double> wavenumbers(int n, double length);

/// Derivatives of real periodic samples by multiplication with (ik)^m.
/// For odd m the Nyquist mode is dropped so that real data stays real.
class Differentiator {
 public:
  Differentiator(int n, double length);

  int size() const { return fft_.size(); }
  double length() const { return length_; }
  std::vector<double> apply(const std::vector<double>& f, int m = 1) const;
  /// Antiderivative of the zero-mean part, pinned to 0 at index 0.
  std::vector<double> integrate_fluctuation(const std::vector<double>& f) const;

 private:
  Fft fft_;
  double length_;
  std::vector<double> k_;
};

}  // namespace smc::spectral
