#include "smcflow/spectral.hpp"

#include <algorithm>
#include <numbers>

#include <fftw3.h>

#include "smcflow/errors.hpp"

namespace smc::spectral {

struct Fft::Impl {
  int n = 0;
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  explicit Impl(int size) : n(size) {
    buf = fftw_alloc_complex(static_cast<std::size_t>(n));
    fwd = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    inv = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Impl() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(buf);
  }

  std::vector<cplx> run(fftw_plan plan, const std::vector<cplx>& x, double scale) const {
    if (static_cast<int>(x.size()) != n) throw InvalidInput("FFT input has the wrong length");
    std::copy(x.begin(), x.end(), reinterpret_cast<cplx*>(buf));
    fftw_execute(plan);
    const cplx* out = reinterpret_cast<const cplx*>(buf);
    std::vector<cplx> y(out, out + n);
    if (scale != 1.0)
      for (auto& v : y) v *= scale;
    return y;
  }
};

Fft::Fft(int n) {
  if (n < 1) throw InvalidInput("FFT length must be positive");
  impl_ = std::make_unique<Impl>(n);
}
Fft::~Fft() = default;
Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

int Fft::size() const { return impl_->n; }

std::vector<cplx> Fft::forward(const std::vector<cplx>& x) const {
  return impl_->run(impl_->fwd, x, 1.0);
}
std::vector<cplx> Fft::inverse(const std::vector<cplx>& x) const {
  return impl_->run(impl_->inv, x, 1.0 / impl_->n);
}

std::vector<double> wavenumbers(int n, double length) {
  std::vector<double> k(n);
  const double base = 2.0 * std::numbers::pi / length;
  for (int j = 0; j < n; ++j) k[j] = base * (j <= n / 2 ? j : j - n);
  return k;
}

Differentiator::Differentiator(int n, double length)
    : fft_(n), length_(length), k_(wavenumbers(n, length)) {
  if (!(length > 0.0)) throw InvalidInput("domain length must be positive");
}

std::vector<double> Differentiator::apply(const std::vector<double>& f, int m) const {
  const int n = size();
  std::vector<cplx> hat = fft_.forward(std::vector<cplx>(f.begin(), f.end()));
  for (int j = 0; j < n; ++j) {
    const bool nyquist = n % 2 == 0 && j == n / 2;
    if (nyquist && m % 2 == 1) {
      hat[j] = 0.0;
      continue;
    }
    cplx factor = 1.0;
    for (int r = 0; r < m; ++r) factor *= cplx(0.0, k_[j]);
    hat[j] *= factor;
  }
  const std::vector<cplx> back = fft_.inverse(hat);
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j) out[j] = back[j].real();
  return out;
}

std::vector<double> Differentiator::integrate_fluctuation(const std::vector<double>& f) const {
  const int n = size();
  std::vector<cplx> hat = fft_.forward(std::vector<cplx>(f.begin(), f.end()));
  hat[0] = 0.0;
  for (int j = 1; j < n; ++j) {
    if (n % 2 == 0 && j == n / 2)
      hat[j] = 0.0;
    else
      hat[j] /= cplx(0.0, k_[j]);
  }
  const std::vector<cplx> back = fft_.inverse(hat);
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j) out[j] = back[j].real() - back[0].real();
  return out;
}

}  // namespace smc::spectral
