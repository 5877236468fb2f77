#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace isac {

using cplx = std::complex<double>;

/// Reusable unnormalized FFTW plan. sign = -1 computes sum_n x_n e^{-2 pi i kn/N},
/// sign = +1 the conjugate kernel. Planning is not thread safe; execution is.
class FftPlan {
public:
    FftPlan(int n, int sign);
    FftPlan(int rows, int cols, int sign);
    ~FftPlan();
    FftPlan(FftPlan&&) noexcept;
    FftPlan& operator=(FftPlan&&) noexcept;
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    size_t size() const { return size_; }
    void execute(std::span<const cplx> in, std::span<cplx> out) const;
    std::vector<cplx> operator()(std::span<const cplx> in) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    size_t size_ = 0;
};

/// 2-D real transform pair on a rows x cols grid. The spectrum holds the
/// rows x (cols/2 + 1) nonredundant half; backward is unnormalized.
class RealFft2 {
public:
    RealFft2(int rows, int cols);
    ~RealFft2();
    RealFft2(RealFft2&&) noexcept;
    RealFft2& operator=(RealFft2&&) noexcept;
    RealFft2(const RealFft2&) = delete;
    RealFft2& operator=(const RealFft2&) = delete;

    size_t real_size() const { return real_size_; }
    size_t spectrum_size() const { return spectrum_size_; }
    void forward(std::span<const double> in, std::span<cplx> out) const;
    /// Destroys `in` (FFTW c2r overwrites its input).
    void backward(std::span<cplx> in, std::span<double> out) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    size_t real_size_ = 0, spectrum_size_ = 0;
};

}  // namespace isac
