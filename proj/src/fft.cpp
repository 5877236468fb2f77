#include "isac/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace isac {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

struct FftPlan::Impl {
    fftw_plan plan = nullptr;
    ~Impl() {
        if (plan != nullptr) {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(plan);
        }
    }
};

FftPlan::FftPlan(int n, int sign) : impl_(std::make_unique<Impl>()), size_(static_cast<size_t>(n)) {
    if (n < 1) {
        throw std::invalid_argument("FftPlan: size must be positive");
    }
    std::vector<cplx> scratch_in(size_);
    std::vector<cplx> scratch_out(size_);
    auto* in = reinterpret_cast<fftw_complex*>(scratch_in.data());
    auto* out = reinterpret_cast<fftw_complex*>(scratch_out.data());
    std::lock_guard lock(planner_mutex());
    impl_->plan = fftw_plan_dft_1d(n, in, out, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
}

FftPlan::FftPlan(int rows, int cols, int sign)
    : impl_(std::make_unique<Impl>()), size_(static_cast<size_t>(rows) * static_cast<size_t>(cols)) {
    if (rows < 1 || cols < 1) {
        throw std::invalid_argument("FftPlan: size must be positive");
    }
    std::vector<cplx> scratch_in(size_);
    std::vector<cplx> scratch_out(size_);
    auto* in = reinterpret_cast<fftw_complex*>(scratch_in.data());
    auto* out = reinterpret_cast<fftw_complex*>(scratch_out.data());
    std::lock_guard lock(planner_mutex());
    impl_->plan =
        fftw_plan_dft_2d(rows, cols, in, out, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
}

FftPlan::~FftPlan() = default;
FftPlan::FftPlan(FftPlan&&) noexcept = default;
FftPlan& FftPlan::operator=(FftPlan&&) noexcept = default;

void FftPlan::execute(std::span<const cplx> in, std::span<cplx> out) const {
    if (in.size() != size_ || out.size() != size_) {
        throw std::invalid_argument("FftPlan: size mismatch");
    }
    if (in.data() == out.data()) {
        const std::vector<cplx> copy(in.begin(), in.end());
        execute(copy, out);
        return;
    }
    // FFTW does not write to the input of an out-of-place complex transform.
    auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
    fftw_execute_dft(impl_->plan, src, reinterpret_cast<fftw_complex*>(out.data()));
}

std::vector<cplx> FftPlan::operator()(std::span<const cplx> in) const {
    std::vector<cplx> out(size_);
    execute(in, out);
    return out;
}

struct RealFft2::Impl {
    fftw_plan fwd = nullptr, bwd = nullptr;
    ~Impl() {
        std::lock_guard lock(planner_mutex());
        if (fwd != nullptr) {
            fftw_destroy_plan(fwd);
        }
        if (bwd != nullptr) {
            fftw_destroy_plan(bwd);
        }
    }
};

RealFft2::RealFft2(int rows, int cols)
    : impl_(std::make_unique<Impl>()),
      real_size_(static_cast<size_t>(rows) * static_cast<size_t>(cols)),
      spectrum_size_(static_cast<size_t>(rows) * static_cast<size_t>(cols / 2 + 1)) {
    if (rows < 1 || cols < 1) {
        throw std::invalid_argument("RealFft2: size must be positive");
    }
    std::vector<double> r(real_size_);
    std::vector<cplx> c(spectrum_size_);
    auto* cc = reinterpret_cast<fftw_complex*>(c.data());
    std::lock_guard lock(planner_mutex());
    impl_->fwd = fftw_plan_dft_r2c_2d(rows, cols, r.data(), cc, FFTW_ESTIMATE | FFTW_UNALIGNED);
    impl_->bwd = fftw_plan_dft_c2r_2d(rows, cols, cc, r.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
}

RealFft2::~RealFft2() = default;
RealFft2::RealFft2(RealFft2&&) noexcept = default;
RealFft2& RealFft2::operator=(RealFft2&&) noexcept = default;

void RealFft2::forward(std::span<const double> in, std::span<cplx> out) const {
    if (in.size() != real_size_ || out.size() != spectrum_size_) {
        throw std::invalid_argument("RealFft2: size mismatch");
    }
    fftw_execute_dft_r2c(impl_->fwd, const_cast<double*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft2::backward(std::span<cplx> in, std::span<double> out) const {
    if (in.size() != spectrum_size_ || out.size() != real_size_) {
        throw std::invalid_argument("RealFft2: size mismatch");
    }
    fftw_execute_dft_c2r(impl_->bwd, reinterpret_cast<fftw_complex*>(in.data()), out.data());
}

}  // namespace isac
