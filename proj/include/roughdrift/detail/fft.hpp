#pragma once

#include <complex>
#include <cstddef>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace roughdrift::detail {

// FFTW planning is not thread-safe; execution is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// In-place complex DFT, forward sign convention exp(-2*pi*i*jk/n), unnormalized.
class ComplexFft {
public:
    explicit ComplexFft(std::size_t n) : n_(n) {
        buffer_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        std::lock_guard lock(fftw_planner_mutex());
        forward_ = fftw_plan_dft_1d(static_cast<int>(n), buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_1d(static_cast<int>(n), buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    ComplexFft(const ComplexFft&) = delete;
    ComplexFft& operator=(const ComplexFft&) = delete;

    ~ComplexFft() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(buffer_);
    }

    std::size_t size() const noexcept { return n_; }

    void forward(std::vector<std::complex<double>>& data) { run(forward_, data); }

    /// Unnormalized inverse: forward followed by backward multiplies by n.
    void backward(std::vector<std::complex<double>>& data) { run(backward_, data); }

private:
    void run(fftw_plan plan, std::vector<std::complex<double>>& data) {
        for (std::size_t i = 0; i < n_; ++i) {
            buffer_[i][0] = data[i].real();
            buffer_[i][1] = data[i].imag();
        }
        fftw_execute(plan);
        for (std::size_t i = 0; i < n_; ++i) data[i] = {buffer_[i][0], buffer_[i][1]};
    }

    std::size_t n_;
    fftw_complex* buffer_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

} // namespace roughdrift::detail
