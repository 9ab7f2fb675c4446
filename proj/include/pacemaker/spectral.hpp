#pragma once

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "grid.hpp"

namespace pacemaker {

using cplx = std::complex<double>;

// Process-wide FFTW plan cache. Plans are created under a lock and executed
// through the new-array interface, which FFTW documents as thread safe.
class FftEngine {
public:
    static FftEngine& instance()
    {
        static FftEngine engine;
        return engine;
    }

    void forward(std::vector<cplx>& data) { execute(data, true); }

    // Normalized inverse transform.
    void backward(std::vector<cplx>& data)
    {
        execute(data, false);
        const double s = 1.0 / static_cast<double>(data.size());
        for (auto& v : data) v *= s;
    }

    FftEngine(const FftEngine&) = delete;
    FftEngine& operator=(const FftEngine&) = delete;

private:
    struct Plans {
        fftw_plan fwd = nullptr;
        fftw_plan bwd = nullptr;
    };

    FftEngine() = default;
    ~FftEngine()
    {
        for (auto& [n, p] : plans_) {
            fftw_destroy_plan(p.fwd);
            fftw_destroy_plan(p.bwd);
        }
    }

    const Plans& plans_for(std::size_t n)
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        Plans p;
        p.fwd = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, flags);
        p.bwd = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, flags);
        fftw_free(buf);
        return plans_.emplace(n, p).first->second;
    }

    void execute(std::vector<cplx>& data, bool fwd)
    {
        const Plans& p = plans_for(data.size());
        auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
        fftw_execute_dft(fwd ? p.fwd : p.bwd, ptr, ptr);
    }

    std::mutex mutex_;
    std::map<std::size_t, Plans> plans_;
};

constexpr double imaginary_residue_tolerance = 1e-10;

// Samples a multiplier on the given frequencies. The Nyquist entry keeps only
// the real part, which is the Hermitian average of the +/- Nyquist symbols.
inline std::vector<cplx> sample_multiplier(const std::vector<double>& freqs,
                                           const std::function<cplx(double)>& symbol)
{
    std::vector<cplx> m(freqs.size());
    for (std::size_t k = 0; k < freqs.size(); ++k) m[k] = symbol(freqs[k]);
    m[freqs.size() / 2] = cplx(m[freqs.size() / 2].real(), 0.0);
    return m;
}

// Zero-padded spectrum: the physical samples occupy the middle half of a 2n array.
inline std::vector<cplx> padded_spectrum(const Field& f)
{
    const std::size_t n = f.size();
    std::vector<cplx> buf(2 * n, cplx(0.0, 0.0));
    for (std::size_t j = 0; j < n; ++j) buf[j + n / 2] = f.values[j];
    FftEngine::instance().forward(buf);
    return buf;
}

inline void check_imaginary(const std::vector<cplx>& buf, double scale)
{
    double im = 0.0, re = 0.0;
    for (const auto& v : buf) {
        im = std::max(im, std::abs(v.imag()));
        re = std::max(re, std::abs(v.real()));
    }
    const double ref = std::max({re, scale, 1e-300});
    if (im > imaginary_residue_tolerance * ref)
        throw SymbolParityError("Fourier multiplier produced an imaginary residue; symbol is not Hermitian");
}

// Inverse of padded_spectrum; the padded region is discarded.
inline Field crop_padded(std::vector<cplx> spec, const Grid& g, double scale = 0.0)
{
    const std::size_t n = g.n_points;
    FftEngine::instance().backward(spec);
    check_imaginary(spec, scale);
    Field out(g);
    for (std::size_t j = 0; j < n; ++j) out.values[j] = spec[j + n / 2].real();
    return out;
}

// Convolution with a multiplier sampled on the padded frequencies of f.grid.
inline Field apply_multiplier(const Field& f, const std::vector<cplx>& multiplier)
{
    if (multiplier.size() != 2 * f.size()) throw GridMismatchError("multiplier sampled on a different grid");
    auto spec = padded_spectrum(f);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= multiplier[k];
    return crop_padded(std::move(spec), f.grid, f.max_abs());
}

// Periodic application on the native grid (period 2L); used for non-decaying periodic data.
inline Field apply_multiplier_periodic(const Field& f, const std::function<cplx(double)>& symbol)
{
    const auto freqs = f.grid.fourier_freqs();
    const auto m = sample_multiplier(freqs, symbol);
    std::vector<cplx> buf(f.values.begin(), f.values.end());
    FftEngine::instance().forward(buf);
    for (std::size_t k = 0; k < buf.size(); ++k) buf[k] *= m[k];
    FftEngine::instance().backward(buf);
    check_imaginary(buf, f.max_abs());
    Field out(f.grid);
    for (std::size_t j = 0; j < f.size(); ++j) out.values[j] = buf[j].real();
    return out;
}

inline std::vector<cplx> derivative_multiplier(const Grid& g, int order)
{
    return sample_multiplier(g.padded_freqs(), [order](double l) { return std::pow(cplx(0.0, l), order); });
}

// Spectral derivative of a localized field (zero extension beyond +-L).
inline Field derivative_localized(const Field& f, int order)
{
    if (order == 0) return f;
    return apply_multiplier(f, derivative_multiplier(f.grid, order));
}

// Band-limited interpolation of a localized field onto a grid refined by `factor`.
// Returns samples on the whole padded domain; sample i sits at -2L + h/2 + i h/factor,
// so coarse point j maps to index (j + n/2) * factor.
inline std::vector<double> upsample_padded(const Field& f, std::size_t factor)
{
    const std::size_t n2 = 2 * f.size();
    auto spec = padded_spectrum(f);
    if (factor == 1) {
        FftEngine::instance().backward(spec);
        std::vector<double> out(n2);
        for (std::size_t i = 0; i < n2; ++i) out[i] = spec[i].real();
        return out;
    }
    const std::size_t m = n2 * factor;
    std::vector<cplx> fine(m, cplx(0.0, 0.0));
    const std::size_t half = n2 / 2;
    for (std::size_t k = 0; k < half; ++k) fine[k] = spec[k];
    for (std::size_t k = 1; k < half; ++k) fine[m - k] = spec[n2 - k];
    fine[half] = 0.5 * spec[half];
    fine[m - half] = 0.5 * spec[half];
    FftEngine::instance().backward(fine);
    std::vector<double> out(m);
    const double s = static_cast<double>(factor);
    for (std::size_t i = 0; i < m; ++i) out[i] = fine[i].real() * s;
    return out;
}

} // namespace pacemaker
