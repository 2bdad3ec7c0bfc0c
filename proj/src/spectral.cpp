#include "virolbi/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>

namespace virolbi::spectral {

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

using ComplexGrid = std::vector<std::complex<double>>;

ComplexGrid fft2(const ImagePlane& x, int sign) {
    ComplexGrid data(static_cast<std::size_t>(x.height) * x.width);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = {x.pixels[i], 0.0};
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_dft_2d(x.height, x.width,
                                reinterpret_cast<fftw_complex*>(data.data()),
                                reinterpret_cast<fftw_complex*>(data.data()), sign,
                                FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
    return data;
}

ImagePlane ifft2_real(ComplexGrid& freq, int height, int width) {
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_dft_2d(height, width,
                                reinterpret_cast<fftw_complex*>(freq.data()),
                                reinterpret_cast<fftw_complex*>(freq.data()),
                                FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
    ImagePlane out(height, width);
    const double scale = 1.0 / (static_cast<double>(height) * width);
    for (std::size_t i = 0; i < freq.size(); ++i) out.pixels[i] = freq[i].real() * scale;
    return out;
}

// Centered integer frequency coordinate for index k on an axis of length n.
int centered_coord(int k, int n) { return k <= n / 2 ? k : k - n; }

bool in_low_band(int ky, int kx, int h, int w, double r) {
    const double cy = centered_coord(ky, h);
    const double cx = centered_coord(kx, w);
    return cy * cy + cx * cx <= r * r;
}

}  // namespace

BandSplit decompose(const ImagePlane& x, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("decompose: cutoff radius must be positive");
    if (x.pixel_count() < 1) throw std::invalid_argument("decompose: empty image");

    ComplexGrid freq = fft2(x, FFTW_FORWARD);
    ComplexGrid low_freq(freq.size()), high_freq(freq.size());
    for (int ky = 0; ky < x.height; ++ky)
        for (int kx = 0; kx < x.width; ++kx) {
            const std::size_t idx = static_cast<std::size_t>(ky) * x.width + kx;
            if (in_low_band(ky, kx, x.height, x.width, r)) {
                low_freq[idx] = freq[idx];
            } else {
                high_freq[idx] = freq[idx];
            }
        }
    BandSplit split;
    split.low = ifft2_real(low_freq, x.height, x.width);
    split.high = ifft2_real(high_freq, x.height, x.width);
    return split;
}

ImagePlane expected_spectral_diff(const std::vector<ImagePlane>& originals,
                                  const std::vector<ImagePlane>& smoothed) {
    if (originals.empty() || originals.size() != smoothed.size())
        throw std::invalid_argument("expected_spectral_diff: lists must be aligned and nonempty");
    const int h = originals[0].height;
    const int w = originals[0].width;
    ComplexGrid mean(static_cast<std::size_t>(h) * w, {0.0, 0.0});
    for (std::size_t n = 0; n < originals.size(); ++n) {
        if (originals[n].height != h || originals[n].width != w ||
            smoothed[n].height != h || smoothed[n].width != w)
            throw std::invalid_argument("expected_spectral_diff: dimension mismatch");
        const ComplexGrid fo = fft2(originals[n], FFTW_FORWARD);
        const ComplexGrid fs = fft2(smoothed[n], FFTW_FORWARD);
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += fo[i] - fs[i];
    }
    const double inv_n = 1.0 / static_cast<double>(originals.size());

    ImagePlane out(h, w);
    for (int ky = 0; ky < h; ++ky)
        for (int kx = 0; kx < w; ++kx) {
            // fftshift so DC lands at (h/2, w/2)
            const int sy = (ky + h / 2) % h;
            const int sx = (kx + w / 2) % w;
            out.at(sy, sx) = std::abs(mean[static_cast<std::size_t>(ky) * w + kx]) * inv_n;
        }
    return out;
}

BandEnergy band_energy(const ImagePlane& x, double r) {
    const BandSplit split = decompose(x, r);
    BandEnergy e;
    for (double v : split.low.pixels) e.low += v * v;
    for (double v : split.high.pixels) e.high += v * v;
    return e;
}

BandEnergy spectrum_band_energy(const ImagePlane& centered_magnitude, double r) {
    if (!(r > 0.0))
        throw std::invalid_argument("spectrum_band_energy: cutoff radius must be positive");
    const int h = centered_magnitude.height;
    const int w = centered_magnitude.width;
    BandEnergy e;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double cy = y - h / 2;
            const double cx = x - w / 2;
            const double v = centered_magnitude.at(y, x);
            if (cy * cy + cx * cx <= r * r)
                e.low += v * v;
            else
                e.high += v * v;
        }
    return e;
}

}  // namespace virolbi::spectral
