#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "virolbi/lattice.hpp"
#include "virolbi/projection.hpp"

namespace testsupport {

inline virolbi::ImagePlane random_image(int h, int w, std::uint64_t seed,
                                        double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    virolbi::ImagePlane img(h, w);
    for (double& v : img.pixels) v = dist(rng);
    return img;
}

// Deterministic stand-in for a natural photograph: smooth gradients and
// blobs, posterized to 25 intensity steps (like an 8-bit capture), plus a
// two-irrational Weyl dither. Posterized differences are multiples of 0.04;
// dither differences lie in +-[0.0076, 0.0124] along both axes, so every
// adjacent-pixel difference is at least 0.0076 in magnitude -- large enough
// to survive 8-bit quantization -- and every edge activates in a bounded
// number of iterations.
inline virolbi::ImagePlane natural_image(int h, int w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int blobs = 3 + static_cast<int>(rng() % 3);
    std::vector<double> cx(blobs), cy(blobs), rad(blobs), amp(blobs);
    for (int b = 0; b < blobs; ++b) {
        cx[b] = unit(rng);
        cy[b] = unit(rng);
        rad[b] = 0.02 + 0.08 * unit(rng);
        amp[b] = (unit(rng) < 0.5 ? -1.0 : 1.0) * (0.15 + 0.25 * unit(rng));
    }
    const double gx = -0.3 + 0.6 * unit(rng);
    const double gy = -0.3 + 0.6 * unit(rng);
    const double ph = 6.28 * unit(rng);
    const double golden = 0.618033988749895;   // frac(phi)
    const double silver = 0.414213562373095;   // frac(sqrt 2)

    virolbi::ImagePlane img(h, w);
    for (int y = 0; y < h; ++y) {
        const double fy = h > 1 ? static_cast<double>(y) / (h - 1) : 0.0;
        for (int x = 0; x < w; ++x) {
            const double fx = w > 1 ? static_cast<double>(x) / (w - 1) : 0.0;
            double v = 0.5 + gx * (fx - 0.5) + gy * (fy - 0.5);
            for (int b = 0; b < blobs; ++b) {
                const double d2 = (fx - cx[b]) * (fx - cx[b]) + (fy - cy[b]) * (fy - cy[b]);
                v += amp[b] * std::exp(-d2 / rad[b]);
            }
            v += 0.06 * std::sin(9.0 * fx + 5.0 * fy + ph);
            v = 0.5 + 0.42 * std::tanh(1.4 * (v - 0.5));   // into (0.08, 0.92)
            v = std::round(v * 25.0) / 25.0;               // posterize
            const double wx = (x + 1) * golden - std::floor((x + 1) * golden);
            const double wy = (y + 1) * silver - std::floor((y + 1) * silver);
            img.at(y, x) = v + 0.02 * (wx + wy);
        }
    }
    return img;
}

inline virolbi::ColorImage natural_color_image(int h, int w, std::uint64_t seed) {
    virolbi::ColorImage img;
    for (int c = 0; c < 3; ++c) img.channels[c] = natural_image(h, w, seed + 101 * c);
    return img;
}

inline virolbi::SupportSet random_support(int edge_count, double density,
                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    virolbi::SupportSet s;
    s.member.assign(edge_count, 0);
    for (int e = 0; e < edge_count; ++e)
        if (unit(rng) < density) {
            s.member[e] = 1;
            ++s.nonzero_count;
        }
    return s;
}

inline double rel_l2_error(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double err = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        err = std::max(err, std::abs(a[i] - b[i]));
    return err;
}

}  // namespace testsupport
