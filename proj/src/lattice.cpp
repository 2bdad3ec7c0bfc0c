#include "virolbi/lattice.hpp"

#include <limits>
#include <stdexcept>

namespace virolbi {

ImagePlane::ImagePlane(int height_, int width_, double fill) : height(height_), width(width_) {
    if (height_ < 1 || width_ < 1)
        throw std::invalid_argument("ImagePlane: dimensions must be positive");
    pixels.assign(static_cast<std::size_t>(height_) * width_, fill);
}

LatticeGraph build_lattice(int height, int width) {
    if (height < 1 || width < 1)
        throw std::invalid_argument("build_lattice: dimensions must be positive");
    const std::int64_t p = static_cast<std::int64_t>(height) * width;
    const std::int64_t m = static_cast<std::int64_t>(height) * (width - 1) +
                           static_cast<std::int64_t>(width) * (height - 1);
    if (p > std::numeric_limits<std::int32_t>::max() ||
        m > std::numeric_limits<std::int32_t>::max())
        throw std::invalid_argument("build_lattice: dimensions overflow 32-bit pixel indices");

    LatticeGraph g;
    g.height = height;
    g.width = width;
    g.edges.reserve(static_cast<std::size_t>(m));
    for (int y = 0; y < height; ++y)
        for (int x = 0; x + 1 < width; ++x) {
            const std::int32_t i = static_cast<std::int32_t>(y) * width + x;
            g.edges.emplace_back(i, i + 1);
        }
    for (int y = 0; y + 1 < height; ++y)
        for (int x = 0; x < width; ++x) {
            const std::int32_t i = static_cast<std::int32_t>(y) * width + x;
            g.edges.emplace_back(i, i + width);
        }
    return g;
}

void apply_D(const LatticeGraph& g, std::span<const double> u, int channels,
             std::span<double> out) {
    const std::size_t p = static_cast<std::size_t>(g.pixel_count());
    const std::size_t m = g.edges.size();
    if (channels < 1 || u.size() != p * channels || out.size() != m * channels)
        throw std::invalid_argument("apply_D: dimension mismatch");
    for (int c = 0; c < channels; ++c) {
        const double* uc = u.data() + c * p;
        double* oc = out.data() + c * m;
        for (std::size_t e = 0; e < m; ++e)
            oc[e] = uc[g.edges[e].first] - uc[g.edges[e].second];
    }
}

EdgeVector apply_D(const LatticeGraph& g, const ImagePlane& u) {
    if (u.height != g.height || u.width != g.width)
        throw std::invalid_argument("apply_D: image does not match lattice");
    EdgeVector out(g.edge_count(), 1);
    apply_D(g, u.pixels, 1, out.values);
    return out;
}

EdgeVector apply_D(const LatticeGraph& g, const ColorImage& u) {
    EdgeVector out(g.edge_count(), 3);
    const std::size_t m = g.edges.size();
    for (int c = 0; c < 3; ++c) {
        if (u.channels[c].height != g.height || u.channels[c].width != g.width)
            throw std::invalid_argument("apply_D: image does not match lattice");
        apply_D(g, u.channels[c].pixels, 1,
                std::span<double>(out.values.data() + c * m, m));
    }
    return out;
}

void apply_D_transpose(const LatticeGraph& g, std::span<const double> w, int channels,
                       std::span<double> out) {
    const std::size_t p = static_cast<std::size_t>(g.pixel_count());
    const std::size_t m = g.edges.size();
    if (channels < 1 || w.size() != m * channels || out.size() != p * channels)
        throw std::invalid_argument("apply_D_transpose: dimension mismatch");
    for (int c = 0; c < channels; ++c) {
        const double* wc = w.data() + c * m;
        double* oc = out.data() + c * p;
        std::fill(oc, oc + p, 0.0);
        for (std::size_t e = 0; e < m; ++e) {
            oc[g.edges[e].first] += wc[e];
            oc[g.edges[e].second] -= wc[e];
        }
    }
}

std::vector<double> apply_D_transpose(const LatticeGraph& g, const EdgeVector& w) {
    std::vector<double> out(static_cast<std::size_t>(g.pixel_count()) * w.channels);
    apply_D_transpose(g, w.values, w.channels, out);
    return out;
}

}  // namespace virolbi
