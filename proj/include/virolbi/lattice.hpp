#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace virolbi {

// Single-channel raster, row-major. Ingestion normalizes pixel values to
// [0,1]; intermediate iterates may leave that range and are clamped only
// when quantized for output.
struct ImagePlane {
    int height = 0;
    int width = 0;
    std::vector<double> pixels;

    ImagePlane() = default;
    ImagePlane(int height_, int width_, double fill = 0.0);

    int pixel_count() const { return height * width; }
    double& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// Three planes of identical dimensions, RGB order.
struct ColorImage {
    std::array<ImagePlane, 3> channels;

    int height() const { return channels[0].height; }
    int width() const { return channels[0].width; }
    int pixel_count() const { return channels[0].pixel_count(); }
};

// 4-connected pixel lattice G = (V, E). Edges pair each pixel with its
// right and down neighbor, oriented (smaller index, larger index), and are
// enumerated canonically: all horizontal edges in scan order, then all
// vertical edges in scan order. edge_count = h*(w-1) + w*(h-1).
struct LatticeGraph {
    int height = 0;
    int width = 0;
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;

    int pixel_count() const { return height * width; }
    int edge_count() const { return static_cast<int>(edges.size()); }
};

// Edge-indexed values; one contiguous block of edge_count entries per
// channel (planar layout: values[c*m + e]).
struct EdgeVector {
    int channels = 1;
    std::vector<double> values;

    EdgeVector() = default;
    EdgeVector(int edge_count, int channels_, double fill = 0.0)
        : channels(channels_),
          values(static_cast<std::size_t>(edge_count) * channels_, fill) {}

    int edge_count() const {
        return channels > 0 ? static_cast<int>(values.size()) / channels : 0;
    }
    double& at(int edge, int channel) {
        return values[static_cast<std::size_t>(channel) * edge_count() + edge];
    }
    double at(int edge, int channel) const {
        return values[static_cast<std::size_t>(channel) * edge_count() + edge];
    }
};

LatticeGraph build_lattice(int height, int width);

// (Du)(i,j) := u_i - u_j for every lattice edge (i,j). Multichannel inputs
// are planar; each channel is differenced independently.
void apply_D(const LatticeGraph& g, std::span<const double> u, int channels,
             std::span<double> out);
EdgeVector apply_D(const LatticeGraph& g, const ImagePlane& u);
EdgeVector apply_D(const LatticeGraph& g, const ColorImage& u);

// Exact adjoint of apply_D: out[i] = sum_{e=(i,.)} w[e] - sum_{e=(.,i)} w[e],
// so <Du, w> == <u, D^T w> holds identically.
void apply_D_transpose(const LatticeGraph& g, std::span<const double> w, int channels,
                       std::span<double> out);
std::vector<double> apply_D_transpose(const LatticeGraph& g, const EdgeVector& w);

}  // namespace virolbi
