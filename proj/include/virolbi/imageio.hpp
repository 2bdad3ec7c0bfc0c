#pragma once

#include <filesystem>
#include <stdexcept>
#include <vector>

#include "virolbi/lattice.hpp"

namespace virolbi::io {

class ImageIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Decoded raster, planar channel layout, values normalized to [0,1].
struct RasterImage {
    int height = 0;
    int width = 0;
    int channels = 1;  // 1 (gray) or 3 (rgb)
    std::vector<double> data;

    ImagePlane as_plane() const;
    ColorImage as_color() const;
    static RasterImage from_plane(const ImagePlane& p);
    static RasterImage from_color(const ColorImage& c);
};

bool supported_input(const std::filesystem::path& file);

// PNG (8/16-bit, palette and alpha handled) and PGM/PPM (P2/P3/P5/P6).
// Throws ImageIoError on unreadable or corrupt input.
RasterImage read_image(const std::filesystem::path& file);

// 8-bit output; pixels quantized as round(v*255) clamped to [0,255] at
// write time only. PNG output uses fixed encoder settings so identical
// rasters produce identical bytes.
void write_png(const std::filesystem::path& file, const RasterImage& img);
void write_pnm(const std::filesystem::path& file, const RasterImage& img);

// ITU-R BT.601 luma (0.299, 0.587, 0.114); identity on grayscale input.
RasterImage to_gray(const RasterImage& img);
// Replicates a gray channel; identity on color input.
RasterImage to_rgb(const RasterImage& img);

}  // namespace virolbi::io
