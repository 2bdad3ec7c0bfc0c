#include "virolbi/imageio.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace virolbi::io {

namespace {

std::string lower_ext(const std::filesystem::path& file) {
    std::string ext = file.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
    std::longjmp(png_jmpbuf(png), 1);
    (void)msg;
}
void png_warn_fn(png_structp, png_const_charp) {}

RasterImage read_png_file(const std::filesystem::path& file) {
    FilePtr fp(std::fopen(file.string().c_str(), "rb"));
    if (!fp) throw ImageIoError("cannot open " + file.string());

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8))
        throw ImageIoError("not a PNG file: " + file.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                             png_error_fn, png_warn_fn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageIoError("libpng init failed");
    }

    std::vector<png_byte> pixels;
    std::vector<png_bytep> rows;
    RasterImage img;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageIoError("corrupt PNG: " + file.string());
    }

    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_packing(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY &&
        png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);

    const int h = static_cast<int>(png_get_image_height(png, info));
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int ch = static_cast<int>(png_get_channels(png, info));
    if (h < 1 || w < 1 || (ch != 1 && ch != 3)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageIoError("unsupported PNG layout: " + file.string());
    }

    const std::size_t stride = static_cast<std::size_t>(w) * ch;
    pixels.resize(stride * h);
    rows.resize(h);
    for (int y = 0; y < h; ++y) rows[y] = pixels.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    img.height = h;
    img.width = w;
    img.channels = ch;
    img.data.resize(static_cast<std::size_t>(h) * w * ch);
    const std::size_t p = static_cast<std::size_t>(h) * w;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c)
                img.data[c * p + static_cast<std::size_t>(y) * w + x] =
                    pixels[y * stride + static_cast<std::size_t>(x) * ch + c] / 255.0;
    return img;
}

int pnm_next_int(std::istream& in) {
    // skips whitespace and '#' comments
    while (true) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int v = -1;
    in >> v;
    if (!in) throw ImageIoError("malformed PNM header");
    return v;
}

RasterImage read_pnm_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ImageIoError("cannot open " + file.string());
    char p = 0, kind = 0;
    in >> p >> kind;
    if (p != 'P' || (kind != '2' && kind != '3' && kind != '5' && kind != '6'))
        throw ImageIoError("unsupported PNM variant in " + file.string());
    const int w = pnm_next_int(in);
    const int h = pnm_next_int(in);
    const int maxval = pnm_next_int(in);
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535)
        throw ImageIoError("malformed PNM header in " + file.string());
    const int ch = (kind == '3' || kind == '6') ? 3 : 1;
    const std::size_t count = static_cast<std::size_t>(w) * h * ch;

    std::vector<int> raw(count);
    if (kind == '2' || kind == '3') {
        for (std::size_t i = 0; i < count; ++i) raw[i] = pnm_next_int(in);
    } else {
        in.get();  // single whitespace after maxval
        if (maxval < 256) {
            std::vector<unsigned char> buf(count);
            in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count));
            if (static_cast<std::size_t>(in.gcount()) != count)
                throw ImageIoError("truncated PNM data in " + file.string());
            for (std::size_t i = 0; i < count; ++i) raw[i] = buf[i];
        } else {
            std::vector<unsigned char> buf(count * 2);
            in.read(reinterpret_cast<char*>(buf.data()),
                    static_cast<std::streamsize>(count * 2));
            if (static_cast<std::size_t>(in.gcount()) != count * 2)
                throw ImageIoError("truncated PNM data in " + file.string());
            for (std::size_t i = 0; i < count; ++i)
                raw[i] = buf[2 * i] * 256 + buf[2 * i + 1];  // big-endian
        }
    }

    RasterImage img;
    img.height = h;
    img.width = w;
    img.channels = ch;
    img.data.resize(count);
    const std::size_t pix = static_cast<std::size_t>(w) * h;
    for (std::size_t i = 0; i < pix; ++i)
        for (int c = 0; c < ch; ++c) {
            const int v = raw[i * ch + c];
            if (v < 0 || v > maxval)
                throw ImageIoError("PNM sample out of range in " + file.string());
            img.data[c * pix + i] = static_cast<double>(v) / maxval;
        }
    return img;
}

unsigned char quantize(double v) {
    const double scaled = std::lround(v * 255.0);
    return static_cast<unsigned char>(std::clamp(scaled, 0.0, 255.0));
}

std::vector<unsigned char> interleave_quantized(const RasterImage& img) {
    const std::size_t p = static_cast<std::size_t>(img.height) * img.width;
    std::vector<unsigned char> out(p * img.channels);
    for (std::size_t i = 0; i < p; ++i)
        for (int c = 0; c < img.channels; ++c)
            out[i * img.channels + c] = quantize(img.data[c * p + i]);
    return out;
}

}  // namespace

ImagePlane RasterImage::as_plane() const {
    if (channels != 1) throw ImageIoError("RasterImage: not grayscale");
    ImagePlane out(height, width);
    out.pixels = data;
    return out;
}

ColorImage RasterImage::as_color() const {
    if (channels != 3) throw ImageIoError("RasterImage: not color");
    ColorImage out;
    const std::size_t p = static_cast<std::size_t>(height) * width;
    for (int c = 0; c < 3; ++c) {
        out.channels[c] = ImagePlane(height, width);
        std::copy(data.begin() + c * p, data.begin() + (c + 1) * p,
                  out.channels[c].pixels.begin());
    }
    return out;
}

RasterImage RasterImage::from_plane(const ImagePlane& pl) {
    RasterImage img;
    img.height = pl.height;
    img.width = pl.width;
    img.channels = 1;
    img.data = pl.pixels;
    return img;
}

RasterImage RasterImage::from_color(const ColorImage& c) {
    RasterImage img;
    img.height = c.height();
    img.width = c.width();
    img.channels = 3;
    img.data.reserve(static_cast<std::size_t>(c.pixel_count()) * 3);
    for (int ch = 0; ch < 3; ++ch)
        img.data.insert(img.data.end(), c.channels[ch].pixels.begin(),
                        c.channels[ch].pixels.end());
    return img;
}

bool supported_input(const std::filesystem::path& file) {
    const std::string ext = lower_ext(file);
    return ext == ".png" || ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

RasterImage read_image(const std::filesystem::path& file) {
    const std::string ext = lower_ext(file);
    if (ext == ".png") return read_png_file(file);
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return read_pnm_file(file);
    throw ImageIoError("unsupported format: " + file.string());
}

void write_png(const std::filesystem::path& file, const RasterImage& img) {
    if (img.channels != 1 && img.channels != 3)
        throw ImageIoError("write_png: channels must be 1 or 3");
    FilePtr fp(std::fopen(file.string().c_str(), "wb"));
    if (!fp) throw ImageIoError("cannot create " + file.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              png_error_fn, png_warn_fn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw ImageIoError("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ImageIoError("PNG write failed: " + file.string());
    }

    png_init_io(png, fp.get());
    // Fixed encoder settings keep output bytes reproducible.
    png_set_compression_level(png, 6);
    png_set_filter(png, 0, PNG_ALL_FILTERS);
    png_set_IHDR(png, info, img.width, img.height, 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const std::vector<unsigned char> bytes = interleave_quantized(img);
    const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(bytes.data() + y * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_pnm(const std::filesystem::path& file, const RasterImage& img) {
    if (img.channels != 1 && img.channels != 3)
        throw ImageIoError("write_pnm: channels must be 1 or 3");
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ImageIoError("cannot create " + file.string());
    out << (img.channels == 1 ? "P5" : "P6") << "\n"
        << img.width << " " << img.height << "\n255\n";
    const std::vector<unsigned char> bytes = interleave_quantized(img);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ImageIoError("PNM write failed: " + file.string());
}

RasterImage to_gray(const RasterImage& img) {
    if (img.channels == 1) return img;
    RasterImage out;
    out.height = img.height;
    out.width = img.width;
    out.channels = 1;
    const std::size_t p = static_cast<std::size_t>(img.height) * img.width;
    out.data.resize(p);
    for (std::size_t i = 0; i < p; ++i)
        out.data[i] = 0.299 * img.data[i] + 0.587 * img.data[p + i] +
                      0.114 * img.data[2 * p + i];
    return out;
}

RasterImage to_rgb(const RasterImage& img) {
    if (img.channels == 3) return img;
    RasterImage out;
    out.height = img.height;
    out.width = img.width;
    out.channels = 3;
    const std::size_t p = static_cast<std::size_t>(img.height) * img.width;
    out.data.resize(p * 3);
    for (int c = 0; c < 3; ++c)
        std::copy(img.data.begin(), img.data.end(), out.data.begin() + c * p);
    return out;
}

}  // namespace virolbi::io
