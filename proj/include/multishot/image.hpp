#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace multishot {

// 8-bit raster, row-major, channels interleaved. channels is 1 (grayscale
// masks) or 3 (RGB frames).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;

    Image() = default;
    Image(int w, int h, int c, std::uint8_t fill = 0)
        : width(w), height(h), channels(c),
          data(static_cast<std::size_t>(w) * h * c, fill) {}

    std::uint8_t& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool same_shape(const Image& other) const {
        return width == other.width && height == other.height &&
               channels == other.channels;
    }

    bool operator==(const Image& other) const = default;
};

// PNG I/O. Writers use fixed encoder settings so identical pixels always
// produce identical bytes. 3-channel images are written as RGB, 1-channel as
// grayscale; readers reject anything else.
Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& img);

// h in [0,360), s and v in [0,1].
struct Hsv {
    double h, s, v;
};
Hsv rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);
std::array<std::uint8_t, 3> hsv_to_rgb(double h, double s, double v);

// FNV-1a, used for content hashes in reports and sidecars.
std::uint64_t fnv1a(const void* bytes, std::size_t n);
std::string fnv1a_hex(const void* bytes, std::size_t n);

inline std::string image_hash(const Image& img) {
    return fnv1a_hex(img.data.data(), img.data.size());
}

std::string file_hash(const std::filesystem::path& path);

}  // namespace multishot
