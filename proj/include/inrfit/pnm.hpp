#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "inrfit/dataset.hpp"
#include "inrfit/errors.hpp"
#include "inrfit/matrix.hpp"

namespace inrfit {

// 8-bit image held as doubles in [0,1], row-major, channel-interleaved.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1; // 1 = PGM, 3 = PPM
    std::vector<double> values;
};

namespace detail {

struct PnmParser {
    const std::vector<uint8_t>& bytes;
    const std::string& path;
    size_t pos = 0;

    void skip_space_and_comments() {
        while (pos < bytes.size()) {
            const uint8_t c = bytes[pos];
            if (c == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++pos;
            } else {
                break;
            }
        }
    }

    int read_int(const char* what) {
        skip_space_and_comments();
        if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9')
            throw FormatError("pnm: expected " + std::string(what) + " at byte " + std::to_string(pos) +
                              " in " + path);
        long v = 0;
        while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
            v = v * 10 + (bytes[pos] - '0');
            if (v > 1 << 30)
                throw FormatError("pnm: " + std::string(what) + " out of range at byte " +
                                  std::to_string(pos) + " in " + path);
            ++pos;
        }
        return static_cast<int>(v);
    }
};

} // namespace detail

// Binary PGM (P5) / PPM (P6) with maxval 255; values scale to [0,1] by /255.
inline Image load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_pnm: cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
        throw FormatError("pnm: magic must be P5 or P6 at byte 0 in " + path);
    Image img;
    img.channels = bytes[1] == '5' ? 1 : 3;
    detail::PnmParser p{bytes, path, 2};
    img.width = p.read_int("width");
    img.height = p.read_int("height");
    if (img.width < 1 || img.height < 1)
        throw FormatError("pnm: degenerate dimensions " + std::to_string(img.width) + "x" +
                          std::to_string(img.height) + " in " + path);
    const int maxval = p.read_int("maxval");
    if (maxval != 255)
        throw FormatError("pnm: maxval " + std::to_string(maxval) + " unsupported (255 required) at byte " +
                          std::to_string(p.pos) + " in " + path);
    if (p.pos >= bytes.size())
        throw FormatError("pnm: missing raster separator at byte " + std::to_string(p.pos) + " in " + path);
    ++p.pos; // exactly one whitespace byte before the raster
    const size_t n = static_cast<size_t>(img.width) * img.height * img.channels;
    if (bytes.size() - p.pos < n)
        throw FormatError("pnm: raster truncated, need " + std::to_string(n) + " bytes from byte " +
                          std::to_string(p.pos) + " in " + path);
    img.values.resize(n);
    for (size_t i = 0; i < n; ++i) img.values[i] = bytes[p.pos + i] / 255.0;
    return img;
}

// Inverse mapping with round-half-up to 8 bits.
inline void save_pnm(const std::string& path, const Image& img) {
    if (img.channels != 1 && img.channels != 3)
        throw ConfigError("save_pnm: channels must be 1 or 3, got " + std::to_string(img.channels));
    if (img.width < 1 || img.height < 1) throw ConfigError("save_pnm: degenerate dimensions");
    const size_t n = static_cast<size_t>(img.width) * img.height * img.channels;
    if (img.values.size() != n)
        throw ShapeError("save_pnm: " + std::to_string(img.values.size()) + " values for " +
                         std::to_string(n) + " pixels");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_pnm: cannot open " + path);
    out << (img.channels == 1 ? "P5" : "P6") << "\n"
        << img.width << " " << img.height << "\n255\n";
    std::vector<uint8_t> raster(n);
    for (size_t i = 0; i < n; ++i) {
        double v = std::floor(img.values[i] * 255.0 + 0.5);
        if (v < 0.0) v = 0.0;
        if (v > 255.0) v = 255.0;
        raster[i] = static_cast<uint8_t>(v);
    }
    out.write(reinterpret_cast<const char*>(raster.data()), static_cast<std::streamsize>(n));
    if (!out) throw DataError("save_pnm: write failed for " + path);
}

inline SignalDataset image_to_dataset(const Image& img) {
    SignalDataset ds;
    ds.coords = make_grid({img.height, img.width});
    ds.targets = Matrix(img.height * img.width, img.channels);
    for (size_t i = 0; i < img.values.size(); ++i) ds.targets.data[i] = img.values[i];
    ds.sampling.sample_counts = {img.height, img.width};
    ds.value_min = 0.0;
    ds.value_max = 1.0;
    return ds;
}

inline SignalDataset load_image(const std::string& path) { return image_to_dataset(load_pnm(path)); }

inline void save_image(const std::string& path, const Matrix& values, int height, int width) {
    if (values.rows != height * width)
        throw ShapeError("save_image: " + shape_str(values) + " values for " + std::to_string(height) + "x" +
                         std::to_string(width) + " image");
    Image img;
    img.width = width;
    img.height = height;
    img.channels = values.cols;
    img.values = values.data;
    save_pnm(path, img);
}

} // namespace inrfit
