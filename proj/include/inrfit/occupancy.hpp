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

// Cubic voxel grid of 0/1 occupancy, axis-0-major like make_grid.
struct OccupancyGrid {
    int resolution = 0;
    std::vector<uint8_t> values;

    size_t count() const { return values.size(); }
};

struct ShapeSpec {
    enum class Kind { Sphere, Torus } kind = Kind::Sphere;
    double radius = 0.5;  // sphere
    double major_r = 0.6; // torus ring radius
    double minor_r = 0.25; // torus tube radius
};

// Voxel centers on the [-1,1]^3 grid tested against the analytic surface.
// Distances compare via sqrt so boundary radii like sqrt(3) (circumscribing
// the cube corners) classify inclusively.
inline OccupancyGrid synth_occupancy(int resolution, const ShapeSpec& shape) {
    if (resolution < 8) throw DataError("synth_occupancy: resolution must be >= 8, got " + std::to_string(resolution));
    if (shape.kind == ShapeSpec::Kind::Sphere && !(shape.radius > 0.0))
        throw DataError("synth_occupancy: sphere radius must be positive");
    if (shape.kind == ShapeSpec::Kind::Torus && (!(shape.major_r > 0.0) || !(shape.minor_r > 0.0)))
        throw DataError("synth_occupancy: torus radii must be positive");

    OccupancyGrid grid;
    grid.resolution = resolution;
    grid.values.resize(static_cast<size_t>(resolution) * resolution * resolution);
    std::vector<double> axis(static_cast<size_t>(resolution));
    for (int i = 0; i < resolution; ++i) axis[static_cast<size_t>(i)] = 2.0 * i / (resolution - 1) - 1.0;

    size_t idx = 0;
    for (int i = 0; i < resolution; ++i) {
        const double x = axis[static_cast<size_t>(i)];
        for (int j = 0; j < resolution; ++j) {
            const double y = axis[static_cast<size_t>(j)];
            for (int k = 0; k < resolution; ++k, ++idx) {
                const double z = axis[static_cast<size_t>(k)];
                bool inside;
                if (shape.kind == ShapeSpec::Kind::Sphere) {
                    inside = std::sqrt(x * x + y * y + z * z) <= shape.radius;
                } else {
                    const double ring = std::sqrt(x * x + y * y) - shape.major_r;
                    inside = std::sqrt(ring * ring + z * z) <= shape.minor_r;
                }
                grid.values[idx] = inside ? 1 : 0;
            }
        }
    }
    return grid;
}

inline SignalDataset occupancy_to_dataset(const OccupancyGrid& grid) {
    if (grid.resolution < 2) throw DataError("occupancy_to_dataset: resolution must be >= 2");
    if (grid.values.size() != static_cast<size_t>(grid.resolution) * grid.resolution * grid.resolution)
        throw DataError("occupancy_to_dataset: value count does not match resolution^3");
    SignalDataset ds;
    ds.coords = make_grid({grid.resolution, grid.resolution, grid.resolution});
    ds.targets = Matrix(static_cast<int>(grid.count()), 1);
    for (size_t i = 0; i < grid.count(); ++i) ds.targets.data[i] = grid.values[i];
    ds.sampling.sample_counts = {grid.resolution, grid.resolution, grid.resolution};
    ds.value_min = 0.0;
    ds.value_max = 1.0;
    return ds;
}

// File layout: three little-endian uint32 axis sizes, then size^3 bytes of
// 0/1 values in axis-0-major order.
inline void save_occupancy(const std::string& path, const OccupancyGrid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_occupancy: cannot open " + path);
    const uint32_t r = static_cast<uint32_t>(grid.resolution);
    uint32_t hdr[3] = {r, r, r};
    uint8_t bytes[12];
    for (int i = 0; i < 3; ++i)
        for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<uint8_t>(hdr[i] >> (8 * b));
    out.write(reinterpret_cast<const char*>(bytes), 12);
    out.write(reinterpret_cast<const char*>(grid.values.data()),
              static_cast<std::streamsize>(grid.values.size()));
    if (!out) throw DataError("save_occupancy: write failed for " + path);
}

inline OccupancyGrid load_occupancy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_occupancy: cannot open " + path);
    uint8_t bytes[12];
    if (!in.read(reinterpret_cast<char*>(bytes), 12))
        throw FormatError("load_occupancy: truncated header (need 12 bytes) in " + path);
    uint32_t dims[3];
    for (int i = 0; i < 3; ++i) {
        dims[i] = 0;
        for (int b = 3; b >= 0; --b) dims[i] = (dims[i] << 8) | bytes[i * 4 + b];
    }
    if (dims[0] != dims[1] || dims[0] != dims[2])
        throw FormatError("load_occupancy: non-cubic grid " + std::to_string(dims[0]) + "x" +
                          std::to_string(dims[1]) + "x" + std::to_string(dims[2]) + " in " + path);
    if (dims[0] < 2 || dims[0] > 4096)
        throw FormatError("load_occupancy: implausible resolution " + std::to_string(dims[0]) + " in " + path);
    OccupancyGrid grid;
    grid.resolution = static_cast<int>(dims[0]);
    const size_t n = static_cast<size_t>(grid.resolution) * grid.resolution * grid.resolution;
    grid.values.resize(n);
    if (!in.read(reinterpret_cast<char*>(grid.values.data()), static_cast<std::streamsize>(n)))
        throw FormatError("load_occupancy: truncated payload at byte " +
                          std::to_string(12 + in.gcount()) + " in " + path);
    for (size_t i = 0; i < n; ++i)
        if (grid.values[i] > 1)
            throw FormatError("load_occupancy: non-binary voxel value " + std::to_string(grid.values[i]) +
                              " at byte " + std::to_string(12 + i) + " in " + path);
    return grid;
}

// Threshold predictions at 0.5 into an occupancy grid.
inline OccupancyGrid grid_from_predictions(const Matrix& pred, int resolution) {
    if (pred.cols != 1 || pred.rows != resolution * resolution * resolution)
        throw ShapeError("grid_from_predictions: predictions " + shape_str(pred) + " do not match resolution " +
                         std::to_string(resolution));
    OccupancyGrid grid;
    grid.resolution = resolution;
    grid.values.resize(pred.size());
    for (size_t i = 0; i < pred.size(); ++i) grid.values[i] = pred.data[i] > 0.5 ? 1 : 0;
    return grid;
}

} // namespace inrfit
