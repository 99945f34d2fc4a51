#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "inrfit/checkpoint.hpp"
#include "inrfit/occupancy.hpp"
#include "inrfit/pnm.hpp"
#include "inrfit/wav.hpp"

using namespace inrfit;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

std::filesystem::path scratch_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "inrfit_io_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string scratch(const std::string& name) { return (scratch_dir() / name).string(); }

void write_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void push_u32(std::vector<uint8_t>& v, uint32_t x) {
    for (int b = 0; b < 4; ++b) v.push_back(static_cast<uint8_t>(x >> (8 * b)));
}

void push_u16(std::vector<uint8_t>& v, uint16_t x) {
    v.push_back(static_cast<uint8_t>(x & 0xff));
    v.push_back(static_cast<uint8_t>(x >> 8));
}

void push_tag(std::vector<uint8_t>& v, const char* t) {
    v.insert(v.end(), t, t + 4);
}

// Hand-rolled WAV container so the loader is tested against an independent
// byte layout, not against save_wav.
std::vector<uint8_t> craft_wav(uint16_t format, uint16_t channels, uint32_t rate, uint16_t bits,
                               const std::vector<int16_t>& interleaved) {
    std::vector<uint8_t> v;
    const uint32_t data_size = static_cast<uint32_t>(interleaved.size() * 2);
    push_tag(v, "RIFF");
    push_u32(v, 36 + data_size);
    push_tag(v, "WAVE");
    push_tag(v, "fmt ");
    push_u32(v, 16);
    push_u16(v, format);
    push_u16(v, channels);
    push_u32(v, rate);
    push_u32(v, rate * channels * 2);
    push_u16(v, static_cast<uint16_t>(channels * 2)); // block align
    push_u16(v, bits);
    push_tag(v, "data");
    push_u32(v, data_size);
    for (int16_t s : interleaved) push_u16(v, static_cast<uint16_t>(s));
    return v;
}

} // namespace

TEST_CASE("wav roundtrip stays within quantization error", "[io]") {
    const std::string path = scratch("roundtrip.wav");
    const std::vector<double> samples = {0.0, 0.5, -0.25, 0.123, -0.9, 0.031};
    save_wav(path, samples, 8000);
    const SignalDataset ds = load_wav(path);
    REQUIRE(ds.targets.rows == 6);
    REQUIRE(ds.sampling.sample_rate.has_value());
    CHECK(*ds.sampling.sample_rate == 8000.0);
    for (int i = 0; i < 6; ++i)
        CHECK_THAT(ds.targets(i, 0), WithinAbs(samples[static_cast<size_t>(i)], 0.5 / 32768.0 + 1e-12));
    CHECK(ds.coords(0, 0) == -1.0);
    CHECK(ds.coords(5, 0) == 1.0);
}

TEST_CASE("wav writer clamps out-of-range samples", "[io]") {
    const std::string path = scratch("clip.wav");
    save_wav(path, {2.0, -3.0, 1.0, -1.0}, 4000);
    const SignalDataset ds = load_wav(path);
    CHECK(ds.targets(0, 0) == 32767.0 / 32768.0);
    CHECK(ds.targets(1, 0) == -1.0);
    CHECK(ds.targets(2, 0) == 32767.0 / 32768.0); // +1.0 saturates
    CHECK(ds.targets(3, 0) == -1.0);
    CHECK_THROWS_AS(save_wav(scratch("badrate.wav"), {0.0, 0.0}, 0), ConfigError);
}

TEST_CASE("wav loader reads the first channel of stereo files", "[io]") {
    const std::string path = scratch("stereo.wav");
    write_bytes(path, craft_wav(1, 2, 44100, 16, {100, 200, 300, 400, 500, 600}));
    const SignalDataset ds = load_wav(path);
    REQUIRE(ds.targets.rows == 3);
    CHECK(ds.targets(0, 0) == 100.0 / 32768.0);
    CHECK(ds.targets(1, 0) == 300.0 / 32768.0);
    CHECK(ds.targets(2, 0) == 500.0 / 32768.0);
    CHECK(*ds.sampling.sample_rate == 44100.0);
}

TEST_CASE("wav loader rejects malformed containers", "[io]") {
    auto craft_and_expect = [](const std::string& name, std::vector<uint8_t> bytes, const char* needle) {
        const std::string path = scratch(name);
        write_bytes(path, bytes);
        CHECK_THROWS_WITH(load_wav(path), ContainsSubstring(needle));
    };

    auto good = craft_wav(1, 1, 8000, 16, {1, 2, 3});

    auto bad_magic = good;
    bad_magic[3] = 'X';
    craft_and_expect("bad_magic.wav", bad_magic, "RIFF magic");

    auto bad_form = good;
    bad_form[11] = 'X';
    craft_and_expect("bad_form.wav", bad_form, "WAVE form");

    craft_and_expect("float_fmt.wav", craft_wav(3, 1, 8000, 16, {1, 2}), "audio_format=3");
    craft_and_expect("wide_fmt.wav", craft_wav(1, 1, 8000, 24, {1, 2}), "bits_per_sample=24");
    craft_and_expect("one_frame.wav", craft_wav(1, 1, 8000, 16, {1}), "fewer than 2 frames");

    auto overrun = good;
    overrun[40] = 0xff; // data chunk claims more bytes than the file holds
    craft_and_expect("overrun.wav", overrun, "overruns");

    std::vector<uint8_t> no_fmt;
    push_tag(no_fmt, "RIFF");
    push_u32(no_fmt, 12);
    push_tag(no_fmt, "WAVE");
    push_tag(no_fmt, "data");
    push_u32(no_fmt, 4);
    push_u32(no_fmt, 0);
    craft_and_expect("no_fmt.wav", no_fmt, "fmt chunk missing");

    CHECK_THROWS_AS(load_wav(scratch("missing.wav")), DataError);
}

TEST_CASE("pgm roundtrip is exact for 8-bit values", "[io]") {
    const std::string path = scratch("gray.pgm");
    Image img;
    img.width = 3;
    img.height = 2;
    img.channels = 1;
    for (int k : {0, 17, 255, 128, 64, 250}) img.values.push_back(k / 255.0);
    save_pnm(path, img);
    const Image back = load_pnm(path);
    CHECK(back.width == 3);
    CHECK(back.height == 2);
    CHECK(back.channels == 1);
    CHECK(back.values == img.values);
}

TEST_CASE("ppm roundtrip keeps channel interleaving", "[io]") {
    const std::string path = scratch("color.ppm");
    Image img;
    img.width = 2;
    img.height = 2;
    img.channels = 3;
    for (int k = 0; k < 12; ++k) img.values.push_back((k * 20) / 255.0);
    save_pnm(path, img);
    const Image back = load_pnm(path);
    CHECK(back.channels == 3);
    CHECK(back.values == img.values);
}

TEST_CASE("pnm writer clamps and validates", "[io]") {
    Image img;
    img.width = 2;
    img.height = 1;
    img.channels = 1;
    img.values = {1.5, -0.25};
    const std::string path = scratch("clamp.pgm");
    save_pnm(path, img);
    const Image back = load_pnm(path);
    CHECK(back.values[0] == 1.0);
    CHECK(back.values[1] == 0.0);

    Image two_channel = img;
    two_channel.channels = 2;
    CHECK_THROWS_AS(save_pnm(scratch("x.pgm"), two_channel), ConfigError);
    Image short_values = img;
    short_values.values.pop_back();
    CHECK_THROWS_AS(save_pnm(scratch("x.pgm"), short_values), ShapeError);
}

TEST_CASE("pnm parser handles comments and rejects malformed headers", "[io]") {
    const std::string commented = scratch("comments.pgm");
    {
        std::ofstream out(commented, std::ios::binary);
        out << "P5 # magic comment\n# full line\n2 2 # dims\n255\n";
        const uint8_t raster[4] = {10, 20, 30, 40};
        out.write(reinterpret_cast<const char*>(raster), 4);
    }
    const Image img = load_pnm(commented);
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    CHECK(img.values[3] == 40.0 / 255.0);

    auto expect_reject = [](const std::string& name, const std::string& text, const char* needle) {
        const std::string path = scratch(name);
        std::ofstream out(path, std::ios::binary);
        out << text;
        out.close();
        CHECK_THROWS_WITH(load_pnm(path), ContainsSubstring(needle));
    };
    expect_reject("p4.pbm", "P4\n2 2\n", "magic must be P5 or P6");
    expect_reject("maxval.pgm", "P5\n2 2\n128\n\0\0\0\0", "maxval 128");
    expect_reject("truncated.pgm", "P5\n4 4\n255\nxx", "raster truncated");
    expect_reject("zero_dim.pgm", "P5\n0 4\n255\n", "degenerate dimensions");
    expect_reject("no_dims.pgm", "P5\n", "expected width");
    CHECK_THROWS_AS(load_pnm(scratch("missing.pgm")), DataError);
}

TEST_CASE("image_to_dataset maps pixels onto the coordinate grid", "[io]") {
    Image img;
    img.width = 3;
    img.height = 2;
    img.channels = 1;
    img.values = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    const SignalDataset ds = image_to_dataset(img);
    REQUIRE(ds.coords.rows == 6);
    REQUIRE(ds.coords.cols == 2);
    // row-major: row index = i * width + j, coords (row axis, column axis)
    CHECK(ds.coords(0, 0) == -1.0);
    CHECK(ds.coords(0, 1) == -1.0);
    CHECK(ds.coords(2, 1) == 1.0);  // j = 2 of 3
    CHECK(ds.coords(3, 0) == 1.0);  // i = 1 of 2
    CHECK(ds.targets(4, 0) == 0.4);
    CHECK(ds.sampling.sample_counts == std::vector<int>{2, 3});
}

TEST_CASE("save_image validates the value count", "[io]") {
    Matrix values(6, 1);
    for (int i = 0; i < 6; ++i) values(i, 0) = i / 6.0;
    const std::string path = scratch("from_matrix.pgm");
    save_image(path, values, 2, 3);
    const Image img = load_pnm(path);
    CHECK(img.height == 2);
    CHECK(img.width == 3);
    CHECK_THROWS_AS(save_image(path, values, 2, 4), ShapeError);
}

TEST_CASE("occupancy file roundtrip", "[io]") {
    ShapeSpec shape;
    shape.radius = 0.7;
    const OccupancyGrid grid = synth_occupancy(8, shape);
    const std::string path = scratch("sphere.occ");
    save_occupancy(path, grid);
    const OccupancyGrid back = load_occupancy(path);
    CHECK(back.resolution == 8);
    CHECK(back.values == grid.values);
}

TEST_CASE("occupancy loader rejects malformed files", "[io]") {
    auto craft = [](const std::string& name, const std::vector<uint8_t>& bytes) {
        const std::string path = scratch(name);
        write_bytes(path, bytes);
        return path;
    };

    CHECK_THROWS_WITH(load_occupancy(craft("short.occ", std::vector<uint8_t>(8, 0))),
                      ContainsSubstring("truncated header"));

    std::vector<uint8_t> noncubic;
    push_u32(noncubic, 8);
    push_u32(noncubic, 9);
    push_u32(noncubic, 8);
    CHECK_THROWS_WITH(load_occupancy(craft("noncubic.occ", noncubic)), ContainsSubstring("non-cubic"));

    std::vector<uint8_t> huge;
    push_u32(huge, 5000);
    push_u32(huge, 5000);
    push_u32(huge, 5000);
    CHECK_THROWS_WITH(load_occupancy(craft("huge.occ", huge)), ContainsSubstring("implausible resolution"));

    std::vector<uint8_t> tiny;
    push_u32(tiny, 1);
    push_u32(tiny, 1);
    push_u32(tiny, 1);
    CHECK_THROWS_WITH(load_occupancy(craft("tiny.occ", tiny)), ContainsSubstring("implausible resolution"));

    std::vector<uint8_t> trunc;
    push_u32(trunc, 2);
    push_u32(trunc, 2);
    push_u32(trunc, 2);
    trunc.insert(trunc.end(), {1, 0, 1}); // need 8 payload bytes
    CHECK_THROWS_WITH(load_occupancy(craft("trunc.occ", trunc)), ContainsSubstring("truncated payload"));

    std::vector<uint8_t> nonbinary;
    push_u32(nonbinary, 2);
    push_u32(nonbinary, 2);
    push_u32(nonbinary, 2);
    nonbinary.insert(nonbinary.end(), {1, 0, 1, 0, 2, 0, 1, 0});
    CHECK_THROWS_WITH(load_occupancy(craft("nonbinary.occ", nonbinary)),
                      ContainsSubstring("non-binary voxel value 2 at byte 16"));

    CHECK_THROWS_AS(load_occupancy(scratch("missing.occ")), DataError);
}

namespace {

Model checkpoint_model() {
    ModelSpec spec;
    spec.input_dim = 2;
    spec.hidden_widths = {12, 12};
    spec.output_dim = 1;
    spec.kind = ActivationKind::FmSine;
    spec.first_omega0 = 30.0;
    spec.hidden_omega0 = 25.0;
    spec.f_nyquist = 16.0;
    Rng rng(99);
    return build_model(spec, rng);
}

std::vector<double> flat_params(const Model& model) {
    std::vector<double> out;
    for (const auto& layer : model.layers) {
        out.insert(out.end(), layer.weights.data.begin(), layer.weights.data.end());
        if (layer.bias) out.insert(out.end(), layer.bias->begin(), layer.bias->end());
    }
    return out;
}

} // namespace

TEST_CASE("checkpoint roundtrip is bit exact", "[io]") {
    const Model model = checkpoint_model();
    const std::string path = scratch("model.ckpt");
    save_checkpoint(path, model);
    const Model back = load_checkpoint(path);

    CHECK(back.input_dim == model.input_dim);
    CHECK(back.outermost_linear == model.outermost_linear);
    CHECK(flat_params(back) == flat_params(model));
    REQUIRE(back.layers.size() == model.layers.size());
    for (size_t l = 0; l < model.layers.size(); ++l) {
        CHECK(back.layers[l].activation.kind == model.layers[l].activation.kind);
        CHECK(back.layers[l].activation.omega0 == model.layers[l].activation.omega0);
        CHECK(back.layers[l].activation.multipliers == model.layers[l].activation.multipliers);
    }

    Rng rng(5);
    const Matrix coords = uniform_matrix(rng, 9, 2, -1.0, 1.0);
    const Matrix a = forward(model, coords).output();
    const Matrix b = forward(back, coords).output();
    CHECK(a.data == b.data);
}

TEST_CASE("checkpoint preserves the positional encoder", "[io]") {
    ModelSpec spec;
    spec.input_dim = 2;
    spec.hidden_widths = {8};
    spec.output_dim = 1;
    spec.kind = ActivationKind::Gauss;
    PositionalEncodingSpec enc;
    enc.levels_per_dim = 4;
    enc.scale = 6;
    enc.input_dim = 2;
    spec.encoder = enc;
    Rng rng(21);
    const Model model = build_model(spec, rng);
    const std::string path = scratch("encoder.ckpt");
    save_checkpoint(path, model);
    const Model back = load_checkpoint(path);
    REQUIRE(back.encoder.has_value());
    CHECK(back.encoder->levels_per_dim == 4);
    CHECK(back.encoder->scale == 6);
    CHECK(back.encoder->input_dim == 2);

    Rng cr(2);
    const Matrix coords = uniform_matrix(cr, 5, 2, -1.0, 1.0);
    CHECK(forward(model, coords).output().data == forward(back, coords).output().data);
}

TEST_CASE("checkpoint loader rejects corrupted files", "[io]") {
    const Model model = checkpoint_model();
    const std::string good = scratch("good.ckpt");
    save_checkpoint(good, model);
    const std::vector<uint8_t> bytes = read_bytes(good);

    auto mutate = [&bytes](const std::string& name, auto fn) {
        std::vector<uint8_t> copy = bytes;
        fn(copy);
        const std::string path = scratch(name);
        write_bytes(path, copy);
        return path;
    };

    CHECK_THROWS_WITH(load_checkpoint(mutate("magic.ckpt", [](auto& b) { b[0] = 'X'; })),
                      ContainsSubstring("bad magic"));
    CHECK_THROWS_WITH(load_checkpoint(mutate("version.ckpt", [](auto& b) { b[4] = 9; })),
                      ContainsSubstring("unsupported version 9"));
    CHECK_THROWS_WITH(load_checkpoint(mutate("cut.ckpt", [](auto& b) { b.resize(b.size() - 64); })),
                      ContainsSubstring("truncated parameter blob"));
    CHECK_THROWS_WITH(load_checkpoint(mutate("header.ckpt", [](auto& b) { b.resize(20); })),
                      ContainsSubstring("truncated JSON header"));
    CHECK_THROWS_WITH(load_checkpoint(mutate("json.ckpt", [](auto& b) { b[16] = '!'; })),
                      ContainsSubstring("invalid JSON"));
    CHECK_THROWS_AS(load_checkpoint(scratch("absent.ckpt")), DataError);
}
