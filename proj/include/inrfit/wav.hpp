#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "inrfit/dataset.hpp"
#include "inrfit/errors.hpp"

namespace inrfit {

namespace detail {

inline uint32_t read_u32le(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline uint16_t read_u16le(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

inline void write_u32le(std::vector<uint8_t>& out, uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<uint8_t>(v >> (8 * b)));
}

inline void write_u16le(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>(v >> 8));
}

} // namespace detail

// RIFF/WAVE reader restricted to PCM 16-bit; the first channel is taken and
// samples are scaled to [-1, 1) by 1/32768.
inline SignalDataset load_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_wav: cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 12) throw FormatError("load_wav: file shorter than RIFF header in " + path);
    auto tag = [&bytes](size_t off) { return std::string(bytes.begin() + off, bytes.begin() + off + 4); };
    if (tag(0) != "RIFF") throw FormatError("load_wav: RIFF magic missing in " + path);
    if (tag(8) != "WAVE") throw FormatError("load_wav: WAVE form type missing in " + path);

    bool have_fmt = false;
    uint16_t channels = 0, bits = 0, block_align = 0;
    uint32_t rate = 0;
    const uint8_t* data = nullptr;
    size_t data_len = 0;

    size_t off = 12;
    while (off + 8 <= bytes.size()) {
        const std::string id = tag(off);
        const uint32_t size = detail::read_u32le(bytes.data() + off + 4);
        const size_t body = off + 8;
        if (body + size > bytes.size())
            throw FormatError("load_wav: chunk '" + id + "' overruns file at byte " + std::to_string(off) +
                              " in " + path);
        if (id == "fmt ") {
            if (size < 16) throw FormatError("load_wav: fmt chunk too short in " + path);
            const uint16_t audio_format = detail::read_u16le(bytes.data() + body);
            if (audio_format != 1)
                throw FormatError("load_wav: fmt.audio_format=" + std::to_string(audio_format) +
                                  " unsupported (PCM=1 required) in " + path);
            channels = detail::read_u16le(bytes.data() + body + 2);
            rate = detail::read_u32le(bytes.data() + body + 4);
            block_align = detail::read_u16le(bytes.data() + body + 12);
            bits = detail::read_u16le(bytes.data() + body + 14);
            if (channels < 1)
                throw FormatError("load_wav: fmt.num_channels=0 in " + path);
            if (bits != 16)
                throw FormatError("load_wav: fmt.bits_per_sample=" + std::to_string(bits) +
                                  " unsupported (16 required) in " + path);
            if (rate == 0) throw FormatError("load_wav: fmt.sample_rate=0 in " + path);
            have_fmt = true;
        } else if (id == "data") {
            data = bytes.data() + body;
            data_len = size;
        }
        off = body + size + (size & 1); // chunks are word-aligned
    }
    if (!have_fmt) throw FormatError("load_wav: fmt chunk missing in " + path);
    if (!data) throw FormatError("load_wav: data chunk missing in " + path);
    if (block_align == 0) block_align = static_cast<uint16_t>(channels * 2);
    if (block_align != channels * 2)
        throw FormatError("load_wav: fmt.block_align=" + std::to_string(block_align) +
                          " inconsistent with " + std::to_string(channels) + " 16-bit channels in " + path);
    const size_t frames = data_len / block_align;
    if (frames < 2) throw FormatError("load_wav: fewer than 2 frames in " + path);

    SignalDataset ds;
    ds.coords = Matrix(static_cast<int>(frames), 1);
    ds.targets = Matrix(static_cast<int>(frames), 1);
    for (size_t i = 0; i < frames; ++i) {
        const uint8_t* p = data + i * block_align;
        const int16_t s = static_cast<int16_t>(p[0] | (p[1] << 8));
        ds.targets(static_cast<int>(i), 0) = static_cast<double>(s) / 32768.0;
        ds.coords(static_cast<int>(i), 0) = 2.0 * static_cast<double>(i) / (frames - 1) - 1.0;
    }
    ds.sampling.sample_counts = {static_cast<int>(frames)};
    ds.sampling.sample_rate = static_cast<double>(rate);
    ds.value_min = -1.0;
    ds.value_max = 1.0;
    return ds;
}

// Mono PCM16 writer, inverse of load_wav's scaling (round to nearest,
// clamped to the int16 range).
inline void save_wav(const std::string& path, const std::vector<double>& samples, int rate) {
    if (rate < 1) throw ConfigError("save_wav: sample rate must be >= 1");
    std::vector<uint8_t> out;
    out.reserve(44 + samples.size() * 2);
    const uint32_t data_size = static_cast<uint32_t>(samples.size() * 2);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    detail::write_u32le(out, 36 + data_size);
    out.insert(out.end(), {'W', 'A', 'V', 'E'});
    out.insert(out.end(), {'f', 'm', 't', ' '});
    detail::write_u32le(out, 16);
    detail::write_u16le(out, 1);  // PCM
    detail::write_u16le(out, 1);  // mono
    detail::write_u32le(out, static_cast<uint32_t>(rate));
    detail::write_u32le(out, static_cast<uint32_t>(rate) * 2);
    detail::write_u16le(out, 2);  // block align
    detail::write_u16le(out, 16); // bits
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    detail::write_u32le(out, data_size);
    for (double v : samples) {
        double scaled = std::nearbyint(v * 32768.0);
        if (scaled > 32767.0) scaled = 32767.0;
        if (scaled < -32768.0) scaled = -32768.0;
        const int16_t s = static_cast<int16_t>(scaled);
        out.push_back(static_cast<uint8_t>(s & 0xff));
        out.push_back(static_cast<uint8_t>((s >> 8) & 0xff));
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("save_wav: cannot open " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("save_wav: write failed for " + path);
}

} // namespace inrfit
