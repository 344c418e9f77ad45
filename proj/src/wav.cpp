#include "flowvoc/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "flowvoc/common.hpp"

namespace flowvoc::wav {

namespace {

template <typename T>
T read_le(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

WavData read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) FV_FAIL("cannot open WAV file: " + path);

    char riff[4], wave[4];
    in.read(riff, 4);
    read_le<std::uint32_t>(in);  // riff size
    in.read(wave, 4);
    if (!in || std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave, "WAVE", 4) != 0)
        FV_FAIL("not a RIFF/WAVE file: " + path);

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    std::vector<char> data;
    bool have_fmt = false, have_data = false;

    while (in && !(have_fmt && have_data)) {
        char id[4];
        in.read(id, 4);
        std::uint32_t size = read_le<std::uint32_t>(in);
        if (!in) break;
        if (std::memcmp(id, "fmt ", 4) == 0) {
            format = read_le<std::uint16_t>(in);
            channels = read_le<std::uint16_t>(in);
            sample_rate = read_le<std::uint32_t>(in);
            read_le<std::uint32_t>(in);  // byte rate
            read_le<std::uint16_t>(in);  // block align
            bits = read_le<std::uint16_t>(in);
            if (size > 16) in.seekg(size - 16, std::ios::cur);
            if (format == kFormatExtensible) {
                // sub-format code sits in the extension; treat by bit depth
                format = (bits == 32) ? kFormatFloat : kFormatPcm;
            }
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data.resize(size);
            in.read(data.data(), size);
            have_data = true;
        } else {
            in.seekg(size + (size & 1), std::ios::cur);
        }
    }

    if (!have_fmt || !have_data) FV_FAIL("missing fmt/data chunk: " + path);
    if (channels == 0) FV_FAIL("zero channels: " + path);

    std::size_t n_frames = 0;
    std::vector<float> mono;
    if (format == kFormatPcm && bits == 16) {
        const auto* s = reinterpret_cast<const std::int16_t*>(data.data());
        n_frames = data.size() / (2 * channels);
        mono.resize(n_frames);
        for (std::size_t i = 0; i < n_frames; ++i) {
            float acc = 0.f;
            for (unsigned c = 0; c < channels; ++c) acc += s[i * channels + c] / 32768.f;
            mono[i] = acc / channels;
        }
    } else if (format == kFormatFloat && bits == 32) {
        const auto* s = reinterpret_cast<const float*>(data.data());
        n_frames = data.size() / (4 * channels);
        mono.resize(n_frames);
        for (std::size_t i = 0; i < n_frames; ++i) {
            float acc = 0.f;
            for (unsigned c = 0; c < channels; ++c) acc += s[i * channels + c];
            mono[i] = acc / channels;
        }
    } else {
        FV_FAIL("unsupported WAV encoding (want 16-bit PCM or 32-bit float): " + path);
    }

    if (channels > 1)
        log_warn("downmixed " + std::to_string(channels) + "-channel WAV by averaging: " + path);

    WavData out;
    out.samples = std::move(mono);
    out.sample_rate = static_cast<int>(sample_rate);
    return out;
}

void write_wav(const std::string& path, const std::vector<float>& samples,
               int sample_rate, WavFormat fmt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) FV_FAIL("cannot create WAV file: " + path);

    const bool f32 = (fmt == WavFormat::Float32);
    const std::uint32_t bytes_per = f32 ? 4 : 2;
    const std::uint32_t data_size = static_cast<std::uint32_t>(samples.size() * bytes_per);

    out.write("RIFF", 4);
    write_le<std::uint32_t>(out, 36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_le<std::uint32_t>(out, 16);
    write_le<std::uint16_t>(out, f32 ? kFormatFloat : kFormatPcm);
    write_le<std::uint16_t>(out, 1);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(sample_rate));
    write_le<std::uint32_t>(out, sample_rate * bytes_per);
    write_le<std::uint16_t>(out, static_cast<std::uint16_t>(bytes_per));
    write_le<std::uint16_t>(out, static_cast<std::uint16_t>(bytes_per * 8));
    out.write("data", 4);
    write_le<std::uint32_t>(out, data_size);

    if (f32) {
        out.write(reinterpret_cast<const char*>(samples.data()), data_size);
    } else {
        for (float v : samples) {
            float c = v < -1.f ? -1.f : (v > 1.f ? 1.f : v);
            auto q = static_cast<std::int16_t>(c < 0 ? c * 32768.f : c * 32767.f);
            write_le<std::int16_t>(out, q);
        }
    }
    if (!out) FV_FAIL("short write: " + path);
}

}  // namespace flowvoc::wav
