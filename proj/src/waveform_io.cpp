#include "ssblab/waveform_io.hpp"

#include <bit>
#include <fstream>
#include <vector>

namespace ssb {

static_assert(std::endian::native == std::endian::little, "waveform I/O assumes a little-endian host");

const char* to_string(SampleFormat f) {
    return f == SampleFormat::Cf32 ? "cf32" : "cf64";
}

SampleFormat sample_format_from_string(const std::string& s) {
    if (s == "cf32") return SampleFormat::Cf32;
    if (s == "cf64") return SampleFormat::Cf64;
    throw std::invalid_argument("sample format must be cf32 or cf64, got '" + s + "'");
}

std::size_t bytes_per_sample(SampleFormat f) {
    return f == SampleFormat::Cf32 ? 2 * sizeof(float) : 2 * sizeof(double);
}

void write_waveform(const std::string& path, const CVec& samples, SampleFormat fmt) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    if (fmt == SampleFormat::Cf32) {
        std::vector<float> buf(2 * samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            buf[2 * i] = static_cast<float>(samples[i].real());
            buf[2 * i + 1] = static_cast<float>(samples[i].imag());
        }
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    } else {
        std::vector<double> buf(2 * samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            buf[2 * i] = samples[i].real();
            buf[2 * i + 1] = samples[i].imag();
        }
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double)));
    }
    if (!out) throw IoError("write to '" + path + "' failed");
}

CVec read_waveform(const std::string& path, SampleFormat fmt) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open '" + path + "'");
    const auto size = static_cast<std::size_t>(in.tellg());
    const std::size_t bps = bytes_per_sample(fmt);
    if (size == 0) throw IoError("'" + path + "' is empty");
    if (size % bps != 0) throw IoError("'" + path + "' size is not a multiple of the sample size");
    in.seekg(0);
    const std::size_t n = size / bps;
    CVec out(n);
    if (fmt == SampleFormat::Cf32) {
        std::vector<float> buf(2 * n);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(size));
        for (std::size_t i = 0; i < n; ++i) out[i] = {buf[2 * i], buf[2 * i + 1]};
    } else {
        std::vector<double> buf(2 * n);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(size));
        for (std::size_t i = 0; i < n; ++i) out[i] = {buf[2 * i], buf[2 * i + 1]};
    }
    if (!in) throw IoError("read from '" + path + "' failed");
    return out;
}

}  // namespace ssb
