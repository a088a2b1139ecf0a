#pragma once

#include <stdexcept>
#include <string>

#include "ssblab/common.hpp"

namespace ssb {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Headerless interleaved little-endian I/Q: cf32 (float pairs) or cf64 (double pairs).
enum class SampleFormat { Cf32, Cf64 };

const char* to_string(SampleFormat f);
SampleFormat sample_format_from_string(const std::string& s);
std::size_t bytes_per_sample(SampleFormat f);

void write_waveform(const std::string& path, const CVec& samples, SampleFormat fmt);
CVec read_waveform(const std::string& path, SampleFormat fmt);

}  // namespace ssb
