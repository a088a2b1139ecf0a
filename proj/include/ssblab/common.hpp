#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssb {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

inline constexpr double kPi = 3.14159265358979323846;

// Error taxonomy. Each maps to one failure class named in the module contracts.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};
struct RangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UndefinedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoDetectionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Wraps a phase into (-pi, pi].
double wrap_phase(double phase);

/// Wraps a CFO into the unambiguous interval (-pi/baseline, pi/baseline].
double wrap_cfo(double omega, double baseline);

/// splitmix64 finaliser; used to derive independent RNG streams from one seed.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

using Rng = std::mt19937_64;

/// Circular complex Gaussian draw with E|z|^2 = variance.
cplx complex_normal(Rng& rng, double variance);

/// exp(-j * omega * m), the CFO rotation at absolute sample m.
inline cplx cfo_rotation(double omega, long m) {
    return std::polar(1.0, -omega * static_cast<double>(m));
}

}  // namespace ssb
