#pragma once

#include <array>
#include <limits>
#include <vector>

#include "ssblab/common.hpp"

namespace ssb {

/// Value used for bounds that do not exist (radial motion, zero information).
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

inline bool is_unbounded(double v) { return v == kUnbounded; }

struct MotionState {
    double v = 0.0;         // m/s
    double theta = 0.0;     // rad, angle to the line of sight
    double d = 1.0;         // m
    double lambda_c = 0.1;  // m
};

struct CoherenceSpec {
    double delta_max = 0.1;  // Hz
    double tau = 0.0025;     // s
    double tau_p = 0.02;     // s
    double P = 12;
};

struct CrlbInputs {
    double gamma0 = 0.0;
    double gamma1 = 0.0;
    double tau_c = 254;
    double r_mag = 1.0;
};

struct Drift {
    double exact = 0.0;   // Hz
    double approx = 0.0;  // Hz
};

void check(const MotionState& ms);

/// CFO drift after tau seconds of straight-line motion.
Drift cfo_drift(const MotionState& ms, double tau);

/// Largest speed whose first-order drift over tau stays within delta_max; kUnbounded if sin(theta) == 0.
double max_speed(double delta_max, double lambda_c, double d, double theta, double tau);

/// Bound on var(omega) in rad^2/sample^2; kUnbounded when gamma or r_mag vanishes.
double crlb_cfo(const CrlbInputs& in);

struct AggregatedSinr {
    double gamma0 = 0.0;
    double gamma1 = 0.0;
};

AggregatedSinr aggregated_sinr(const std::vector<cplx>& alpha,
                               const std::vector<std::array<double, 2>>& sigma2, double mu);

struct DriftLimited {
    double P_eff = 0.0;
    double crlb = 0.0;  // rad^2/sample^2
};

/// Effective SSB count under CFO drift and the resulting CRLB.
///
/// crlb_in.gamma0/gamma1 are the per-SSB SINRs rho_0, rho_1.
DriftLimited drift_limited(const CoherenceSpec& spec, const MotionState& ms, const CrlbInputs& crlb_in);

/// rad/sample -> Hz
double cfo_to_hz(double omega, double sample_rate);
double hz_to_cfo(double f, double sample_rate);

}  // namespace ssb
