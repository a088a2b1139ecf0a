#include "ssblab/analytics.hpp"

#include <cmath>

namespace ssb {

void check(const MotionState& ms) {
    if (!(ms.v >= 0.0)) throw DomainError("motion: v must be >= 0");
    if (!(ms.d > 0.0)) throw DomainError("motion: d must be > 0");
    if (!(ms.lambda_c > 0.0)) throw DomainError("motion: lambda_c must be > 0");
    if (!std::isfinite(ms.theta)) throw DomainError("motion: theta must be finite");
}

Drift cfo_drift(const MotionState& ms, double tau) {
    check(ms);
    const double c = std::cos(ms.theta);
    const double s = std::sin(ms.theta);
    const double e = ms.v * tau / ms.d;
    // cos(theta(tau)) - cos(theta) = (c + e)/S - c = (e - c (S - 1))/S, S = sqrt(1 + 2ec + e^2)
    const double S = std::sqrt(1.0 + 2.0 * e * c + e * e);
    const double Sm1 = (2.0 * e * c + e * e) / (S + 1.0);
    const double dcos = (e - c * Sm1) / S;
    Drift out;
    out.exact = ms.v / ms.lambda_c * dcos;
    out.approx = tau * ms.v * ms.v * s * s / (ms.lambda_c * ms.d);
    return out;
}

double max_speed(double delta_max, double lambda_c, double d, double theta, double tau) {
    if (!(delta_max > 0.0) || !(lambda_c > 0.0) || !(d > 0.0) || !(tau > 0.0))
        throw DomainError("max_speed: delta_max, lambda_c, d and tau must be positive");
    const double s = std::sin(theta);
    if (std::abs(s) < 1e-12) return kUnbounded;
    return std::sqrt(delta_max * lambda_c * d / (tau * s * s));
}

double crlb_cfo(const CrlbInputs& in) {
    if (!(in.gamma0 >= 0.0) || !(in.gamma1 >= 0.0)) throw DomainError("crlb_cfo: gamma must be >= 0");
    if (!(in.r_mag >= 0.0) || in.r_mag > 1.0 + 1e-12) throw DomainError("crlb_cfo: r_mag must be in [0,1]");
    if (!(in.tau_c > 0.0)) throw DomainError("crlb_cfo: tau_c must be positive");
    if (in.gamma0 == 0.0 || in.gamma1 == 0.0 || in.r_mag == 0.0) return kUnbounded;
    const double num = 1.0 / in.gamma0 + 1.0 / in.gamma1;
    return num / (2.0 * in.tau_c * in.tau_c * in.r_mag * in.r_mag);
}

AggregatedSinr aggregated_sinr(const std::vector<cplx>& alpha,
                               const std::vector<std::array<double, 2>>& sigma2, double mu) {
    if (alpha.size() != sigma2.size()) throw DomainError("aggregated_sinr: length mismatch");
    AggregatedSinr g;
    for (std::size_t p = 0; p < alpha.size(); ++p) {
        const double a2 = std::norm(alpha[p]);
        if (std::isfinite(sigma2[p][0])) g.gamma0 += a2 / sigma2[p][0];
        if (std::isfinite(sigma2[p][1])) g.gamma1 += mu * mu * a2 / sigma2[p][1];
    }
    return g;
}

DriftLimited drift_limited(const CoherenceSpec& spec, const MotionState& ms, const CrlbInputs& in) {
    check(ms);
    if (!(spec.delta_max > 0.0) || !(spec.tau_p > 0.0) || !(spec.P > 0.0))
        throw DomainError("drift_limited: delta_max, tau_p and P must be positive");
    const double s = std::sin(ms.theta);
    const double vs2 = ms.v * ms.v * s * s;
    DriftLimited out;
    if (vs2 < 1e-24) {
        out.P_eff = kUnbounded;
        out.crlb = 0.0;
        return out;
    }
    out.P_eff = spec.delta_max * ms.lambda_c * ms.d / (vs2 * spec.tau_p) * spec.P;
    CrlbInputs agg = in;
    agg.gamma0 = in.gamma0 * out.P_eff;
    agg.gamma1 = in.gamma1 * out.P_eff;
    out.crlb = crlb_cfo(agg);
    return out;
}

double cfo_to_hz(double omega, double sample_rate) {
    return omega * sample_rate / (2.0 * kPi);
}

double hz_to_cfo(double f, double sample_rate) {
    return 2.0 * kPi * f / sample_rate;
}

}  // namespace ssb
