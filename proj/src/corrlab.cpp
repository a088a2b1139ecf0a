#include "ssblab/corrlab.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <string>

namespace ssb {

cplx xcorr(const CVec& y, const SyncSequence& seq, long offset) {
    const long n = static_cast<long>(seq.size());
    if (offset < 0 || offset + n > static_cast<long>(y.size()))
        throw RangeError("xcorr: window [" + std::to_string(offset) + ", " +
                         std::to_string(offset + n) + ") outside observation of length " +
                         std::to_string(y.size()));
    cplx acc{};
    for (long m = 0; m < n; ++m) acc += y[offset + m] * std::conj(seq.samples[m]);
    return acc / static_cast<double>(n);
}

cplx autocorr_profile(const SyncSequence& seq, double omega) {
    const int n = static_cast<int>(seq.size());
    cplx acc{};
    for (int m = 0; m < n; ++m) acc += std::norm(seq.samples[m]) * cfo_rotation(omega, m);
    return acc / static_cast<double>(n);
}

double dirichlet(int N, double omega) {
    const double den = N * std::sin(omega / 2.0);
    if (std::abs(den) < 1e-300) return 1.0;
    return std::abs(std::sin(N * omega / 2.0) / den);
}

Envelope root_envelope(const CVec& y, const SyncSequence& seq) {
    Envelope env;
    env.window = static_cast<int>(seq.size());
    const long count = static_cast<long>(y.size()) - env.window + 1;
    if (count <= 0) return env;
    env.values.resize(count);
    env.root.assign(count, -1);
    for (long t = 0; t < count; ++t) env.values[t] = std::norm(xcorr(y, seq, t));
    return env;
}

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::size_t fft_size(std::size_t n) {
    std::size_t s = 1;
    while (s < n) s <<= 1;
    return s;
}

}  // namespace

CVec xcorr_all_fft(const CVec& y, const SyncSequence& seq) {
    const long n = static_cast<long>(seq.size());
    const long count = static_cast<long>(y.size()) - n + 1;
    if (count <= 0) return {};
    const std::size_t L = fft_size(y.size() + n);

    auto* a = fftw_alloc_complex(L);
    auto* b = fftw_alloc_complex(L);
    fftw_plan fa, fb, inv;
    {
        std::lock_guard<std::mutex> lk(planner_mutex());
        fa = fftw_plan_dft_1d(static_cast<int>(L), a, a, FFTW_FORWARD, FFTW_ESTIMATE);
        fb = fftw_plan_dft_1d(static_cast<int>(L), b, b, FFTW_FORWARD, FFTW_ESTIMATE);
        inv = fftw_plan_dft_1d(static_cast<int>(L), a, a, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < L; ++i) {
        a[i][0] = a[i][1] = 0.0;
        b[i][0] = b[i][1] = 0.0;
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
        a[i][0] = y[i].real();
        a[i][1] = y[i].imag();
    }
    for (long i = 0; i < n; ++i) {
        b[i][0] = seq.samples[i].real();
        b[i][1] = seq.samples[i].imag();
    }
    fftw_execute(fa);
    fftw_execute(fb);
    // Y * conj(C) gives the circular cross-correlation sum_m y[t+m] conj(c[m]).
    for (std::size_t i = 0; i < L; ++i) {
        const cplx Y(a[i][0], a[i][1]);
        const cplx C(b[i][0], b[i][1]);
        const cplx Z = Y * std::conj(C);
        a[i][0] = Z.real();
        a[i][1] = Z.imag();
    }
    fftw_execute(inv);
    CVec out(count);
    const double scale = 1.0 / (static_cast<double>(L) * n);
    for (long t = 0; t < count; ++t) out[t] = cplx(a[t][0], a[t][1]) * scale;
    {
        std::lock_guard<std::mutex> lk(planner_mutex());
        fftw_destroy_plan(fa);
        fftw_destroy_plan(fb);
        fftw_destroy_plan(inv);
    }
    fftw_free(a);
    fftw_free(b);
    return out;
}

Envelope root_envelope_fft(const CVec& y, const SyncSequence& seq) {
    Envelope env;
    env.window = static_cast<int>(seq.size());
    const CVec r = xcorr_all_fft(y, seq);
    env.values.resize(r.size());
    env.root.assign(r.size(), -1);
    for (std::size_t t = 0; t < r.size(); ++t) env.values[t] = std::norm(r[t]);
    return env;
}

Envelope correlation_envelope(const CVec& y, const std::vector<SyncSequence>& bank) {
    Envelope env;
    if (bank.empty()) return env;
    for (std::size_t l = 0; l < bank.size(); ++l) {
        const Envelope e = root_envelope(y, bank[l]);
        if (l == 0) {
            env = e;
            env.root.assign(e.values.size(), 0);
            continue;
        }
        for (std::size_t t = 0; t < e.values.size(); ++t) {
            if (e.values[t] > env.values[t]) {
                env.values[t] = e.values[t];
                env.root[t] = static_cast<int>(l);
            }
        }
    }
    return env;
}

CorrelationSet correlate_bs(const CVec& y, const SyncSequence& c0, const SyncSequence& c1,
                            long tau, int P, int N_f, int tau_c) {
    CorrelationSet cs;
    cs.r.resize(P);
    cs.sigma2.assign(P, {1.0, 1.0});
    for (int p = 0; p < P; ++p) {
        const long base = tau + static_cast<long>(p) * N_f;
        cs.r[p][0] = xcorr(y, c0, base);
        cs.r[p][1] = xcorr(y, c1, base + tau_c);
    }
    return cs;
}

std::vector<std::array<double, 2>> model_variances(const std::vector<std::vector<cplx>>& gains,
                                                   int k, double mu_k, double sigma_c2,
                                                   double sigma_n2, int N) {
    if (k < 0 || k >= static_cast<int>(gains.size()))
        throw RangeError("model_variances: BS index out of range");
    const std::size_t P = gains[k].size();
    std::vector<std::array<double, 2>> out(P);
    for (std::size_t p = 0; p < P; ++p) {
        double interf = 0.0;
        for (std::size_t q = 0; q < gains.size(); ++q)
            if (static_cast<int>(q) != k && p < gains[q].size()) interf += std::norm(gains[q][p]);
        for (int i = 0; i < 2; ++i) {
            const double scale = i == 0 ? 1.0 : mu_k * mu_k;
            out[p][i] = (scale * interf * sigma_c2 + sigma_n2) / N;
        }
    }
    return out;
}

}  // namespace ssb
