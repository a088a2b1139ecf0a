#include "ssblab/seqgen.hpp"

#include <array>
#include <numeric>
#include <string>

namespace ssb {

namespace {

// Length-127 m-sequence from a 7-bit initial state and feedback taps (i+7) = (i+a) + (i).
std::array<int, kNrSeqLen> m_sequence(const std::array<int, 7>& init, int tap) {
    std::array<int, kNrSeqLen> x{};
    for (int i = 0; i < 7; ++i) x[i] = init[i];
    for (int i = 0; i + 7 < kNrSeqLen; ++i) x[i + 7] = (x[i + tap] + x[i]) % 2;
    return x;
}

}  // namespace

const char* to_string(Family f) {
    switch (f) {
        case Family::Pss: return "pss";
        case Family::Sss: return "sss";
        case Family::ZadoffChu: return "zc";
    }
    return "unknown";
}

SyncSequence gen_pss(int nid2) {
    if (nid2 < 0 || nid2 >= kNumNid2)
        throw DomainError("gen_pss: nid2 must be in {0,1,2}, got " + std::to_string(nid2));
    // x(0..6) = 0 1 1 0 1 1 1
    static const auto x = m_sequence({0, 1, 1, 0, 1, 1, 1}, 4);
    SyncSequence s;
    s.family = Family::Pss;
    s.identity = {nid2};
    s.samples.resize(kNrSeqLen);
    for (int n = 0; n < kNrSeqLen; ++n) {
        const int m = (n + 43 * nid2) % kNrSeqLen;
        s.samples[n] = 1.0 - 2.0 * x[m];
    }
    return s;
}

SyncSequence gen_sss(int nid1, int nid2) {
    if (nid1 < 0 || nid1 >= kNumNid1)
        throw DomainError("gen_sss: nid1 must be in [0,335], got " + std::to_string(nid1));
    if (nid2 < 0 || nid2 >= kNumNid2)
        throw DomainError("gen_sss: nid2 must be in {0,1,2}, got " + std::to_string(nid2));
    static const auto x0 = m_sequence({1, 0, 0, 0, 0, 0, 0}, 4);
    static const auto x1 = m_sequence({1, 0, 0, 0, 0, 0, 0}, 1);
    const int m0 = 15 * (nid1 / 112) + 5 * nid2;
    const int m1 = nid1 % 112;
    SyncSequence s;
    s.family = Family::Sss;
    s.identity = {nid1, nid2};
    s.samples.resize(kNrSeqLen);
    for (int n = 0; n < kNrSeqLen; ++n) {
        const double a = 1.0 - 2.0 * x0[(n + m0) % kNrSeqLen];
        const double b = 1.0 - 2.0 * x1[(n + m1) % kNrSeqLen];
        s.samples[n] = a * b;
    }
    return s;
}

SyncSequence gen_zc(int root, int n) {
    if (n <= 0) throw DomainError("gen_zc: length must be positive");
    if (std::gcd(root, n) != 1)
        throw DomainError("gen_zc: root " + std::to_string(root) + " is not coprime with " +
                          std::to_string(n));
    SyncSequence s;
    s.family = Family::ZadoffChu;
    s.identity = {root};
    s.samples.resize(n);
    // Reduce root*m*(m+1) modulo 2n in integers so the phase stays exact for long sequences.
    const long long two_n = 2LL * n;
    const long long r = ((root % two_n) + two_n) % two_n;
    for (long long m = 0; m < n; ++m) {
        const long long q = (r * ((m * (m + 1)) % two_n)) % two_n;
        s.samples[m] = std::polar(1.0, -kPi * static_cast<double>(q) / static_cast<double>(n));
    }
    return s;
}

std::vector<SyncSequence> pss_bank() {
    return {gen_pss(0), gen_pss(1), gen_pss(2)};
}

SsFrame::SsFrame(SyncSequence c0, SyncSequence c1, double mu, int tau0)
    : c0_(std::move(c0)), c1_(std::move(c1)), mu_(mu), tau0_(tau0) {
    if (c0_.size() != c1_.size())
        throw DomainError("SsFrame: sequence lengths differ (" + std::to_string(c0_.size()) +
                          " vs " + std::to_string(c1_.size()) + ")");
    if (c0_.size() == 0) throw DomainError("SsFrame: empty sequence");
    if (!(mu_ > 0.0)) throw DomainError("SsFrame: mu must be positive");
    if (tau0_ < 0) throw DomainError("SsFrame: tau0 must be non-negative");
}

SsFrame SsFrame::with_mu(double mu) const {
    return SsFrame(c0_, c1_, mu, tau0_);
}

cplx SsFrame::at(long m) const {
    const long n = seq_len();
    if (m < 0) return {};
    if (m < n) return c0_.samples[m];
    if (m < n + tau0_) return {};
    if (m < 2 * n + tau0_) return mu_ * c1_.samples[m - n - tau0_];
    return {};
}

CVec SsFrame::render() const {
    CVec out(length());
    const int n = seq_len();
    for (int m = 0; m < n; ++m) {
        out[m] = c0_.samples[m];
        out[n + tau0_ + m] = mu_ * c1_.samples[m];
    }
    return out;
}

SsFrame assemble_frame(const SyncSequence& c0, const SyncSequence& c1, double mu, int tau0) {
    return SsFrame(c0, c1, mu, tau0);
}

}  // namespace ssb
