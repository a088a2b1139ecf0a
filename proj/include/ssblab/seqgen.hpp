#pragma once

#include <cstddef>
#include <vector>

#include "ssblab/common.hpp"

namespace ssb {

enum class Family { Pss, Sss, ZadoffChu };

const char* to_string(Family f);

/// A unit-energy reference sequence and the identity it was generated from.
///
/// identity is (nid2) for PSS, (nid1, nid2) for SSS and (root) for Zadoff-Chu.
struct SyncSequence {
    CVec samples;
    Family family = Family::Pss;
    std::vector<int> identity;

    std::size_t size() const { return samples.size(); }
    const cplx& operator[](std::size_t i) const { return samples[i]; }
};

inline constexpr int kNrSeqLen = 127;
inline constexpr int kNumNid1 = 336;
inline constexpr int kNumNid2 = 3;

/// NR primary synchronization sequence (BPSK m-sequence, cyclic shift 43*nid2).
SyncSequence gen_pss(int nid2);

/// NR secondary synchronization sequence (product of two shifted m-sequences).
SyncSequence gen_sss(int nid1, int nid2);

/// Zadoff-Chu sequence c[m] = exp(-j*pi*root*m*(m+1)/n).
SyncSequence gen_zc(int root, int n);

/// The three PSS roots in nid2 order.
std::vector<SyncSequence> pss_bank();

/// One SSB's composite reference: c0, a zero gap of tau0 samples, then mu*c1.
class SsFrame {
public:
    SsFrame(SyncSequence c0, SyncSequence c1, double mu, int tau0);

    const SyncSequence& c0() const { return c0_; }
    const SyncSequence& c1() const { return c1_; }
    const SyncSequence& seq(int i) const { return i == 0 ? c0_ : c1_; }
    double mu() const { return mu_; }
    int tau0() const { return tau0_; }
    int seq_len() const { return static_cast<int>(c0_.size()); }
    /// Phase baseline between the two sequences, N + tau0.
    int tau_c() const { return seq_len() + tau0_; }
    int length() const { return 2 * seq_len() + tau0_; }

    /// Same sequences with a different scaling factor.
    SsFrame with_mu(double mu) const;

    /// Sample m of the rendered waveform [c0; 0...0; mu*c1]; zero outside [0, length()).
    cplx at(long m) const;
    CVec render() const;

private:
    SyncSequence c0_;
    SyncSequence c1_;
    double mu_;
    int tau0_;
};

SsFrame assemble_frame(const SyncSequence& c0, const SyncSequence& c1, double mu, int tau0);

}  // namespace ssb
