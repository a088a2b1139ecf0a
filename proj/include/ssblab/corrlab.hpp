#pragma once

#include <array>
#include <vector>

#include "ssblab/common.hpp"
#include "ssblab/seqgen.hpp"

namespace ssb {

/// (1/N) * sum_m y[offset+m] * conj(seq[m]). Throws RangeError if the window leaves y.
cplx xcorr(const CVec& y, const SyncSequence& seq, long offset);

/// r(omega) = (1/N) * sum_m |c[m]|^2 exp(-j*omega*m), by direct summation.
cplx autocorr_profile(const SyncSequence& seq, double omega);

/// |sin(N w/2) / (N sin(w/2))|
double dirichlet(int N, double omega);

struct Envelope {
    std::vector<double> values;  // indexed by offset t
    std::vector<int> root;       // winning root per offset (-1 for single-root envelopes)
    int window = 0;
};

/// Lambda(t) = max_l |xcorr(y, bank[l], t)|^2 for every t with a full window.
Envelope correlation_envelope(const CVec& y, const std::vector<SyncSequence>& bank);

/// |xcorr(y, seq, t)|^2 for every t, direct evaluation.
Envelope root_envelope(const CVec& y, const SyncSequence& seq);

/// Frequency-domain evaluation of root_envelope.
Envelope root_envelope_fft(const CVec& y, const SyncSequence& seq);

/// Frequency-domain evaluation of the full complex correlation (1/N) sum y[t+m] conj(c[m]).
CVec xcorr_all_fft(const CVec& y, const SyncSequence& seq);

/// The 2P correlator outputs of one BS and their modeled variances.
struct CorrelationSet {
    // r[p][i]
    std::vector<std::array<cplx, 2>> r;
    std::vector<std::array<double, 2>> sigma2;

    std::size_t ssb_count() const { return r.size(); }
};

/// Correlator outputs for one BS on the grid tau + p*N_f (window i shifted by tau_c).
CorrelationSet correlate_bs(const CVec& y, const SyncSequence& c0, const SyncSequence& c1,
                            long tau, int P, int N_f, int tau_c);

/// Per-SSB interference-plus-noise variances for BS k.
///
/// gains[q][p] are the (true or current) gains of every BS; entry k is ignored.
std::vector<std::array<double, 2>> model_variances(const std::vector<std::vector<cplx>>& gains,
                                                   int k, double mu_k, double sigma_c2,
                                                   double sigma_n2, int N);

}  // namespace ssb
