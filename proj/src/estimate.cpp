#include "ssblab/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

namespace ssb {

ModelParams model_params(const ScenarioConfig& cfg) {
    ModelParams mp;
    mp.P = cfg.P;
    mp.N_f = cfg.N_f;
    mp.tau0 = cfg.tau0;
    mp.sigma_n2 = cfg.sigma_n2;
    mp.sigma_c2 = cfg.leakage();
    mp.N = cfg.N;
    return mp;
}

double CellState::power() const {
    double s = 0.0;
    for (const auto& a : alpha) s += std::norm(a);
    return s;
}

CellState make_cell(const SyncSequence& c0, const SyncSequence& c1, int nid1, int nid2, long tau,
                    int P) {
    CellState c;
    c.nid1 = nid1;
    c.nid2 = nid2;
    c.c0 = c0;
    c.c1 = c1;
    c.tau = tau;
    c.alpha.assign(P, cplx{});
    return c;
}

namespace {

struct Interval {
    long lo, hi;
    ColumnRef col;
};

long ssb_start(const CellState& c, const ModelParams& mp, int p) {
    return c.tau + static_cast<long>(p) * mp.N_f;
}

void check_cells(const std::vector<CellState>& cells, const ModelParams& mp, long n_obs) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto& c = cells[k];
        if (c.N() != mp.N || static_cast<int>(c.c1.size()) != mp.N)
            throw DomainError("model: cell " + std::to_string(k) + " sequence length differs from N");
        if (static_cast<int>(c.alpha.size()) != mp.P)
            throw DomainError("model: cell " + std::to_string(k) + " gain count differs from P");
        const long last = ssb_start(c, mp, mp.P - 1) + mp.frame_len();
        if (c.tau < 0 || last > n_obs)
            throw RangeError("model: cell " + std::to_string(k) + " SSB grid leaves the observation");
    }
}

// c0 and c1 rotated by the CFO relative to the SSB start; an SSB starting at s adds
// the common factor exp(-j*omega*s).
struct Rotated {
    std::vector<cplx> u0, u1;
};

Rotated rotate(const CellState& c, const ModelParams& mp) {
    Rotated r;
    r.u0.resize(mp.N);
    r.u1.resize(mp.N);
    for (int n = 0; n < mp.N; ++n) {
        r.u0[n] = c.c0.samples[n] * cfo_rotation(c.omega, n);
        r.u1[n] = c.c1.samples[n] * cfo_rotation(c.omega, mp.tau_c() + n);
    }
    return r;
}

std::string column_name(const std::vector<CellState>& cells, const ColumnRef& r) {
    const auto& c = cells[r.cell];
    std::ostringstream os;
    os << "(cell " << r.cell << " id " << c.nid1 << "/" << c.nid2 << " tau " << c.tau << ", ssb "
       << r.ssb << ")";
    return os.str();
}

}  // namespace

ModelMatrices build_model(const std::vector<CellState>& cells, const ModelParams& mp, long n_obs) {
    check_cells(cells, mp, n_obs);
    const int N = mp.N;
    const int L = mp.frame_len();
    std::vector<Interval> iv;
    for (int k = 0; k < static_cast<int>(cells.size()); ++k)
        for (int p = 0; p < mp.P; ++p) {
            const long s = ssb_start(cells[k], mp, p);
            iv.push_back({s, s + L, {k, p}});
        }
    std::sort(iv.begin(), iv.end(), [](const Interval& a, const Interval& b) {
        return a.lo != b.lo ? a.lo < b.lo : a.col.cell < b.col.cell;
    });

    std::vector<Rotated> rot;
    for (const auto& c : cells) rot.push_back(rotate(c, mp));

    ModelMatrices mm;
    mm.n_obs = n_obs;
    std::size_t i = 0;
    while (i < iv.size()) {
        long lo = iv[i].lo, hi = iv[i].hi;
        std::size_t j = i;
        std::vector<ColumnRef> cols;
        while (j < iv.size() && iv[j].lo < hi) {
            hi = std::max(hi, iv[j].hi);
            cols.push_back(iv[j].col);
            ++j;
        }
        ModelBlock b;
        b.row0 = lo;
        b.cols = cols;
        const long rows = hi - lo;
        b.A0 = Eigen::MatrixXcd::Zero(rows, cols.size());
        b.A1 = Eigen::MatrixXcd::Zero(rows, cols.size());
        Eigen::VectorXd mu(cols.size());
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const auto& cell = cells[cols[c].cell];
            const Rotated& u = rot[cols[c].cell];
            const long s = ssb_start(cell, mp, cols[c].ssb);
            const cplx ph = cfo_rotation(cell.omega, s);
            for (int n = 0; n < N; ++n) {
                b.A0(s + n - lo, c) = ph * u.u0[n];
                b.A1(s + mp.tau_c() + n - lo, c) = ph * u.u1[n];
            }
            mu(c) = cell.mu;
        }
        b.A = b.A0 + b.A1 * mu.cast<cplx>().asDiagonal();
        mm.blocks.push_back(std::move(b));
        i = j;
    }
    return mm;
}

CVec reconstruct(const ModelMatrices& m, const std::vector<CellState>& cells) {
    CVec out(m.n_obs, cplx{});
    for (const auto& b : m.blocks) {
        Eigen::VectorXcd a(b.cols.size());
        for (std::size_t c = 0; c < b.cols.size(); ++c)
            a(c) = cells[b.cols[c].cell].alpha[b.cols[c].ssb];
        const Eigen::VectorXcd v = b.A * a;
        for (long r = 0; r < v.size(); ++r) out[b.row0 + r] += v(r);
    }
    return out;
}

CVec reconstruct(const std::vector<CellState>& cells, const ModelParams& mp, long n_obs) {
    CVec out(n_obs, cplx{});
    for (const auto& c : cells) add_contribution(out, c, mp, 1.0);
    return out;
}

void add_contribution(CVec& target, const CellState& cell, const ModelParams& mp, double sign) {
    const int N = mp.N;
    const Rotated u = rotate(cell, mp);
    for (int p = 0; p < mp.P; ++p) {
        const long s = ssb_start(cell, mp, p);
        if (s < 0 || s + mp.frame_len() > static_cast<long>(target.size()))
            throw RangeError("add_contribution: SSB outside the observation");
        const cplx a = sign * cell.alpha[p] * cfo_rotation(cell.omega, s);
        const cplx a1 = a * cell.mu;
        cplx* t0 = target.data() + s;
        cplx* t1 = target.data() + s + mp.tau_c();
        for (int n = 0; n < N; ++n) {
            t0[n] += a * u.u0[n];
            t1[n] += a1 * u.u1[n];
        }
    }
}

std::vector<std::vector<cplx>> estimate_channel_gains(const CVec& y,
                                                      const std::vector<CellState>& cells,
                                                      const ModelParams& mp) {
    const ModelMatrices mm = build_model(cells, mp, static_cast<long>(y.size()));
    std::vector<std::vector<cplx>> alpha(cells.size(), std::vector<cplx>(mp.P));
    for (const auto& b : mm.blocks) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(b.A);
        qr.setThreshold(1e-10);
        if (qr.rank() < static_cast<long>(b.cols.size())) {
            std::string msg = "estimate_channel_gains: rank-deficient model, colliding columns";
            const auto& perm = qr.colsPermutation().indices();
            for (long r = qr.rank(); r < perm.size(); ++r) msg += " " + column_name(cells, b.cols[perm(r)]);
            throw DegeneracyError(msg);
        }
        Eigen::VectorXcd seg(b.A.rows());
        for (long r = 0; r < seg.size(); ++r) seg(r) = y[b.row0 + r];
        const Eigen::VectorXcd x = qr.solve(seg);
        for (std::size_t c = 0; c < b.cols.size(); ++c) alpha[b.cols[c].cell][b.cols[c].ssb] = x(c);
    }
    return alpha;
}

std::vector<double> estimate_scaling(const CVec& y, const std::vector<CellState>& cells,
                                     const ModelParams& mp) {
    const long n_obs = static_cast<long>(y.size());
    check_cells(cells, mp, n_obs);
    const int K = static_cast<int>(cells.size());
    if (K == 0) return {};

    // Residual after removing the first-sequence parts of every cell.
    CVec r = y;
    std::vector<long> row_of(n_obs, -1);
    long rows = 0;
    std::vector<Rotated> rot;
    for (const auto& c : cells) rot.push_back(rotate(c, mp));
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto& c = cells[k];
        for (int p = 0; p < mp.P; ++p) {
            const long s = ssb_start(c, mp, p);
            const cplx a = c.alpha[p] * cfo_rotation(c.omega, s);
            for (int n = 0; n < mp.N; ++n) {
                r[s + n] -= a * rot[k].u0[n];
                const long m1 = s + mp.tau_c() + n;
                if (row_of[m1] < 0) row_of[m1] = rows++;
            }
        }
    }
    Eigen::MatrixXd Bm = Eigen::MatrixXd::Zero(2 * rows, K);
    Eigen::VectorXd rhs(2 * rows);
    for (long m = 0; m < n_obs; ++m) {
        if (row_of[m] < 0) continue;
        rhs(2 * row_of[m]) = r[m].real();
        rhs(2 * row_of[m] + 1) = r[m].imag();
    }
    for (int k = 0; k < K; ++k) {
        const auto& c = cells[k];
        for (int p = 0; p < mp.P; ++p) {
            const long s = ssb_start(c, mp, p) + mp.tau_c();
            const cplx a = c.alpha[p] * cfo_rotation(c.omega, s - mp.tau_c());
            for (int n = 0; n < mp.N; ++n) {
                const cplx v = a * rot[k].u1[n];
                Bm(2 * row_of[s + n], k) += v.real();
                Bm(2 * row_of[s + n] + 1, k) += v.imag();
            }
        }
        if (!(Bm.col(k).squaredNorm() > 0.0))
            throw DegeneracyError("estimate_scaling: cell " + std::to_string(k) + " (id " +
                                  std::to_string(c.nid1) + "/" + std::to_string(c.nid2) +
                                  ") has zero second-sequence energy");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Bm);
    qr.setThreshold(1e-10);
    if (qr.rank() < K) throw DegeneracyError("estimate_scaling: rank-deficient scaling model");
    const Eigen::VectorXd mu = qr.solve(rhs);
    std::vector<double> out(K);
    for (int k = 0; k < K; ++k) out[k] = std::max(mu(k), kMuFloor);
    return out;
}

void fit_gains_and_scaling(const CVec& y, std::vector<CellState>& cells, const ModelParams& mp,
                           int passes, bool fit_scaling) {
    auto update_gains = [&] {
        const auto alpha = estimate_channel_gains(y, cells, mp);
        for (std::size_t k = 0; k < cells.size(); ++k) cells[k].alpha = alpha[k];
    };
    update_gains();
    if (!fit_scaling) return;
    for (int it = 0; it < std::max(1, passes); ++it) {
        const auto mu = estimate_scaling(y, cells, mp);
        double change = 0.0;
        for (std::size_t k = 0; k < cells.size(); ++k) {
            change = std::max(change, std::abs(mu[k] - cells[k].mu));
            cells[k].mu = mu[k];
        }
        update_gains();
        if (change < 1e-12) break;
    }
}

double cfo_single(cplx r0, cplx r1, int tau_c) {
    if (r0 == cplx{}) throw UndefinedError("cfo_single: r0 is zero");
    if (tau_c <= 0) throw DomainError("cfo_single: tau_c must be positive");
    return wrap_cfo(-std::arg(r1 * std::conj(r0)) / tau_c, tau_c);
}

double cfo_multi(const CorrelationSet& cs, const std::vector<cplx>& alpha, double mu, int tau_c) {
    if (alpha.size() != cs.r.size() || cs.sigma2.size() != cs.r.size())
        throw DomainError("cfo_multi: gain, correlation and variance counts differ");
    if (tau_c <= 0) throw DomainError("cfo_multi: tau_c must be positive");
    cplx psi0{}, psi1{};
    for (std::size_t p = 0; p < cs.r.size(); ++p) {
        const double s0 = cs.sigma2[p][0], s1 = cs.sigma2[p][1];
        if (!(s0 > 0.0) || !(s1 > 0.0) || !std::isfinite(s0) || !std::isfinite(s1)) continue;
        psi0 += alpha[p] * std::conj(cs.r[p][0]) / s0;
        psi1 += alpha[p] * mu * std::conj(cs.r[p][1]) / s1;
    }
    if (psi0 == cplx{} || psi1 == cplx{}) throw UndefinedError("cfo_multi: all weights vanish");
    return wrap_cfo(std::arg(psi1 * std::conj(psi0)) / tau_c, tau_c);
}

bool trace_non_increasing(const std::vector<double>& trace, int from) {
    for (std::size_t i = static_cast<std::size_t>(std::max(from, 1)); i < trace.size(); ++i)
        if (trace[i] > trace[i - 1]) return false;
    return true;
}

namespace {

// Correlations of the compensated single-cell residual; `res` is y minus every other cell.
CorrelationSet cell_correlations(const CVec& res, const CellState& c, const ModelParams& mp) {
    CorrelationSet cs;
    cs.r.resize(mp.P);
    cs.sigma2.assign(mp.P, {1.0, 1.0});
    const double inv_n = 1.0 / mp.N;
    const Rotated u = rotate(c, mp);
    for (int p = 0; p < mp.P; ++p) {
        const long s = ssb_start(c, mp, p);
        const cplx ph = std::conj(cfo_rotation(c.omega, s));
        for (int i = 0; i < 2; ++i) {
            const cplx* x = res.data() + s + i * mp.tau_c();
            const auto& v = i == 0 ? u.u0 : u.u1;
            cplx acc{};
            for (int n = 0; n < mp.N; ++n) acc += x[n] * std::conj(v[n]);
            cs.r[p][i] = acc * ph * inv_n;
        }
    }
    return cs;
}

// Single-column LS of every SSB gain of one cell against res.
void refit_cell(const CVec& res, CellState& c, const ModelParams& mp) {
    const Rotated u = rotate(c, mp);
    for (int p = 0; p < mp.P; ++p) {
        const long s = ssb_start(c, mp, p);
        cplx num{};
        double den = 0.0;
        for (int i = 0; i < 2; ++i) {
            const cplx* x = res.data() + s + i * mp.tau_c();
            const auto& v = i == 0 ? u.u0 : u.u1;
            const double scale = i == 0 ? 1.0 : c.mu;
            for (int n = 0; n < mp.N; ++n) {
                const cplx col = scale * v[n];
                num += std::conj(col) * x[n];
                den += std::norm(col);
            }
        }
        num *= std::conj(cfo_rotation(c.omega, s));
        c.alpha[p] = den > 0.0 ? num / den : cplx{};
    }
}

}  // namespace

EstimateReport sic_refine(const CVec& y, std::vector<CellState>& cells, const SicOptions& opts) {
    const ModelParams& mp = opts.model;
    const int K = static_cast<int>(cells.size());
    EstimateReport rep;
    rep.epsilon = opts.epsilon > 0.0 ? opts.epsilon : 1e-7 * std::max(K, 1);
    std::vector<std::vector<double>> deltas(K);
    if (K == 0) {
        rep.converged = true;
        return rep;
    }
    const long n_obs = static_cast<long>(y.size());
    const int tau_c = mp.tau_c();

    for (int it = 1; it <= opts.max_iters; ++it) {
        fit_gains_and_scaling(y, cells, mp, opts.scaling_passes, opts.fit_scaling);

        std::vector<int> order(K);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return cells[a].power() > cells[b].power(); });

        CVec recon = reconstruct(cells, mp, n_obs);
        double sum = 0.0;
        for (int k : order) {
            auto& c = cells[k];
            add_contribution(recon, c, mp, -1.0);
            CVec res(n_obs);
            for (long m = 0; m < n_obs; ++m) res[m] = y[m] - recon[m];

            CorrelationSet cs = cell_correlations(res, c, mp);
            if (it == 1) {
                for (auto& s : cs.sigma2) s = {mp.sigma_n2 / mp.N, mp.sigma_n2 / mp.N};
            } else {
                std::vector<std::vector<cplx>> gains(K);
                for (int q = 0; q < K; ++q) gains[q] = cells[q].alpha;
                cs.sigma2 = model_variances(gains, k, c.mu, mp.sigma_c2, mp.sigma_n2, mp.N);
            }
            for (auto& s : cs.sigma2)
                for (auto& v : s) v = std::max(v, 1e-30);

            double delta = 0.0;
            try {
                if (opts.mode == CfoMode::Multi) {
                    delta = cfo_multi(cs, c.alpha, c.mu, tau_c);
                } else {
                    int best = 0;
                    for (int p = 1; p < mp.P; ++p)
                        if (std::norm(c.alpha[p]) > std::norm(c.alpha[best])) best = p;
                    delta = cfo_single(cs.r[best][0], cs.r[best][1], tau_c);
                }
            } catch (const UndefinedError&) {
                delta = 0.0;
            }
            c.omega = wrap_cfo(c.omega + delta, tau_c);
            refit_cell(res, c, mp);
            add_contribution(recon, c, mp, 1.0);
            deltas[k].push_back(std::abs(delta));
            sum += std::abs(delta);
        }
        rep.residual_trace.push_back(sum);
        rep.iterations = it;
        if (sum < rep.epsilon) {
            rep.converged = true;
            break;
        }
    }
    fit_gains_and_scaling(y, cells, mp, opts.final_scaling_passes, opts.fit_scaling);

    for (int k = 0; k < K; ++k) {
        CellEstimate e;
        e.state_index = k;
        e.nid1 = cells[k].nid1;
        e.nid2 = cells[k].nid2;
        e.tau0 = cells[k].tau;
        e.omega = cells[k].omega;
        e.mu = cells[k].mu;
        e.alpha = cells[k].alpha;
        e.power = cells[k].power();
        e.delta_trace = deltas[k];
        for (int p = 0; p < mp.P; ++p) e.grid.push_back(cells[k].tau + static_cast<long>(p) * mp.N_f);
        rep.cells.push_back(std::move(e));
    }
    std::stable_sort(rep.cells.begin(), rep.cells.end(),
                     [](const CellEstimate& a, const CellEstimate& b) { return a.power > b.power; });
    return rep;
}

EstimateReport sic_joint_estimate(const CVec& y, const DetectionResult& det, const SicOptions& opts) {
    std::vector<CellState> cells;
    for (const auto& d : det.cells) {
        cells.push_back(make_cell(reference_c0(opts.family, opts.model.N, d.nid1, d.nid2),
                                  reference_c1(opts.family, opts.model.N, d.nid1, d.nid2), d.nid1,
                                  d.nid2, d.tau0, opts.model.P));
    }
    EstimateReport rep = sic_refine(y, cells, opts);
    attach_detection(rep, det);
    return rep;
}

void attach_detection(EstimateReport& rep, const DetectionResult& det) {
    for (auto& e : rep.cells) {
        if (e.state_index < 0 || e.state_index >= static_cast<int>(det.cells.size())) continue;
        const auto& d = det.cells[e.state_index];
        e.detected_ssbs = d.detected_ssbs;
        if (!d.grid.empty()) e.grid = d.grid;
    }
}

}  // namespace ssb
