#pragma once

// Deterministic parallel Monte Carlo engine. Realizations are independent
// work items; per-realization records are gathered in fixed-size chunks and
// reduced sequentially in ascending realization order with Welford updates,
// so the output is bit-identical for any worker count.
//
// Stream per realization: derive_stream(master_seed, m, r). On a numerical
// failure the realization is retried once with the flagged stream
// derive_stream(master_seed, m, r, retry=true); a realization failing twice
// is dropped from the averages. More than 0.1% retried-or-dropped aborts.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "qperc/eigenstats.hpp"
#include "qperc/lattice.hpp"
#include "qperc/percolation.hpp"
#include "qperc/rng.hpp"
#include "qperc/spectral.hpp"
#include "qperc/transport.hpp"

namespace qperc {

struct EnsembleConfig {
    int L = 7;
    std::vector<int> m_values{1, 2, 4, 8, 16, 32, 84};
    int realizations = 4000;
    std::uint64_t master_seed = 42;
    int grid_stride = 1;
    int threads = 1;
    bool with_transport = true;   // mu_c, mu_i
    bool with_cluster = true;     // zeta, wrap fraction, p_w
    bool with_eigenstats = true;  // xi_l, nu_l, gamma, xi_avg
    std::string out_dir = "out";
};

inline void validate_config(const EnsembleConfig& cfg) {
    if (cfg.L < 2) throw std::invalid_argument("config: L must be >= 2");
    if (cfg.realizations < 1) throw std::invalid_argument("config: realizations must be >= 1");
    if (cfg.grid_stride < 1) throw std::invalid_argument("config: grid_stride must be >= 1");
    if (cfg.threads < 1) throw std::invalid_argument("config: threads must be >= 1");
    if (cfg.m_values.empty()) throw std::invalid_argument("config: empty m list");
    for (int m : cfg.m_values)
        if (m < 1) throw std::invalid_argument("config: m values must be >= 1");
    if (!cfg.with_transport && !cfg.with_cluster && !cfg.with_eigenstats)
        throw std::invalid_argument("config: no observables selected");
}

// n = 0, stride, 2*stride, ...; the endpoint B is always included.
inline std::vector<int> make_grid(int L, int stride) {
    const int B = bond_count(L);
    std::vector<int> grid;
    for (int n = 0; n <= B; n += stride) grid.push_back(n);
    if (grid.back() != B) grid.push_back(B);
    return grid;
}

struct CurvePoint {
    double p = 0;
    double mean = 0;
    double stderr_ = 0;
    long long count = 0;
};

struct EigenCurvePoint {
    double p = 0;
    int l = 0;  // 1-based
    double mean = 0;
    double stderr_ = 0;
    long long count = 0;
};

struct ScalarEstimate {
    double mean = 0;
    double stderr_ = 0;
    long long count = 0;
};

struct MResult {
    int m = 1;
    std::vector<CurvePoint> mu_c, mu_i, zeta, wrap, gamma, xi_avg;
    std::vector<EigenCurvePoint> xi_l, nu_l;  // grid-major, then l
    ScalarEstimate p_w;
    long long retried = 0;
    long long dropped = 0;
};

struct EnsembleResult {
    EnsembleConfig config;
    std::vector<int> grid;
    std::vector<MResult> per_m;
};

namespace detail {

struct Welford {
    long long n = 0;
    double mean = 0;
    double m2 = 0;
    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double stderr_() const {
        if (n < 2) return 0.0;
        return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    }
};

// Per-grid-point record layout inside one realization's flat buffer.
struct RecordLayout {
    bool transport = false, cluster = false, eigenstats = false;
    int N = 0;
    int mu_c = -1, mu_i = -1, zeta = -1, wrap = -1, gamma = -1, xi_avg = -1;
    int xi0 = -1, nu0 = -1;  // starts of the per-l blocks
    int per_point = 0;
    bool has_pw = false;

    RecordLayout(const EnsembleConfig& cfg, int num_sites) {
        transport = cfg.with_transport;
        cluster = cfg.with_cluster;
        eigenstats = cfg.with_eigenstats;
        N = num_sites;
        int off = 0;
        if (transport) {
            mu_c = off++;
            mu_i = off++;
        }
        if (cluster) {
            zeta = off++;
            wrap = off++;
        }
        if (eigenstats) {
            gamma = off++;
            xi_avg = off++;
            xi0 = off;
            off += N;
            nu0 = off;
            off += N;
        }
        per_point = off;
        has_pw = cluster;
    }
    int record_size(int grid_points) const { return grid_points * per_point + (has_pw ? 1 : 0); }
    bool needs_eig() const { return transport || eigenstats; }
};

inline void compute_realization(const Lattice& lat, const std::vector<int>& grid,
                                const RecordLayout& lay, int m, std::mt19937_64 rng,
                                const RealVector& psi_coherent, double* rec) {
    const GrowthTrajectory tr = grow_trajectory(lat, m, rng);
    const int B = lat.num_bonds();
    RealMatrix H0;
    if (lay.needs_eig()) H0 = RealMatrix::Zero(lat.num_sites, lat.num_sites);
    std::size_t gi = 0;
    for (int n = 0; n <= B && gi < grid.size(); ++n) {
        if (lay.needs_eig() && n > 0) {
            const Bond& bd = lat.bonds[tr.order[n - 1]];
            H0(bd.a, bd.b) -= 1.0;
            H0(bd.b, bd.a) -= 1.0;
            H0(bd.a, bd.a) += 1.0;
            H0(bd.b, bd.b) += 1.0;
        }
        if (n != grid[gi]) continue;
        double* pt = rec + gi * lay.per_point;
        if (lay.needs_eig()) {
            const auto dec = eig_hermitian(H0);
            if (lay.transport) {
                pt[lay.mu_c] = dark_survival(dec, lat.sinks, psi_coherent).efficiency;
                pt[lay.mu_i] = 1.0 - static_cast<double>(tr.sink_free[n]) / lat.L;
            }
            if (lay.eigenstats) {
                const auto profiles = eigenstate_profiles(dec, lat.sources, lat.sinks);
                double gamma = 0, xi_sum = 0;
                for (int l = 0; l < lay.N; ++l) {
                    pt[lay.xi0 + l] = profiles[l].xi;
                    pt[lay.nu0 + l] = profiles[l].nu;
                    gamma += profiles[l].nu;
                    xi_sum += profiles[l].xi;
                }
                pt[lay.gamma] = gamma;
                pt[lay.xi_avg] = xi_sum / lay.N;
            }
        }
        if (lay.cluster) {
            pt[lay.zeta] = tr.zeta[n];
            pt[lay.wrap] = (tr.wrap_step >= 0 && n >= tr.wrap_step) ? 1.0 : 0.0;
        }
        ++gi;
    }
    if (lay.has_pw) rec[grid.size() * lay.per_point] = static_cast<double>(tr.wrap_step) / B;
}

}  // namespace detail

using ProgressFn = std::function<void(int m, long long done, long long total)>;

inline EnsembleResult run_ensemble(const EnsembleConfig& cfg, const ProgressFn& progress = {}) {
    validate_config(cfg);
    const Lattice lat = build_lattice(cfg.L);
    const std::vector<int> grid = make_grid(cfg.L, cfg.grid_stride);
    const detail::RecordLayout lay(cfg, lat.num_sites);
    const int G = static_cast<int>(grid.size());
    const int rec_size = lay.record_size(G);
    const long long R = cfg.realizations;

    RealVector psi = RealVector::Zero(lat.num_sites);
    for (int s : lat.sources) psi[s] = 1.0 / std::sqrt(static_cast<double>(lat.L));

    EnsembleResult out;
    out.config = cfg;
    out.grid = grid;

    constexpr long long kChunk = 64;
    std::vector<std::vector<double>> buf(kChunk, std::vector<double>(rec_size));
    std::vector<char> ok(kChunk);

    for (int m : cfg.m_values) {
        std::vector<detail::Welford> acc(rec_size);
        std::atomic<long long> retried{0};
        long long dropped = 0;

        for (long long c0 = 0; c0 < R; c0 += kChunk) {
            const long long c1 = std::min(R, c0 + kChunk);
            std::atomic<long long> next{c0};
            auto worker = [&] {
                for (;;) {
                    const long long r = next.fetch_add(1);
                    if (r >= c1) break;
                    double* rec = buf[r - c0].data();
                    std::fill(rec, rec + rec_size, 0.0);
                    char good = 0;
                    try {
                        detail::compute_realization(
                            lat, grid, lay, m,
                            derive_stream(cfg.master_seed, static_cast<std::uint32_t>(m),
                                          static_cast<std::uint32_t>(r)),
                            psi, rec);
                        good = 1;
                    } catch (const std::exception&) {
                        retried.fetch_add(1);
                        try {
                            std::fill(rec, rec + rec_size, 0.0);
                            detail::compute_realization(
                                lat, grid, lay, m,
                                derive_stream(cfg.master_seed, static_cast<std::uint32_t>(m),
                                              static_cast<std::uint32_t>(r), true),
                                psi, rec);
                            good = 1;
                        } catch (const std::exception&) {
                            good = 0;
                        }
                    }
                    ok[r - c0] = good;
                }
            };
            if (cfg.threads == 1) {
                worker();
            } else {
                std::vector<std::thread> pool;
                const int nw = std::min<long long>(cfg.threads, c1 - c0);
                pool.reserve(nw);
                for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
                for (auto& th : pool) th.join();
            }
            for (long long r = c0; r < c1; ++r) {
                if (!ok[r - c0]) {
                    ++dropped;
                    continue;
                }
                const double* rec = buf[r - c0].data();
                for (int i = 0; i < rec_size; ++i) acc[i].add(rec[i]);
            }
            if ((retried.load() + dropped) * 1000 > R)
                throw NumericalError("run_ensemble: failure rate above 0.1%, aborting");
            if (progress) progress(m, c1, R);
        }

        MResult mr;
        mr.m = m;
        mr.retried = retried.load();
        mr.dropped = dropped;
        auto curve = [&](int field) {
            std::vector<CurvePoint> pts;
            if (field < 0) return pts;
            pts.reserve(G);
            for (int g = 0; g < G; ++g) {
                const auto& w = acc[g * lay.per_point + field];
                pts.push_back({bond_fraction(grid[g], lat), w.mean, w.stderr_(), w.n});
            }
            return pts;
        };
        mr.mu_c = curve(lay.mu_c);
        mr.mu_i = curve(lay.mu_i);
        mr.zeta = curve(lay.zeta);
        mr.wrap = curve(lay.wrap);
        mr.gamma = curve(lay.gamma);
        mr.xi_avg = curve(lay.xi_avg);
        if (lay.eigenstats) {
            mr.xi_l.reserve(static_cast<std::size_t>(G) * lay.N);
            mr.nu_l.reserve(static_cast<std::size_t>(G) * lay.N);
            for (int g = 0; g < G; ++g) {
                const double p = bond_fraction(grid[g], lat);
                for (int l = 0; l < lay.N; ++l) {
                    const auto& wx = acc[g * lay.per_point + lay.xi0 + l];
                    const auto& wn = acc[g * lay.per_point + lay.nu0 + l];
                    mr.xi_l.push_back({p, l + 1, wx.mean, wx.stderr_(), wx.n});
                    mr.nu_l.push_back({p, l + 1, wn.mean, wn.stderr_(), wn.n});
                }
            }
        }
        if (lay.has_pw) {
            const auto& w = acc[static_cast<std::size_t>(G) * lay.per_point];
            mr.p_w = {w.mean, w.stderr_(), w.n};
        }
        out.per_m.push_back(std::move(mr));
    }
    return out;
}

}  // namespace qperc
