#pragma once

// Post-processing of ensemble curves: effective-start threshold p_a,
// crossover p_b, power-law exponent k, delta-efficiency and
// coherent-incoherent gap curves, and the summary table. Pure functions of
// persisted curves; recomputable from the CSVs alone.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qperc/ensemble.hpp"

namespace qperc {

using Curve = std::vector<CurvePoint>;

inline void require_shared_grid(const Curve& a, const Curve& b, const char* who) {
    if (a.size() != b.size()) throw std::invalid_argument(std::string(who) + ": grid size mismatch");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].p != b[i].p) throw std::invalid_argument(std::string(who) + ": grid mismatch");
}

// Smallest grid p with mean >= threshold.
inline std::optional<double> detect_p_a(const Curve& curve, double threshold = 0.01) {
    for (const auto& pt : curve)
        if (pt.mean >= threshold) return pt.p;
    return std::nullopt;
}

struct CrossPoint {
    double p = 0;
    double mean_m = 0;  // value of the m-curve at the crossing
};

// First grid p where the m-curve strictly exceeds the m=1 curve and stays >=
// for the next 3 grid points. Strictness at the crossing skips the trivial
// ties where both curves are still flat at zero; the 3-point persistence
// suppresses noise-induced early crossings.
inline std::optional<CrossPoint> detect_p_b(const Curve& curve_m, const Curve& curve_1) {
    require_shared_grid(curve_m, curve_1, "detect_p_b");
    const std::size_t n = curve_m.size();
    for (std::size_t i = 0; i + 3 < n; ++i) {
        if (!(curve_m[i].mean > curve_1[i].mean)) continue;
        bool persists = true;
        for (std::size_t j = i + 1; j <= i + 3; ++j)
            if (curve_m[j].mean < curve_1[j].mean) {
                persists = false;
                break;
            }
        if (persists) return CrossPoint{curve_m[i].p, curve_m[i].mean};
    }
    return std::nullopt;
}

struct PowerLawFit {
    bool ok = false;
    double k = 0;
    double intercept = 0;  // of log(mean) vs log(p)
    double r2 = 0;
    int points = 0;
    double p_lo = 0, p_hi = 0;  // p-range actually used
};

// OLS of log(mean) vs log(p) over the window {p > 0 : mean_lo <= mean <= mean_hi}.
// Needs >= 4 points.
inline PowerLawFit fit_power_law(const Curve& curve, double mean_lo = 0.01,
                                 double mean_hi = 0.1) {
    PowerLawFit fit;
    std::vector<double> xs, ys;
    for (const auto& pt : curve) {
        if (pt.p <= 0 || pt.mean < mean_lo || pt.mean > mean_hi) continue;
        xs.push_back(std::log(pt.p));
        ys.push_back(std::log(pt.mean));
        if (fit.points == 0) fit.p_lo = pt.p;
        fit.p_hi = pt.p;
        ++fit.points;
    }
    if (fit.points < 4) return fit;
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / fit.points, my = sy / fit.points;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0) return fit;
    fit.k = sxy / sxx;
    fit.intercept = my - fit.k * mx;
    fit.r2 = (syy > 0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    fit.ok = true;
    return fit;
}

// Pointwise mean_1 - mean_m; standard errors combined in quadrature.
inline Curve delta_efficiency(const Curve& curve_1, const Curve& curve_m) {
    require_shared_grid(curve_1, curve_m, "delta_efficiency");
    Curve out;
    out.reserve(curve_1.size());
    for (std::size_t i = 0; i < curve_1.size(); ++i) {
        const double se = std::sqrt(curve_1[i].stderr_ * curve_1[i].stderr_ +
                                    curve_m[i].stderr_ * curve_m[i].stderr_);
        out.push_back({curve_1[i].p, curve_1[i].mean - curve_m[i].mean, se,
                       std::min(curve_1[i].count, curve_m[i].count)});
    }
    return out;
}

// Pointwise mean_i - mean_c (non-negative up to noise; see transport ordering).
inline Curve coherent_incoherent_gap(const Curve& curve_i, const Curve& curve_c) {
    require_shared_grid(curve_i, curve_c, "coherent_incoherent_gap");
    Curve out;
    out.reserve(curve_i.size());
    for (std::size_t i = 0; i < curve_i.size(); ++i) {
        const double se = std::sqrt(curve_i[i].stderr_ * curve_i[i].stderr_ +
                                    curve_c[i].stderr_ * curve_c[i].stderr_);
        out.push_back({curve_i[i].p, curve_i[i].mean - curve_c[i].mean, se,
                       std::min(curve_i[i].count, curve_c[i].count)});
    }
    return out;
}

struct SummaryRow {
    int m = 1;
    std::optional<double> p_a;
    std::optional<double> p_b;        // m > 1 only
    std::optional<double> mu_at_p_b;  // m > 1 only
    std::optional<double> k;          // needs >= 4 window points
    double p_w = 0;
};

// curve_1 is the m=1 coherent curve (crossover reference). For m=1 the p_b
// and mu(p_b) entries stay empty, matching the table's n/a.
inline SummaryRow summarize_m(int m, const Curve& mu_c, const Curve& curve_1, double p_w) {
    SummaryRow row;
    row.m = m;
    row.p_a = detect_p_a(mu_c);
    if (m > 1) {
        if (const auto cross = detect_p_b(mu_c, curve_1)) {
            row.p_b = cross->p;
            row.mu_at_p_b = cross->mean_m;
        }
    }
    if (const auto fit = fit_power_law(mu_c); fit.ok) row.k = fit.k;
    row.p_w = p_w;
    return row;
}

}  // namespace qperc
