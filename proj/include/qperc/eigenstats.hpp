#pragma once

// Localization measures of the sink-free Hamiltonian H0: participation
// ratios, source/sink contribution indicator, per-configuration profiles.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qperc/spectral.hpp"

namespace qperc {

inline double participation_ratio(const RealVector& v) {
    if (std::abs(v.norm() - 1.0) > 1e-8)
        throw std::invalid_argument("participation_ratio: vector not unit-norm");
    const double s4 = v.array().square().square().sum();
    return 1.0 / s4;
}

inline bool contributes(const RealVector& v, const std::vector<int>& sources,
                        const std::vector<int>& sinks, double tol = 1e-10) {
    auto touches = [&](const std::vector<int>& sites) {
        for (int s : sites)
            if (std::abs(v[s]) > tol) return true;
        return false;
    };
    return touches(sources) && touches(sinks);
}

struct EigenstateProfile {
    int l = 0;       // 1-based, ascending H0 eigenvalue
    double xi = 1;   // participation ratio, in [1, N]
    int nu = 0;      // contributes to transport (touches both edges)
};

namespace detail {

// Presentation-only canonicalization: flip so the first component larger than
// 1e-12 in magnitude is positive, then order degenerate groups
// lexicographically. Makes per-l curves run-to-run reproducible.
inline void canonicalize_group(RealMatrix& vecs, int begin, int end) {
    for (int c = begin; c < end; ++c) {
        for (int i = 0; i < vecs.rows(); ++i) {
            if (std::abs(vecs(i, c)) > 1e-12) {
                if (vecs(i, c) < 0) vecs.col(c) = -vecs.col(c);
                break;
            }
        }
    }
    std::vector<int> order(end - begin);
    for (int k = 0; k < end - begin; ++k) order[k] = begin + k;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        for (int i = 0; i < vecs.rows(); ++i) {
            if (vecs(i, a) != vecs(i, b)) return vecs(i, a) < vecs(i, b);
        }
        return false;
    });
    RealMatrix tmp(vecs.rows(), end - begin);
    for (int k = 0; k < end - begin; ++k) tmp.col(k) = vecs.col(order[k]);
    vecs.middleCols(begin, end - begin) = tmp;
}

}  // namespace detail

inline std::vector<EigenstateProfile> eigenstate_profiles(const HermitianDecomposition& dec,
                                                          const std::vector<int>& sources,
                                                          const std::vector<int>& sinks,
                                                          double amp_tol = 1e-10) {
    RealMatrix vecs = dec.vectors;
    for (const auto& [i, j] : degenerate_groups(dec))
        if (j - i > 1) detail::canonicalize_group(vecs, i, j);
        else detail::canonicalize_group(vecs, i, i + 1);  // sign fix only
    const int N = static_cast<int>(dec.values.size());
    std::vector<EigenstateProfile> profiles(N);
    for (int l = 0; l < N; ++l) {
        const RealVector v = vecs.col(l);
        profiles[l].l = l + 1;
        profiles[l].xi = participation_ratio(v);
        profiles[l].nu = contributes(v, sources, sinks, amp_tol) ? 1 : 0;
    }
    return profiles;
}

struct EigenstatsSummary {
    std::vector<double> xi;  // per l
    std::vector<int> nu;     // per l
    double gamma = 0;        // sum nu
    double xi_avg = 0;       // (1/N) sum xi
};

inline EigenstatsSummary aggregate_eigenstats(const std::vector<EigenstateProfile>& profiles) {
    EigenstatsSummary s;
    s.xi.reserve(profiles.size());
    s.nu.reserve(profiles.size());
    for (const auto& pr : profiles) {
        s.xi.push_back(pr.xi);
        s.nu.push_back(pr.nu);
        s.gamma += pr.nu;
        s.xi_avg += pr.xi;
    }
    if (!profiles.empty()) s.xi_avg /= static_cast<double>(profiles.size());
    return s;
}

}  // namespace qperc
