#pragma once

// Square-lattice geometry: sites, canonical bond list, source/sink edge sets.
// Sites are 0-based internally, row-major (site = row*L + col). External
// reports (topology dumps) use 1-based labels.

#include <stdexcept>
#include <string>
#include <vector>

namespace qperc {

struct Bond {
    int a = 0;
    int b = 0;
};

// Bonds per open-boundary L x L square lattice.
constexpr int bond_count(int L) { return 2 * L * (L - 1); }

struct Lattice {
    int L = 0;
    int num_sites = 0;
    std::vector<Bond> bonds;    // canonical order, see build_lattice
    std::vector<int> sources;   // column 0, top to bottom
    std::vector<int> sinks;     // column L-1, top to bottom

    int site(int row, int col) const { return row * L + col; }
    int num_bonds() const { return static_cast<int>(bonds.size()); }
};

// Canonical bond order: sweep sites row-major; for each site emit the bond to
// its right neighbor, then the bond to its neighbor below. Bond ids are the
// resulting 0-based positions and are stable across runs.
inline Lattice build_lattice(int L) {
    if (L < 2) throw std::invalid_argument("build_lattice: L must be >= 2, got " + std::to_string(L));
    Lattice lat;
    lat.L = L;
    lat.num_sites = L * L;
    lat.bonds.reserve(bond_count(L));
    for (int r = 0; r < L; ++r) {
        for (int c = 0; c < L; ++c) {
            const int s = lat.site(r, c);
            if (c < L - 1) lat.bonds.push_back({s, s + 1});
            if (r < L - 1) lat.bonds.push_back({s, s + L});
        }
    }
    lat.sources.reserve(L);
    lat.sinks.reserve(L);
    for (int r = 0; r < L; ++r) {
        lat.sources.push_back(lat.site(r, 0));
        lat.sinks.push_back(lat.site(r, L - 1));
    }
    return lat;
}

inline double bond_fraction(int n, const Lattice& lat) {
    if (n < 0 || n > lat.num_bonds())
        throw std::invalid_argument("bond_fraction: n out of [0, B], got " + std::to_string(n));
    return static_cast<double>(n) / static_cast<double>(lat.num_bonds());
}

}  // namespace qperc
