#pragma once

// Incremental cluster growth: standard (m=1) and best-of-m product-rule bond
// percolation with cluster-size, wrapping, and sink-connectivity tracking.

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "qperc/lattice.hpp"
#include "qperc/rng.hpp"

namespace qperc {

class ClusterState {
public:
    explicit ClusterState(const Lattice& lat)
        : lat_(&lat),
          parent_(lat.num_sites),
          size_(lat.num_sites, 1),
          touches_left_(lat.num_sites, 0),
          touches_right_(lat.num_sites, 0),
          source_count_(lat.num_sites, 0),
          occupied_(lat.num_bonds(), 0),
          pool_(lat.num_bonds()),
          pool_pos_(lat.num_bonds()) {
        for (int s = 0; s < lat.num_sites; ++s) {
            parent_[s] = s;
            const int col = s % lat.L;
            touches_left_[s] = (col == 0);
            touches_right_[s] = (col == lat.L - 1);
            source_count_[s] = (col == 0) ? 1 : 0;
        }
        for (int b = 0; b < lat.num_bonds(); ++b) {
            pool_[b] = b;
            pool_pos_[b] = b;
        }
        sink_free_sources_ = lat.L;
    }

    const Lattice& lattice() const { return *lat_; }
    int occupied_count() const { return n_; }
    int largest_cluster() const { return largest_; }
    bool wrapping() const { return wrapping_; }
    bool is_occupied(int bond_id) const { return occupied_[bond_id] != 0; }
    int unoccupied_count() const { return static_cast<int>(pool_.size()); }

    // Sources whose cluster contains no sink site (no column L-1 site).
    int sink_free_sources() const { return sink_free_sources_; }

    int find(int s) {
        while (parent_[s] != s) {
            parent_[s] = parent_[parent_[s]];  // path halving
            s = parent_[s];
        }
        return s;
    }

    // Product of the two endpoint cluster sizes; square if the bond is
    // internal to one cluster.
    std::uint64_t candidate_weight(int bond_id) {
        const Bond& bd = lat_->bonds[bond_id];
        const int ra = find(bd.a);
        const int rb = find(bd.b);
        return static_cast<std::uint64_t>(size_[ra]) * static_cast<std::uint64_t>(size_[rb]);
    }

    // Samples c = min(m, #unoccupied) distinct unoccupied bonds (partial
    // Fisher-Yates over the pool), keeps one of minimal weight. Ties are
    // broken uniformly. RNG draws: c, plus one iff more than one minimum.
    // Non-selected candidates stay in the pool (their order shifts, which is
    // part of the deterministic state evolution).
    int select_bond_best_of_m(int m, std::mt19937_64& rng) {
        if (pool_.empty()) throw std::logic_error("select_bond_best_of_m: growth complete");
        if (m < 1) throw std::invalid_argument("select_bond_best_of_m: m must be >= 1");
        const std::size_t u = pool_.size();
        const std::size_t c = std::min<std::size_t>(m, u);
        for (std::size_t j = 0; j < c; ++j) {
            const std::size_t k = j + uniform_index(rng, u - j);
            swap_pool(j, k);
        }
        std::uint64_t best = candidate_weight(pool_[0]);
        std::size_t num_min = 1;
        for (std::size_t j = 1; j < c; ++j) {
            const std::uint64_t w = candidate_weight(pool_[j]);
            if (w < best) {
                best = w;
                num_min = 1;
                swap_pool(0, j);            // keep minima packed at the front
            } else if (w == best) {
                swap_pool(num_min, j);
                ++num_min;
            }
        }
        const std::size_t pick = (num_min > 1) ? uniform_index(rng, num_min) : 0;
        return pool_[pick];
    }

    void add_bond(int bond_id) {
        if (bond_id < 0 || bond_id >= lat_->num_bonds())
            throw std::invalid_argument("add_bond: bad bond id");
        if (occupied_[bond_id]) throw std::invalid_argument("add_bond: bond already occupied");
        occupied_[bond_id] = 1;
        pool_remove(bond_id);
        ++n_;
        const Bond& bd = lat_->bonds[bond_id];
        merge(bd.a, bd.b);
    }

private:
    void swap_pool(std::size_t i, std::size_t j) {
        if (i == j) return;
        std::swap(pool_[i], pool_[j]);
        pool_pos_[pool_[i]] = static_cast<int>(i);
        pool_pos_[pool_[j]] = static_cast<int>(j);
    }

    void pool_remove(int bond_id) {
        const std::size_t at = static_cast<std::size_t>(pool_pos_[bond_id]);
        swap_pool(at, pool_.size() - 1);
        pool_.pop_back();
        pool_pos_[bond_id] = -1;
    }

    void merge(int a, int b) {
        int ra = find(a);
        int rb = find(b);
        if (ra == rb) return;
        if (size_[ra] < size_[rb]) std::swap(ra, rb);  // union by size
        const int before = (touches_right_[ra] ? 0 : source_count_[ra]) +
                           (touches_right_[rb] ? 0 : source_count_[rb]);
        parent_[rb] = ra;
        size_[ra] += size_[rb];
        touches_left_[ra] = touches_left_[ra] | touches_left_[rb];
        touches_right_[ra] = touches_right_[ra] | touches_right_[rb];
        source_count_[ra] += source_count_[rb];
        const int after = touches_right_[ra] ? 0 : source_count_[ra];
        sink_free_sources_ += after - before;
        if (size_[ra] > largest_) largest_ = size_[ra];
        if (touches_left_[ra] && touches_right_[ra]) wrapping_ = true;
    }

    const Lattice* lat_;
    std::vector<int> parent_;
    std::vector<int> size_;
    std::vector<std::uint8_t> touches_left_, touches_right_;
    std::vector<int> source_count_;
    std::vector<std::uint8_t> occupied_;
    std::vector<int> pool_;      // unoccupied bond ids
    std::vector<int> pool_pos_;  // bond id -> index in pool_, -1 once occupied
    int n_ = 0;
    int largest_ = 1;
    bool wrapping_ = false;
    int sink_free_sources_ = 0;
};

inline ClusterState new_state(const Lattice& lat) { return ClusterState(lat); }

inline int sink_free_source_count(ClusterState& st) { return st.sink_free_sources(); }

struct GrowthTrajectory {
    int m = 1;
    std::vector<int> order;        // bond ids in occupation order, length B
    std::vector<double> zeta;      // largest-cluster fraction, index n = 0..B
    std::vector<int> sink_free;    // sink-free source count, index n = 0..B
    int wrap_step = -1;            // minimal n with a wrapping cluster
};

inline GrowthTrajectory grow_trajectory(const Lattice& lat, int m, std::mt19937_64& rng) {
    const int B = lat.num_bonds();
    GrowthTrajectory tr;
    tr.m = m;
    tr.order.reserve(B);
    tr.zeta.reserve(B + 1);
    tr.sink_free.reserve(B + 1);
    ClusterState st(lat);
    tr.zeta.push_back(1.0 / lat.num_sites);
    tr.sink_free.push_back(st.sink_free_sources());
    for (int n = 1; n <= B; ++n) {
        const int bd = st.select_bond_best_of_m(m, rng);
        st.add_bond(bd);
        tr.order.push_back(bd);
        tr.zeta.push_back(static_cast<double>(st.largest_cluster()) / lat.num_sites);
        tr.sink_free.push_back(st.sink_free_sources());
        if (tr.wrap_step < 0 && st.wrapping()) tr.wrap_step = n;
    }
    return tr;
}

}  // namespace qperc
