#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "qperc/eigenstats.hpp"
#include "qperc/lattice.hpp"
#include "qperc/percolation.hpp"
#include "qperc/rng.hpp"
#include "qperc/spectral.hpp"

using namespace qperc;

TEST_CASE("participation ratio on reference vectors") {
    RealVector e = RealVector::Zero(10);
    e[3] = 1.0;
    CHECK(participation_ratio(e) == Catch::Approx(1.0).epsilon(1e-14));

    RealVector u = RealVector::Constant(49, 1.0 / 7.0);
    CHECK(participation_ratio(u) == Catch::Approx(49.0).epsilon(1e-12));

    RealVector two = RealVector::Zero(5);
    two[0] = two[4] = 1.0 / std::sqrt(2.0);
    CHECK(participation_ratio(two) == Catch::Approx(2.0).epsilon(1e-12));

    RealVector bad = RealVector::Constant(4, 1.0);
    CHECK_THROWS_AS(participation_ratio(bad), std::invalid_argument);
}

TEST_CASE("contribution indicator needs amplitude on both edges") {
    const std::vector<int> sources = {0, 1};
    const std::vector<int> sinks = {4, 5};
    RealVector v = RealVector::Zero(6);
    v[0] = 0.6;
    CHECK_FALSE(contributes(v, sources, sinks));
    v[4] = 0.8;
    CHECK(contributes(v, sources, sinks));
    v[0] = 1e-12;  // below tolerance on the source edge
    CHECK_FALSE(contributes(v, sources, sinks));
}

TEST_CASE("empty lattice: every state is a site state") {
    const Lattice lat = build_lattice(7);
    const auto dec = eig_hermitian(laplacian(lat, {}));
    const auto profiles = eigenstate_profiles(dec, lat.sources, lat.sinks);
    REQUIRE(profiles.size() == 49);
    int l = 1;
    for (const auto& pr : profiles) {
        CHECK(pr.l == l++);
        CHECK(pr.xi == Catch::Approx(1.0).epsilon(1e-10));
        CHECK(pr.nu == 0);  // a site state cannot touch both edges
    }
    const auto s = aggregate_eigenstats(profiles);
    CHECK(s.gamma == 0.0);
    CHECK(s.xi_avg == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("full lattice: uniform ground state and near-total contribution") {
    const Lattice lat = build_lattice(7);
    std::vector<int> all(lat.num_bonds());
    std::iota(all.begin(), all.end(), 0);
    const auto dec = eig_hermitian(laplacian(lat, all));
    const auto profiles = eigenstate_profiles(dec, lat.sources, lat.sinks);
    CHECK(profiles[0].l == 1);
    CHECK(profiles[0].xi == Catch::Approx(49.0).margin(1e-8));
    const auto s = aggregate_eigenstats(profiles);
    CHECK(s.gamma >= 45.0);
    for (double xi : s.xi) {
        CHECK(xi >= 1.0 - 1e-9);
        CHECK(xi <= 49.0 + 1e-9);
    }
}

TEST_CASE("profile bounds hold on random partial configurations") {
    const Lattice lat = build_lattice(5);
    const int N = lat.num_sites;
    for (std::uint32_t r = 0; r < 10; ++r) {
        auto rng = derive_stream(560, 2, r);
        ClusterState st(lat);
        std::vector<int> occupied;
        for (int n = 0; n < 20; ++n) {
            const int b = st.select_bond_best_of_m(2, rng);
            st.add_bond(b);
            occupied.push_back(b);
        }
        const auto dec = eig_hermitian(laplacian(lat, occupied));
        const auto profiles = eigenstate_profiles(dec, lat.sources, lat.sinks);
        const auto s = aggregate_eigenstats(profiles);
        for (const auto& pr : profiles) {
            CHECK(pr.xi >= 1.0 - 1e-9);
            CHECK(pr.xi <= N + 1e-9);
            CHECK((pr.nu == 0 || pr.nu == 1));
        }
        CHECK(s.gamma <= N);
        CHECK(s.xi_avg >= 1.0 - 1e-9);
    }
}

TEST_CASE("canonicalization is idempotent and sign-stable") {
    const Lattice lat = build_lattice(4);
    std::vector<int> occupied = {0, 2, 5, 9, 11, 13};
    const auto dec = eig_hermitian(laplacian(lat, occupied));
    const auto p1 = eigenstate_profiles(dec, lat.sources, lat.sinks);

    // Flip every eigenvector; profiles must be unchanged.
    HermitianDecomposition flipped = dec;
    flipped.vectors = -flipped.vectors;
    const auto p2 = eigenstate_profiles(flipped, lat.sources, lat.sinks);
    REQUIRE(p1.size() == p2.size());
    for (std::size_t i = 0; i < p1.size(); ++i) {
        CHECK(p1[i].xi == Catch::Approx(p2[i].xi).epsilon(1e-12));
        CHECK(p1[i].nu == p2[i].nu);
    }
}

TEST_CASE("profiles are indexed by ascending eigenvalue") {
    const Lattice lat = build_lattice(3);
    std::vector<int> occupied = {0, 1, 4, 7};
    const auto dec = eig_hermitian(laplacian(lat, occupied));
    const auto profiles = eigenstate_profiles(dec, lat.sources, lat.sinks);
    REQUIRE(profiles.size() == static_cast<std::size_t>(lat.num_sites));
    for (std::size_t i = 0; i < profiles.size(); ++i)
        CHECK(profiles[i].l == static_cast<int>(i) + 1);
    for (int i = 1; i < dec.values.size(); ++i) CHECK(dec.values[i] >= dec.values[i - 1]);
}
