#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "qperc/lattice.hpp"
#include "qperc/percolation.hpp"
#include "qperc/rng.hpp"
#include "qperc/spectral.hpp"
#include "qperc/transport.hpp"

using namespace qperc;

namespace {

Graph two_site() {
    Graph g;
    g.num_sites = 2;
    g.edges = {{0, 1}};
    g.sources = {0};
    g.sinks = {1};
    return g;
}

// Two sources feeding one sink through a shared apex.
Graph lambda_graph() {
    Graph g;
    g.num_sites = 3;
    g.edges = {{0, 2}, {1, 2}};
    g.sources = {0, 1};
    g.sinks = {2};
    return g;
}

}  // namespace

TEST_CASE("problem validation") {
    Graph g = two_site();
    CHECK_THROWS_AS(make_problem(Graph{2, {{0, 1}}, {}, {1}},
                                 TransportProblem::Start::uniform_coherent),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_problem(Graph{2, {{0, 1}}, {0}, {0}},
                                 TransportProblem::Start::uniform_coherent),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_problem(g, TransportProblem::Start::single_site, 7),
                    std::invalid_argument);
    CHECK_NOTHROW(make_problem(g, TransportProblem::Start::single_site, 0));
}

TEST_CASE("initial state normalization") {
    const Lattice lat = build_lattice(7);
    const Graph g = as_graph(lat, {});
    const RealVector coh =
        initial_state(make_problem(g, TransportProblem::Start::uniform_coherent));
    CHECK(coh.squaredNorm() == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(coh[lat.sources[0]] == Catch::Approx(1.0 / std::sqrt(7.0)));
    const RealVector inc =
        initial_state(make_problem(g, TransportProblem::Start::uniform_incoherent));
    CHECK(inc.sum() == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(inc[lat.sources[0]] == Catch::Approx(1.0 / 7.0));
    const RealVector one =
        initial_state(make_problem(g, TransportProblem::Start::single_site, 5));
    CHECK(one[5] == 1.0);
    CHECK(one.sum() == 1.0);
}

TEST_CASE("two-site chain: closed-form eigenvalues and full decay") {
    const Graph g = two_site();
    const ComplexMatrix H = coherent_hamiltonian(laplacian(g), g.sinks);
    const auto dec = eig_complex(H);
    // E_pm = ((2 - i) +- sqrt(3)) / 2
    const std::complex<double> e1 = (std::complex<double>(2, -1) + std::sqrt(3.0)) / 2.0;
    const std::complex<double> e2 = (std::complex<double>(2, -1) - std::sqrt(3.0)) / 2.0;
    const double d11 = std::abs(dec.values[0] - e1);
    const double d12 = std::abs(dec.values[0] - e2);
    const double d21 = std::abs(dec.values[1] - e1);
    const double d22 = std::abs(dec.values[1] - e2);
    CHECK(std::min(d11, d12) < 1e-10);
    CHECK(std::min(d21, d22) < 1e-10);
    CHECK(std::max(std::min(d11, d21), std::min(d12, d22)) < 1e-10);

    const auto pr = make_problem(g, TransportProblem::Start::single_site, 0);
    CHECK(coherent_survival(pr).survival == Catch::Approx(0.0).margin(1e-12));
    CHECK(coherent_survival(pr).efficiency == Catch::Approx(1.0).margin(1e-12));
    CHECK(coherent_survival(pr).dark_dim == 0);
}

TEST_CASE("lambda graph: antisymmetric dark state") {
    const Graph g = lambda_graph();

    const auto single = make_problem(g, TransportProblem::Start::single_site, 0);
    CHECK(coherent_survival(single).survival == Catch::Approx(0.5).margin(1e-12));
    CHECK(coherent_survival(single).dark_dim == 1);

    const auto uniform = make_problem(g, TransportProblem::Start::uniform_coherent);
    CHECK(coherent_survival(uniform).survival == Catch::Approx(0.0).margin(1e-12));

    // The complex-spectral route agrees without falling back.
    const auto chk = coherent_survival_complex_check(single);
    CHECK_FALSE(chk.fell_back);
    CHECK(chk.survival == Catch::Approx(0.5).margin(1e-10));
}

TEST_CASE("degenerate groups expose dark directions a per-vector test can miss") {
    // Two disjoint bonds, eigenvalues {0, 0, 2, 2}; each group holds one dark
    // direction supported on the sink-free bond.
    Graph g;
    g.num_sites = 4;
    g.edges = {{0, 1}, {2, 3}};
    g.sources = {0};
    g.sinks = {3};
    const auto from0 = make_problem(g, TransportProblem::Start::single_site, 0);
    const auto r0 = coherent_survival(from0);
    CHECK(r0.survival == Catch::Approx(1.0).margin(1e-12));
    CHECK(r0.dark_dim == 2);
    const auto from2 = make_problem(g, TransportProblem::Start::single_site, 2);
    CHECK(coherent_survival(from2).survival == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("empty graph survives fully, full lattice decays fully") {
    const Lattice lat = build_lattice(4);
    const Graph empty = as_graph(lat, {});
    const auto pr_e = make_problem(empty, TransportProblem::Start::uniform_coherent);
    CHECK(coherent_survival(pr_e).survival == Catch::Approx(1.0).margin(1e-12));
    CHECK(incoherent_survival(make_problem(empty, TransportProblem::Start::uniform_incoherent))
              .survival == Catch::Approx(1.0).margin(1e-12));

    std::vector<int> all(lat.num_bonds());
    std::iota(all.begin(), all.end(), 0);
    const Graph full = as_graph(lat, all);
    CHECK(coherent_survival(make_problem(full, TransportProblem::Start::uniform_coherent))
              .survival == Catch::Approx(0.0).margin(1e-10));
    CHECK(incoherent_survival(make_problem(full, TransportProblem::Start::uniform_incoherent))
              .survival == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("incoherent survival equals the connected-source fraction") {
    const Lattice lat = build_lattice(2);
    const Graph g = as_graph(lat, {0});  // top bond only
    const auto pr = make_problem(g, TransportProblem::Start::uniform_incoherent);
    CHECK(incoherent_survival(pr).survival == Catch::Approx(0.5).margin(1e-12));
    CHECK(connectivity_survival(g) == 0.5);
}

TEST_CASE("connectivity oracle tracks BFS along a growth trajectory") {
    const Lattice lat = build_lattice(5);
    auto rng = derive_stream(4242, 2, 7);
    ClusterState st(lat);
    std::vector<int> occupied;
    for (int n = 0; n < lat.num_bonds(); ++n) {
        CHECK(connectivity_oracle(st) ==
              Catch::Approx(connectivity_survival(as_graph(lat, occupied))).margin(1e-15));
        const int b = st.select_bond_best_of_m(2, rng);
        st.add_bond(b);
        occupied.push_back(b);
    }
    CHECK(connectivity_oracle(st) == 0.0);
}

TEST_CASE("matrix exponential basics") {
    const ComplexMatrix Z = ComplexMatrix::Zero(3, 3);
    CHECK((expm(Z) - ComplexMatrix::Identity(3, 3)).norm() < 1e-14);

    ComplexMatrix D = ComplexMatrix::Zero(3, 3);
    D(0, 0) = {0.3, 0.0};
    D(1, 1) = {-1.2, 0.4};
    D(2, 2) = {2.0, -3.0};
    const ComplexMatrix E = expm(D);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(E(i, i) - std::exp(D(i, i))) < 1e-13);

    // exp(-i H0 t) is unitary for symmetric H0.
    const Lattice lat = build_lattice(3);
    std::vector<int> some = {0, 1, 5, 9};
    const ComplexMatrix H0 = laplacian(lat, some).cast<std::complex<double>>();
    const ComplexMatrix U = expm(std::complex<double>(0, -1) * H0 * 3.7);
    CHECK((U * U.adjoint() - ComplexMatrix::Identity(9, 9)).norm() < 1e-12);

    // exp(A) exp(-A) = 1.
    CHECK((expm(D) * expm(-D) - ComplexMatrix::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("time series start at one and never increase") {
    const Lattice lat = build_lattice(3);
    auto rng = derive_stream(77, 1, 3);
    ClusterState st(lat);
    std::vector<int> occupied;
    for (int n = 0; n < 6; ++n) {
        const int b = st.select_bond_best_of_m(1, rng);
        st.add_bond(b);
        occupied.push_back(b);
    }
    const Graph g = as_graph(lat, occupied);
    const std::vector<double> times = {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0};

    const auto coh = coherent_survival_timeseries(
        make_problem(g, TransportProblem::Start::uniform_coherent), times);
    REQUIRE(coh.size() == times.size());
    CHECK(coh[0].second == Catch::Approx(1.0).margin(1e-12));
    for (std::size_t i = 1; i < coh.size(); ++i)
        CHECK(coh[i].second <= coh[i - 1].second + 1e-9);

    const auto inc = incoherent_survival_timeseries(
        make_problem(g, TransportProblem::Start::uniform_incoherent), times);
    CHECK(inc[0].second == Catch::Approx(1.0).margin(1e-12));
    for (std::size_t i = 1; i < inc.size(); ++i)
        CHECK(inc[i].second <= inc[i - 1].second + 1e-9);

    CHECK_THROWS_AS(coherent_survival_timeseries(
                        make_problem(g, TransportProblem::Start::uniform_coherent), {-1.0}),
                    std::invalid_argument);
}

TEST_CASE("checked_probability clamps roundoff and rejects real violations") {
    CHECK(checked_probability(-1e-12, "t") == 0.0);
    CHECK(checked_probability(1.0 + 1e-12, "t") == 1.0);
    CHECK(checked_probability(0.25, "t") == 0.25);
    CHECK_THROWS_AS(checked_probability(-0.01, "t"), NumericalError);
    CHECK_THROWS_AS(checked_probability(1.01, "t"), NumericalError);
}
