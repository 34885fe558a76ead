#include <catch_amalgamated.hpp>

#include <complex>
#include <numeric>
#include <vector>

#include "qperc/lattice.hpp"
#include "qperc/spectral.hpp"

using namespace qperc;

TEST_CASE("laplacian of an edgeless graph is zero") {
    Graph g;
    g.num_sites = 3;
    g.sources = {0};
    g.sinks = {2};
    CHECK(laplacian(g).isZero(0.0));
}

TEST_CASE("laplacian of a single bond") {
    Graph g;
    g.num_sites = 2;
    g.edges = {{0, 1}};
    g.sources = {0};
    g.sinks = {1};
    const RealMatrix H0 = laplacian(g);
    CHECK(H0(0, 0) == 1.0);
    CHECK(H0(1, 1) == 1.0);
    CHECK(H0(0, 1) == -1.0);
    CHECK(H0(1, 0) == -1.0);
}

TEST_CASE("laplacian row sums vanish and diagonal equals degree") {
    const Lattice lat = build_lattice(5);
    std::vector<int> all(lat.num_bonds());
    std::iota(all.begin(), all.end(), 0);
    const RealMatrix H0 = laplacian(lat, all);
    for (int i = 0; i < lat.num_sites; ++i) {
        CHECK(std::abs(H0.row(i).sum()) < 1e-14);
        CHECK(H0(i, i) >= 2.0);  // full open lattice: degrees 2, 3, 4
        CHECK(H0(i, i) <= 4.0);
    }
    const auto dec = eig_hermitian(H0);
    CHECK(dec.values.minCoeff() > -1e-12);
    CHECK(dec.values.maxCoeff() < 8.0 + 1e-12);
    // Connected graph: simple zero eigenvalue, uniform kernel vector.
    CHECK(classify_zero_eigenvalues(dec, 1e-10).size() == 1);
}

TEST_CASE("sink potential enters only the sink diagonal") {
    Graph g;
    g.num_sites = 2;
    g.edges = {{0, 1}};
    g.sources = {0};
    g.sinks = {1};
    const ComplexMatrix H = coherent_hamiltonian(laplacian(g), g.sinks);
    CHECK(H(0, 0) == std::complex<double>(1.0, 0.0));
    CHECK(H(1, 1) == std::complex<double>(1.0, -1.0));
    CHECK(H(0, 1) == std::complex<double>(-1.0, 0.0));

    const RealMatrix T = transfer_matrix(laplacian(g), g.sinks);
    CHECK(T(0, 0) == -1.0);
    CHECK(T(1, 1) == -2.0);
    CHECK(T(0, 1) == 1.0);
    CHECK(T(1, 0) == 1.0);
}

TEST_CASE("eig_hermitian reconstructs the input and sorts ascending") {
    const Lattice lat = build_lattice(4);
    std::vector<int> some = {0, 3, 5, 7, 11, 12, 17};
    const RealMatrix A = laplacian(lat, some);
    const auto dec = eig_hermitian(A);
    REQUIRE(dec.values.size() == A.rows());
    for (int i = 1; i < dec.values.size(); ++i) CHECK(dec.values[i] >= dec.values[i - 1]);
    const RealMatrix back =
        dec.vectors * dec.values.asDiagonal() * dec.vectors.transpose();
    CHECK((back - A).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(dec.op_norm == Catch::Approx(A.norm()));
    CHECK(dec.max_residual <= 1e-10 * dec.op_norm);
}

TEST_CASE("eig_complex recovers a diagonal spectrum") {
    ComplexMatrix A = ComplexMatrix::Zero(3, 3);
    A(0, 0) = {1.0, 0.0};
    A(1, 1) = {2.0, -0.5};
    A(2, 2) = {-1.0, -2.0};
    const auto dec = eig_complex(A);
    const std::vector<std::complex<double>> got(dec.values.data(), dec.values.data() + 3);
    const std::vector<std::complex<double>> want = {{1.0, 0.0}, {2.0, -0.5}, {-1.0, -2.0}};
    for (const auto& w : want) {
        bool found = false;
        for (const auto& v : got) found = found || std::abs(v - w) < 1e-12;
        CHECK(found);
    }
    CHECK(dec.max_residual <= 1e-10 * std::max(1.0, dec.op_norm));
}

TEST_CASE("eig_complex refuses oversized inputs") {
    CHECK_THROWS_AS(eig_complex(ComplexMatrix::Zero(401, 401)), std::invalid_argument);
}

TEST_CASE("real-eigenvalue classification on a mixed diagonal spectrum") {
    ComplexMatrix A = ComplexMatrix::Zero(4, 4);
    A(0, 0) = {0.5, 0.0};
    A(1, 1) = {1.0, -1e-15};  // below tolerance: still real
    A(2, 2) = {2.0, -0.3};
    A(3, 3) = {3.0, -1e-6};
    const auto dec = eig_complex(A);
    const auto real_idx = classify_real_eigenvalues(dec);
    REQUIRE(real_idx.size() == 2);
    for (int i : real_idx) CHECK(std::abs(dec.values[i].imag()) < 1e-13);
}

TEST_CASE("zero-eigenvalue classification respects the relative tolerance") {
    RealMatrix A = RealMatrix::Zero(4, 4);
    A(1, 1) = 1e-15;
    A(2, 2) = 0.5;
    A(3, 3) = -2.0;
    const auto dec = eig_hermitian(A);
    CHECK(classify_zero_eigenvalues(dec).size() == 2);
}

TEST_CASE("degenerate grouping chains near-equal eigenvalues") {
    RealMatrix A = RealMatrix::Zero(6, 6);
    const double vals[6] = {0.0, 0.0, 1.0, 1.0 + 1e-13, 1.0 + 2e-13, 3.0};
    for (int i = 0; i < 6; ++i) A(i, i) = vals[i];
    const auto dec = eig_hermitian(A);
    const auto groups = degenerate_groups(dec);
    REQUIRE(groups.size() == 3);
    CHECK(groups[0] == std::pair<int, int>{0, 2});
    CHECK(groups[1] == std::pair<int, int>{2, 5});
    CHECK(groups[2] == std::pair<int, int>{5, 6});
}

TEST_CASE("as_graph keeps the selected bonds and the boundary roles") {
    const Lattice lat = build_lattice(3);
    const Graph g = as_graph(lat, {0, 4});
    REQUIRE(g.edges.size() == 2);
    CHECK(g.edges[0].a == lat.bonds[0].a);
    CHECK(g.edges[0].b == lat.bonds[0].b);
    CHECK(g.edges[1].a == lat.bonds[4].a);
    CHECK(g.edges[1].b == lat.bonds[4].b);
    CHECK(g.sources == lat.sources);
    CHECK(g.sinks == lat.sinks);
}
