#pragma once

// Lattice operators (Laplacian H0, sink Hamiltonian H = H0 - i*Gamma,
// transfer matrix T = -H0 - Gamma) and verified dense eigendecompositions.
// Residual contract: every eigenpair satisfies ||A v - E v||_2 <= 1e-10 * ||A||_F.

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qperc/lattice.hpp"

namespace qperc {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Arbitrary graph: lets the tiny analytic fixtures (chains, the Lambda graph)
// share the transport code path with lattice configurations.
struct Graph {
    int num_sites = 0;
    std::vector<Bond> edges;
    std::vector<int> sources;
    std::vector<int> sinks;
};

inline Graph as_graph(const Lattice& lat, const std::vector<int>& occupied_bonds) {
    Graph g;
    g.num_sites = lat.num_sites;
    g.edges.reserve(occupied_bonds.size());
    for (int b : occupied_bonds) g.edges.push_back(lat.bonds[b]);
    g.sources = lat.sources;
    g.sinks = lat.sinks;
    return g;
}

inline RealMatrix laplacian(const Graph& g) {
    RealMatrix H = RealMatrix::Zero(g.num_sites, g.num_sites);
    for (const Bond& e : g.edges) {
        H(e.a, e.b) -= 1.0;
        H(e.b, e.a) -= 1.0;
        H(e.a, e.a) += 1.0;
        H(e.b, e.b) += 1.0;
    }
    return H;
}

inline RealMatrix laplacian(const Lattice& lat, const std::vector<int>& occupied_bonds) {
    return laplacian(as_graph(lat, occupied_bonds));
}

inline ComplexMatrix coherent_hamiltonian(const RealMatrix& H0, const std::vector<int>& sinks) {
    ComplexMatrix H = H0.cast<std::complex<double>>();
    for (int s : sinks) H(s, s) -= std::complex<double>(0.0, 1.0);
    return H;
}

inline RealMatrix transfer_matrix(const RealMatrix& H0, const std::vector<int>& sinks) {
    RealMatrix T = -H0;
    for (int s : sinks) T(s, s) -= 1.0;
    return T;
}

struct HermitianDecomposition {
    RealVector values;   // ascending
    RealMatrix vectors;  // orthonormal columns
    double op_norm = 0;  // Frobenius norm of the input
    double max_residual = 0;
};

struct ComplexDecomposition {
    ComplexVector values;
    ComplexMatrix vectors;  // unit-norm columns
    double op_norm = 0;
    double max_residual = 0;
};

inline HermitianDecomposition eig_hermitian(const RealMatrix& A) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(A);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eig_hermitian: solver failed to converge (N=" +
                             std::to_string(A.rows()) + ")");
    HermitianDecomposition dec;
    dec.values = solver.eigenvalues();
    dec.vectors = solver.eigenvectors();
    dec.op_norm = A.norm();
    const RealMatrix R = A * dec.vectors - dec.vectors * dec.values.asDiagonal();
    for (int i = 0; i < dec.values.size(); ++i)
        dec.max_residual = std::max(dec.max_residual, R.col(i).norm());
    if (dec.max_residual > 1e-10 * dec.op_norm)
        throw NumericalError("eig_hermitian: residual " + std::to_string(dec.max_residual) +
                             " exceeds 1e-10 * ||A||");
    const double ortho = (dec.vectors.transpose() * dec.vectors -
                          RealMatrix::Identity(A.rows(), A.cols()))
                             .cwiseAbs()
                             .maxCoeff();
    if (ortho > 1e-10)
        throw NumericalError("eig_hermitian: eigenvectors not orthonormal to 1e-10");
    return dec;
}

inline ComplexDecomposition eig_complex(const ComplexMatrix& A) {
    if (A.rows() > 400) throw std::invalid_argument("eig_complex: N > 400 unsupported");
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(A);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eig_complex: solver failed to converge");
    ComplexDecomposition dec;
    dec.values = solver.eigenvalues();
    dec.vectors = solver.eigenvectors();
    dec.op_norm = A.norm();
    const ComplexMatrix R = A * dec.vectors - dec.vectors * dec.values.asDiagonal();
    for (int i = 0; i < dec.values.size(); ++i)
        dec.max_residual = std::max(dec.max_residual, R.col(i).norm());
    if (dec.max_residual > 1e-10 * std::max(1.0, dec.op_norm))
        throw NumericalError("eig_complex: residual " + std::to_string(dec.max_residual) +
                             " exceeds tolerance");
    return dec;
}

// Indices whose eigenvalue has |Im| <= tau. Default tau follows the
// classification tolerance 1e-12 * max(1, ||H||).
inline std::vector<int> classify_real_eigenvalues(const ComplexDecomposition& dec,
                                                  double tau = -1.0) {
    if (tau < 0) tau = 1e-12 * std::max(1.0, dec.op_norm);
    std::vector<int> idx;
    for (int i = 0; i < dec.values.size(); ++i)
        if (std::abs(dec.values[i].imag()) <= tau) idx.push_back(i);
    return idx;
}

// Indices with |E| <= tau (kernel of the transfer matrix).
inline std::vector<int> classify_zero_eigenvalues(const HermitianDecomposition& dec,
                                                  double tau = -1.0) {
    if (tau < 0) tau = 1e-12 * std::max(1.0, dec.op_norm);
    std::vector<int> idx;
    for (int i = 0; i < dec.values.size(); ++i)
        if (std::abs(dec.values[i]) <= tau) idx.push_back(i);
    return idx;
}

// Half-open [begin, end) ranges of numerically degenerate eigenvalues,
// chained under |E_i - E_{i-1}| <= 1e-9 * max(1, ||H0||).
inline std::vector<std::pair<int, int>> degenerate_groups(const HermitianDecomposition& dec) {
    const double tol = 1e-9 * std::max(1.0, dec.op_norm);
    std::vector<std::pair<int, int>> groups;
    const int N = static_cast<int>(dec.values.size());
    int i = 0;
    while (i < N) {
        int j = i + 1;
        while (j < N && dec.values[j] - dec.values[j - 1] <= tol) ++j;
        groups.emplace_back(i, j);
        i = j;
    }
    return groups;
}

}  // namespace qperc
