#pragma once

// Infinite-time survival probabilities for coherent and incoherent walkers,
// plus time-resolved diagnostics and linear-algebra-free oracles.
//
// Production algorithm for the coherent survival is the Hermitian dark-state
// projector: for each degenerate eigenvalue group of H0, the sub-basis
// vanishing on all sinks spans the non-decaying subspace of H = H0 - i*Gamma,
// so Pi = sum_groups ||P_dark psi||^2. The literal complex-spectral route and
// the time-evolution route exist as cross-checks only.

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <queue>
#include <utility>
#include <vector>

#include "qperc/percolation.hpp"
#include "qperc/spectral.hpp"

namespace qperc {

struct TransportProblem {
    enum class Start { uniform_coherent, uniform_incoherent, single_site };
    Graph graph;
    Start start = Start::uniform_coherent;
    int start_site = -1;
};

inline TransportProblem make_problem(Graph g, TransportProblem::Start start,
                                     int start_site = -1) {
    if (g.sources.empty() || g.sinks.empty())
        throw std::invalid_argument("make_problem: sources and sinks must be non-empty");
    for (int s : g.sources)
        for (int t : g.sinks)
            if (s == t) throw std::invalid_argument("make_problem: sources and sinks overlap");
    if (start == TransportProblem::Start::single_site &&
        (start_site < 0 || start_site >= g.num_sites))
        throw std::invalid_argument("make_problem: bad start site");
    return TransportProblem{std::move(g), start, start_site};
}

// kappa = |S|^(-1/2) coherent (unit 2-norm), |S|^(-1) incoherent (unit 1-norm).
inline RealVector initial_state(const TransportProblem& pr) {
    RealVector psi = RealVector::Zero(pr.graph.num_sites);
    switch (pr.start) {
        case TransportProblem::Start::uniform_coherent:
            for (int s : pr.graph.sources) psi[s] = 1.0 / std::sqrt(double(pr.graph.sources.size()));
            break;
        case TransportProblem::Start::uniform_incoherent:
            for (int s : pr.graph.sources) psi[s] = 1.0 / double(pr.graph.sources.size());
            break;
        case TransportProblem::Start::single_site:
            psi[pr.start_site] = 1.0;
            break;
    }
    return psi;
}

enum class Method { dark_state, complex_spectral, oracle, time_evolution };

struct TransportResult {
    double survival = 0.0;
    double efficiency = 0.0;
    int dark_dim = 0;
    Method method = Method::dark_state;
    bool fell_back = false;
};

inline double checked_probability(double x, const char* who) {
    if (x < -1e-9 || x > 1.0 + 1e-9)
        throw NumericalError(std::string(who) + ": probability out of range: " + std::to_string(x));
    return std::clamp(x, 0.0, 1.0);
}

// Dark-subspace survival from an existing H0 decomposition. Within each
// degenerate group the sinks x group restriction is SVD'd; singular directions
// with sigma <= 1e-8 * sigma_max (or the whole group if sigma_max < 1e-12)
// span the dark part.
inline TransportResult dark_survival(const HermitianDecomposition& dec,
                                     const std::vector<int>& sinks, const RealVector& psi) {
    TransportResult res;
    res.method = Method::dark_state;
    double Pi = 0.0;
    for (const auto& [i, j] : degenerate_groups(dec)) {
        const int g = j - i;
        const auto V = dec.vectors.middleCols(i, g);
        RealMatrix null_basis;
        if (sinks.empty()) {
            null_basis = RealMatrix::Identity(g, g);
        } else {
            RealMatrix S(sinks.size(), g);
            for (std::size_t k = 0; k < sinks.size(); ++k) S.row(k) = V.row(sinks[k]);
            Eigen::JacobiSVD<RealMatrix> svd(S, Eigen::ComputeFullV);
            const auto& sigma = svd.singularValues();
            int rank = 0;
            if (sigma.size() > 0 && sigma(0) >= 1e-12)
                for (int k = 0; k < sigma.size(); ++k)
                    if (sigma(k) > 1e-8 * sigma(0)) ++rank;
            if (rank == g) continue;
            null_basis = svd.matrixV().rightCols(g - rank);
        }
        const RealMatrix W = V * null_basis;
        Pi += (W.transpose() * psi).squaredNorm();
        res.dark_dim += static_cast<int>(W.cols());
    }
    res.survival = checked_probability(Pi, "dark_survival");
    res.efficiency = 1.0 - res.survival;
    return res;
}

inline TransportResult coherent_survival(const TransportProblem& pr) {
    const auto dec = eig_hermitian(laplacian(pr.graph));
    return dark_survival(dec, pr.graph.sinks, initial_state(pr));
}

// P = sum over the kernel of T of (1^T phi)(phi^T psi); equals the sink-free
// source weight for the uniform incoherent start.
inline TransportResult incoherent_survival(const TransportProblem& pr) {
    const RealMatrix T = transfer_matrix(laplacian(pr.graph), pr.graph.sinks);
    const auto dec = eig_hermitian(T);
    if (dec.values.maxCoeff() > 1e-10 * std::max(1.0, dec.op_norm))
        throw NumericalError("incoherent_survival: transfer matrix not negative semi-definite");
    const RealVector psi = initial_state(pr);
    const RealVector ones = RealVector::Ones(pr.graph.num_sites);
    double P = 0.0;
    TransportResult res;
    res.method = Method::dark_state;
    for (int l : classify_zero_eigenvalues(dec)) {
        const auto phi = dec.vectors.col(l);
        P += phi.dot(ones) * phi.dot(psi);
        ++res.dark_dim;
    }
    res.survival = checked_probability(P, "incoherent_survival");
    res.efficiency = 1.0 - res.survival;
    return res;
}

// Fraction of sources without a sink in their connected component. BFS only.
inline double connectivity_survival(const Graph& g) {
    std::vector<std::vector<int>> adj(g.num_sites);
    for (const Bond& e : g.edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    std::vector<char> reaches_sink(g.num_sites, 0);
    std::queue<int> q;
    for (int s : g.sinks) {
        reaches_sink[s] = 1;
        q.push(s);
    }
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (int w : adj[v])
            if (!reaches_sink[w]) {
                reaches_sink[w] = 1;
                q.push(w);
            }
    }
    int free_count = 0;
    for (int s : g.sources)
        if (!reaches_sink[s]) ++free_count;
    return static_cast<double>(free_count) / static_cast<double>(g.sources.size());
}

// Union-find route: no linear algebra, reuses the growth bookkeeping.
inline double connectivity_oracle(ClusterState& st) {
    return static_cast<double>(st.sink_free_sources()) /
           static_cast<double>(st.lattice().L);
}

// Scaling-and-squaring Taylor exponential. Kept free of the eigensolvers so
// the time-evolution route is an independent check. Fine for N <= 400 and the
// contraction semigroups used here (||exp|| <= 1, squarings stay stable).
inline ComplexMatrix expm(const ComplexMatrix& A) {
    const int n = static_cast<int>(A.rows());
    double nrm = A.norm();
    int s = 0;
    while (nrm > 0.5 && s < 60) {
        nrm *= 0.5;
        ++s;
    }
    const ComplexMatrix X = A / std::pow(2.0, s);
    ComplexMatrix term = ComplexMatrix::Identity(n, n);
    ComplexMatrix sum = term;
    for (int k = 1; k <= 60; ++k) {
        term = (term * X) / static_cast<double>(k);
        sum += term;
        if (term.norm() <= 1e-18 * std::max(1.0, sum.norm())) break;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

// pi(t) = ||exp(-iHt) psi||^2.
inline std::vector<std::pair<double, double>> coherent_survival_timeseries(
    const TransportProblem& pr, const std::vector<double>& times) {
    const RealMatrix H0 = laplacian(pr.graph);
    const ComplexMatrix H = coherent_hamiltonian(H0, pr.graph.sinks);
    const ComplexVector psi0 = initial_state(pr).cast<std::complex<double>>();
    std::vector<std::pair<double, double>> out;
    out.reserve(times.size());
    for (double t : times) {
        if (t < 0) throw std::invalid_argument("coherent_survival_timeseries: t < 0");
        const ComplexMatrix U = expm(std::complex<double>(0.0, -1.0) * H * t);
        out.emplace_back(t, checked_probability((U * psi0).squaredNorm(),
                                                "coherent_survival_timeseries"));
    }
    return out;
}

// p(t) = 1^T exp(T t) psi through the symmetric eigendecomposition of T.
inline std::vector<std::pair<double, double>> incoherent_survival_timeseries(
    const TransportProblem& pr, const std::vector<double>& times) {
    const RealMatrix T = transfer_matrix(laplacian(pr.graph), pr.graph.sinks);
    const auto dec = eig_hermitian(T);
    const RealVector psi = initial_state(pr);
    const RealVector a = dec.vectors.transpose() * RealVector::Ones(pr.graph.num_sites);
    const RealVector b = dec.vectors.transpose() * psi;
    std::vector<std::pair<double, double>> out;
    out.reserve(times.size());
    for (double t : times) {
        if (t < 0) throw std::invalid_argument("incoherent_survival_timeseries: t < 0");
        double p = 0.0;
        for (int l = 0; l < dec.values.size(); ++l)
            p += std::exp(dec.values[l] * t) * a[l] * b[l];
        out.emplace_back(t, checked_probability(p, "incoherent_survival_timeseries"));
    }
    return out;
}

// Literal complex-spectral evaluation: real-eigenvalue eigenvectors of H,
// biorthonormalized through the (transpose, no conjugate) Gram matrix. For a
// complex symmetric H the left eigenvectors are the transposed right ones, so
// the non-decaying projector is V (V^T V)^(-1) V^T. Validation path only;
// ill-conditioning falls back to the dark-state value.
inline TransportResult coherent_survival_complex_check(const TransportProblem& pr) {
    try {
        const RealMatrix H0 = laplacian(pr.graph);
        const ComplexMatrix H = coherent_hamiltonian(H0, pr.graph.sinks);
        const auto dec = eig_complex(H);
        const auto real_idx = classify_real_eigenvalues(dec);
        TransportResult res;
        res.method = Method::complex_spectral;
        res.dark_dim = static_cast<int>(real_idx.size());
        if (real_idx.empty()) {
            res.survival = 0.0;
            res.efficiency = 1.0;
            return res;
        }
        ComplexMatrix V(pr.graph.num_sites, real_idx.size());
        for (std::size_t k = 0; k < real_idx.size(); ++k) V.col(k) = dec.vectors.col(real_idx[k]);
        Eigen::JacobiSVD<ComplexMatrix> svd(V);
        const auto& sigma = svd.singularValues();
        if (sigma(sigma.size() - 1) < 1e-8 * sigma(0))
            throw NumericalError("complex_check: ill-conditioned biorthonormalization");
        const ComplexMatrix G = V.transpose() * V;
        const ComplexVector rhs = V.transpose() * initial_state(pr).cast<std::complex<double>>();
        const ComplexVector x = G.fullPivLu().solve(rhs);
        const std::complex<double> Pi = (rhs.transpose() * x)(0);
        if (std::abs(Pi.imag()) > 1e-8)
            throw NumericalError("complex_check: non-real survival " + std::to_string(Pi.imag()));
        res.survival = checked_probability(Pi.real(), "complex_check");
        res.efficiency = 1.0 - res.survival;
        return res;
    } catch (const NumericalError& err) {
        std::cerr << "[qperc] complex_check fell back to dark-state: " << err.what() << "\n";
        TransportResult res = coherent_survival(pr);
        res.method = Method::complex_spectral;
        res.fell_back = true;
        return res;
    }
}

}  // namespace qperc
