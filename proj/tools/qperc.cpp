// qperc: grow percolation lattices, compute transport curves, post-process,
// and run the validation suite.
//
// Exit codes: 0 success, 1 validation checks failed, 2 usage/config error,
// 3 numerical error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qperc/analysis.hpp"
#include "qperc/ensemble.hpp"
#include "qperc/io.hpp"
#include "qperc/validate.hpp"

namespace fs = std::filesystem;
using namespace qperc;

namespace {

struct SimulateArgs {
    std::string config_file;
    std::vector<int> m_flags;
    int L = -1;
    long long realizations = -1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int grid_stride = -1;
    int threads = -1;
    std::string out_dir;
    std::string observables;
    bool progress = false;
};

EnsembleConfig resolve_config(const SimulateArgs& a) {
    EnsembleConfig cfg;
    if (!a.config_file.empty()) apply_config_file(cfg, a.config_file);
    if (const char* env = std::getenv("QPERC_OUT_DIR")) cfg.out_dir = env;
    if (a.L > 0) cfg.L = a.L;
    if (!a.m_flags.empty()) cfg.m_values = a.m_flags;
    if (a.realizations > 0) cfg.realizations = static_cast<int>(a.realizations);
    if (a.seed_set) cfg.master_seed = a.seed;
    if (a.grid_stride > 0) cfg.grid_stride = a.grid_stride;
    if (a.threads > 0) cfg.threads = a.threads;
    if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
    if (!a.observables.empty()) {
        cfg.with_transport = cfg.with_cluster = cfg.with_eigenstats = false;
        std::istringstream is(a.observables);
        std::string tok;
        while (std::getline(is, tok, ',')) {
            if (tok == "all") cfg.with_transport = cfg.with_cluster = cfg.with_eigenstats = true;
            else if (tok == "transport") cfg.with_transport = true;
            else if (tok == "cluster") cfg.with_cluster = true;
            else if (tok == "eigenstats") cfg.with_eigenstats = true;
            else throw std::invalid_argument("unknown observable family: " + tok);
        }
    }
    validate_config(cfg);
    return cfg;
}

int cmd_simulate(const SimulateArgs& args) {
    const EnsembleConfig cfg = resolve_config(args);
    RunManifest manifest;
    manifest.config = cfg;
    manifest.started = iso_timestamp(std::chrono::system_clock::now());

    ProgressFn progress;
    if (args.progress)
        progress = [](int m, long long done, long long total) {
            std::cerr << "\rm=" << m << "  " << done << "/" << total << std::flush;
            if (done == total) std::cerr << "\n";
        };
    const EnsembleResult res = run_ensemble(cfg, progress);

    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);
    auto emit = [&](const std::string& name, const std::string& content) {
        atomic_write(dir / name, content);
        manifest.record(name, content);
    };

    if (cfg.with_transport) {
        emit("transport_coherent.csv", curve_csv(res.per_m, &MResult::mu_c));
        emit("transport_incoherent.csv", curve_csv(res.per_m, &MResult::mu_i));
    }
    if (cfg.with_cluster) {
        emit("largest_cluster.csv", curve_csv(res.per_m, &MResult::zeta));
        emit("wrap_fraction.csv", curve_csv(res.per_m, &MResult::wrap));
        emit("wrapping_threshold.csv", scalar_csv(res.per_m, &MResult::p_w));
    }
    if (cfg.with_eigenstats) {
        emit("contributing_states.csv", curve_csv(res.per_m, &MResult::gamma));
        emit("participation_avg.csv", curve_csv(res.per_m, &MResult::xi_avg));
        emit("participation.csv", eigen_csv(res.per_m, &MResult::xi_l));
        emit("contribution.csv", eigen_csv(res.per_m, &MResult::nu_l));
        for (const auto& mr : res.per_m) {
            emit("xi_heatmap_m" + std::to_string(mr.m) + ".csv", heatmap_csv(mr.xi_l));
            emit("nu_heatmap_m" + std::to_string(mr.m) + ".csv", heatmap_csv(mr.nu_l));
        }
    }
    long long retried = 0, dropped = 0;
    for (const auto& mr : res.per_m) {
        retried += mr.retried;
        dropped += mr.dropped;
    }
    if (retried || dropped)
        std::cerr << "warning: " << retried << " realizations retried, " << dropped
                  << " dropped\n";

    manifest.finished = iso_timestamp(std::chrono::system_clock::now());
    atomic_write(dir / "manifest.json", manifest.to_json());
    std::cout << "wrote " << manifest.checksums.size() + 1 << " files to " << cfg.out_dir << "\n";
    return 0;
}

int cmd_trajectory(int L, int m, std::uint64_t seed, const std::string& out_dir,
                   bool dump_operators) {
    if (L < 2) throw std::invalid_argument("trajectory: L must be >= 2");
    if (m < 1) throw std::invalid_argument("trajectory: m must be >= 1");
    const Lattice lat = build_lattice(L);
    auto rng = derive_stream(seed, static_cast<std::uint32_t>(m), 0);
    const GrowthTrajectory tr = grow_trajectory(lat, m, rng);
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    atomic_write(dir / "trajectory.csv", trajectory_csv(lat, tr));
    atomic_write(dir / "topology.txt", topology_dump(lat));
    if (dump_operators) {
        std::vector<int> all(lat.num_bonds());
        for (int b = 0; b < lat.num_bonds(); ++b) all[b] = b;
        const ComplexMatrix H = coherent_hamiltonian(laplacian(lat, all), lat.sinks);
        atomic_write(dir / "hamiltonian.txt", matrix_dump(H));
    }
    std::cout << "wrote trajectory.csv and topology.txt to " << out_dir << "\n";
    return 0;
}

int cmd_analyze(const std::string& dir_in) {
    const fs::path dir(dir_in);
    const auto coherent = read_curve_csv(dir / "transport_coherent.csv");
    const auto incoherent = read_curve_csv(dir / "transport_incoherent.csv");
    const auto pw = read_scalar_csv(dir / "wrapping_threshold.csv");

    const auto it1 = coherent.curves.find(1);
    const Curve* curve_1 = (it1 != coherent.curves.end()) ? &it1->second : nullptr;

    std::vector<SummaryRow> rows;
    std::vector<std::pair<int, PowerLawFit>> fits;
    std::ostringstream delta_os, gap_os;
    delta_os << "m,p,mean,stderr,count\n";
    gap_os << "m,p,mean,stderr,count\n";
    for (const auto& [m, curve] : coherent.curves) {
        SummaryRow row;
        if (curve_1)
            row = summarize_m(m, curve, *curve_1, pw.count(m) ? pw.at(m).mean : 0.0);
        else {
            row.m = m;
            row.p_a = detect_p_a(curve);
            if (const auto fit = fit_power_law(curve); fit.ok) row.k = fit.k;
            row.p_w = pw.count(m) ? pw.at(m).mean : 0.0;
        }
        rows.push_back(row);
        fits.emplace_back(m, fit_power_law(curve));
        if (curve_1 && m != 1)
            for (const auto& pt : delta_efficiency(*curve_1, curve))
                delta_os << m << ',' << fmt12(pt.p) << ',' << fmt12(pt.mean) << ','
                         << fmt12(pt.stderr_) << ',' << pt.count << '\n';
        if (auto iti = incoherent.curves.find(m); iti != incoherent.curves.end())
            for (const auto& pt : coherent_incoherent_gap(iti->second, curve))
                gap_os << m << ',' << fmt12(pt.p) << ',' << fmt12(pt.mean) << ','
                       << fmt12(pt.stderr_) << ',' << pt.count << '\n';
    }
    atomic_write(dir / "summary.csv", summary_csv(rows));
    atomic_write(dir / "fit_diagnostics.csv", fit_diagnostics_csv(fits));
    atomic_write(dir / "delta_efficiency.csv", delta_os.str());
    atomic_write(dir / "coherent_incoherent_gap.csv", gap_os.str());
    std::cout << "wrote summary.csv, fit_diagnostics.csv, delta_efficiency.csv, "
                 "coherent_incoherent_gap.csv to "
              << dir_in << "\n";
    return 0;
}

int cmd_validate(std::uint64_t seed, bool inject_fault) {
    const ValidationReport rep = run_validation_suite(seed, inject_fault);
    std::cout << rep.to_text();
    return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Explosive-percolation transport simulator"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run the ensemble and write curve CSVs");
    simulate->add_option("--config", sim.config_file, "INI config file (key=value)");
    simulate->add_option("--L", sim.L, "lattice side length");
    simulate->add_option("--m", sim.m_flags, "correlation strength (repeatable)");
    simulate->add_option("--realizations", sim.realizations, "ensemble size R");
    auto* seed_opt = simulate->add_option("--seed", sim.seed, "master seed");
    simulate->add_option("--grid-stride", sim.grid_stride, "evaluate every k-th bond count");
    simulate->add_option("--threads", sim.threads, "worker threads");
    simulate->add_option("--out-dir", sim.out_dir, "output directory");
    simulate->add_option("--observables", sim.observables,
                         "comma list: transport,cluster,eigenstats or all");
    simulate->add_flag("--progress", sim.progress, "print progress to stderr");

    int tr_L = 7, tr_m = 1;
    std::uint64_t tr_seed = 42;
    std::string tr_out = ".";
    bool tr_dump = false;
    auto* trajectory = app.add_subcommand("trajectory", "Dump one growth trajectory");
    trajectory->add_option("--L", tr_L, "lattice side length");
    trajectory->add_option("--m", tr_m, "correlation strength");
    trajectory->add_option("--seed", tr_seed, "seed");
    trajectory->add_option("--out-dir", tr_out, "output directory");
    trajectory->add_flag("--dump-operators", tr_dump, "also dump the full-lattice Hamiltonian");

    std::string an_dir;
    auto* analyze = app.add_subcommand("analyze", "Post-process curve CSVs into summary.csv");
    analyze->add_option("--dir", an_dir, "directory with curve CSVs")->required();

    std::uint64_t va_seed = 99001177;
    bool va_fault = false;
    auto* validate = app.add_subcommand("validate", "Run the cross-method validation suite");
    validate->add_option("--seed", va_seed, "seed for the random config sets");
    validate->add_flag("--inject-fault", va_fault, "perturb an eigenvector; suite must fail");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        sim.seed_set = seed_opt->count() > 0;
        if (simulate->parsed()) return cmd_simulate(sim);
        if (trajectory->parsed()) return cmd_trajectory(tr_L, tr_m, tr_seed, tr_out, tr_dump);
        if (analyze->parsed()) return cmd_analyze(an_dir);
        if (validate->parsed()) return cmd_validate(va_seed, va_fault);
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
