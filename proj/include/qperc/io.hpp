#pragma once

// File plumbing: CSV serialization (12 significant digits), INI config,
// FNV-1a checksums, atomic writes, run manifest.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qperc/analysis.hpp"
#include "qperc/ensemble.hpp"

namespace qperc {

inline constexpr const char* kVersion = "1.0.0";

inline std::string fmt12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Write via sibling temp file + rename so partial files never appear.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
        out << content;
        if (!out.good()) throw std::runtime_error("atomic_write: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ---- CSV ----

inline std::string curve_csv(const std::vector<MResult>& per_m,
                             const std::vector<CurvePoint> MResult::*field) {
    std::ostringstream os;
    os << "m,p,mean,stderr,count\n";
    for (const auto& mr : per_m)
        for (const auto& pt : mr.*field)
            os << mr.m << ',' << fmt12(pt.p) << ',' << fmt12(pt.mean) << ',' << fmt12(pt.stderr_)
               << ',' << pt.count << '\n';
    return os.str();
}

inline std::string eigen_csv(const std::vector<MResult>& per_m,
                             const std::vector<EigenCurvePoint> MResult::*field) {
    std::ostringstream os;
    os << "m,p,l,mean,stderr,count\n";
    for (const auto& mr : per_m)
        for (const auto& pt : mr.*field)
            os << mr.m << ',' << fmt12(pt.p) << ',' << pt.l << ',' << fmt12(pt.mean) << ','
               << fmt12(pt.stderr_) << ',' << pt.count << '\n';
    return os.str();
}

inline std::string scalar_csv(const std::vector<MResult>& per_m,
                              const ScalarEstimate MResult::*field) {
    std::ostringstream os;
    os << "m,mean,stderr,count\n";
    for (const auto& mr : per_m) {
        const auto& s = mr.*field;
        os << mr.m << ',' << fmt12(s.mean) << ',' << fmt12(s.stderr_) << ',' << s.count << '\n';
    }
    return os.str();
}

// rows = l, columns = p grid.
inline std::string heatmap_csv(const std::vector<EigenCurvePoint>& pts) {
    std::vector<double> ps;
    int max_l = 0;
    for (const auto& pt : pts) {
        if (ps.empty() || pt.p != ps.back()) ps.push_back(pt.p);
        max_l = std::max(max_l, pt.l);
    }
    std::ostringstream os;
    os << "l";
    for (double p : ps) os << ',' << fmt12(p);
    os << '\n';
    // pts are grid-major (all l for p0, then p1, ...)
    for (int l = 1; l <= max_l; ++l) {
        os << l;
        for (std::size_t g = 0; g < ps.size(); ++g)
            os << ',' << fmt12(pts[g * max_l + (l - 1)].mean);
        os << '\n';
    }
    return os.str();
}

struct ParsedCurves {
    // m -> curve over the shared p grid
    std::map<int, Curve> curves;
};

inline ParsedCurves read_curve_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_curve_csv: missing file " + path.string());
    ParsedCurves out;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_curve_csv: empty " + path.string());
    if (line != "m,p,mean,stderr,count")
        throw std::runtime_error("read_curve_csv: unexpected header in " + path.string());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        CurvePoint pt;
        int m = 0;
        char c;
        std::istringstream ls(line);
        if (!(ls >> m >> c >> pt.p >> c >> pt.mean >> c >> pt.stderr_ >> c >> pt.count))
            throw std::runtime_error("read_curve_csv: bad row in " + path.string() + ": " + line);
        out.curves[m].push_back(pt);
    }
    return out;
}

inline std::map<int, ScalarEstimate> read_scalar_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_scalar_csv: missing file " + path.string());
    std::map<int, ScalarEstimate> out;
    std::string line;
    if (!std::getline(in, line) || line != "m,mean,stderr,count")
        throw std::runtime_error("read_scalar_csv: unexpected header in " + path.string());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int m = 0;
        char c;
        ScalarEstimate s;
        std::istringstream ls(line);
        if (!(ls >> m >> c >> s.mean >> c >> s.stderr_ >> c >> s.count))
            throw std::runtime_error("read_scalar_csv: bad row in " + path.string() + ": " + line);
        out[m] = s;
    }
    return out;
}

inline std::string na_or(const std::optional<double>& v) { return v ? fmt12(*v) : "n/a"; }

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream os;
    os << "m,p_a,p_b,mu_at_p_b,k,p_w\n";
    for (const auto& r : rows)
        os << r.m << ',' << na_or(r.p_a) << ',' << na_or(r.p_b) << ',' << na_or(r.mu_at_p_b)
           << ',' << na_or(r.k) << ',' << fmt12(r.p_w) << '\n';
    return os.str();
}

inline std::string fit_diagnostics_csv(const std::vector<std::pair<int, PowerLawFit>>& fits) {
    std::ostringstream os;
    os << "m,k,intercept,r2,points,window_p_lo,window_p_hi\n";
    for (const auto& [m, f] : fits) {
        os << m << ',';
        if (f.ok)
            os << fmt12(f.k) << ',' << fmt12(f.intercept) << ',' << fmt12(f.r2) << ',' << f.points
               << ',' << fmt12(f.p_lo) << ',' << fmt12(f.p_hi);
        else
            os << "n/a,n/a,n/a," << f.points << ",n/a,n/a";
        os << '\n';
    }
    return os.str();
}

// ---- trajectory / topology dumps ----

// One row per growth step; bond ids and sites are 1-based externally.
inline std::string trajectory_csv(const Lattice& lat, const GrowthTrajectory& tr) {
    std::ostringstream os;
    os << "n,p,bond_id,zeta,wrapping\n";
    for (std::size_t i = 0; i < tr.order.size(); ++i) {
        const int n = static_cast<int>(i) + 1;
        os << n << ',' << fmt12(bond_fraction(n, lat)) << ',' << tr.order[i] + 1 << ','
           << fmt12(tr.zeta[n]) << ',' << ((tr.wrap_step >= 0 && n >= tr.wrap_step) ? 1 : 0)
           << '\n';
    }
    return os.str();
}

inline std::string topology_dump(const Lattice& lat) {
    std::ostringstream os;
    for (int b = 0; b < lat.num_bonds(); ++b)
        os << b + 1 << ' ' << lat.bonds[b].a + 1 << ' ' << lat.bonds[b].b + 1 << '\n';
    return os.str();
}

// Debug dump: row per line, entries as re,im pairs.
inline std::string matrix_dump(const ComplexMatrix& A) {
    std::ostringstream os;
    for (int i = 0; i < A.rows(); ++i) {
        for (int j = 0; j < A.cols(); ++j) {
            if (j) os << ' ';
            os << fmt12(A(i, j).real()) << ',' << fmt12(A(i, j).imag());
        }
        os << '\n';
    }
    return os.str();
}

// ---- INI config ----

inline std::map<std::string, std::string> parse_ini(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return (a == std::string::npos) ? std::string{} : s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        if (const auto h = line.find_first_of("#;"); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty() || line.front() == '[') continue;  // sections are ignored
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key=value, got: " + line);
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoi(tok));
    }
    return out;
}

// Config file keys: L, m (comma list), realizations, seed, grid_stride,
// threads, out_dir, observables (comma list of transport,cluster,eigenstats
// or "all"). Unknown keys are rejected.
inline void apply_config_file(EnsembleConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path.string());
    for (const auto& [key, val] : parse_ini(in)) {
        if (key == "L") cfg.L = std::stoi(val);
        else if (key == "m") cfg.m_values = parse_int_list(val);
        else if (key == "realizations") cfg.realizations = std::stoi(val);
        else if (key == "seed") cfg.master_seed = std::stoull(val);
        else if (key == "grid_stride") cfg.grid_stride = std::stoi(val);
        else if (key == "threads") cfg.threads = std::stoi(val);
        else if (key == "out_dir") cfg.out_dir = val;
        else if (key == "observables") {
            cfg.with_transport = cfg.with_cluster = cfg.with_eigenstats = false;
            for (const auto& fam : [&] {
                     std::vector<std::string> fams;
                     std::istringstream is(val);
                     std::string tok;
                     while (std::getline(is, tok, ',')) fams.push_back(tok);
                     return fams;
                 }()) {
                if (fam == "all") cfg.with_transport = cfg.with_cluster = cfg.with_eigenstats = true;
                else if (fam == "transport") cfg.with_transport = true;
                else if (fam == "cluster") cfg.with_cluster = true;
                else if (fam == "eigenstats") cfg.with_eigenstats = true;
                else throw std::invalid_argument("config: unknown observable family: " + fam);
            }
        } else {
            throw std::invalid_argument("config: unknown key: " + key);
        }
    }
}

// ---- manifest ----

inline std::string iso_timestamp(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunManifest {
    EnsembleConfig config;
    std::string started;
    std::string finished;
    std::map<std::string, std::string> checksums;  // file -> fnv1a64 hex
    std::map<std::string, std::uint64_t> sizes;

    void record(const std::string& name, const std::string& content) {
        checksums[name] = hex64(fnv1a64(content));
        sizes[name] = content.size();
    }

    std::string to_json() const {
        nlohmann::ordered_json j;
        j["version"] = kVersion;
        j["config"] = {{"L", config.L},
                       {"m", config.m_values},
                       {"realizations", config.realizations},
                       {"seed", config.master_seed},
                       {"grid_stride", config.grid_stride},
                       {"threads", config.threads},
                       {"out_dir", config.out_dir},
                       {"observables",
                        {{"transport", config.with_transport},
                         {"cluster", config.with_cluster},
                         {"eigenstats", config.with_eigenstats}}}};
        j["started"] = started;
        j["finished"] = finished;
        nlohmann::ordered_json files;
        for (const auto& [name, sum] : checksums)
            files[name] = {{"fnv1a64", sum}, {"bytes", sizes.at(name)}};
        j["outputs"] = files;
        return j.dump(2) + "\n";
    }
};

}  // namespace qperc
