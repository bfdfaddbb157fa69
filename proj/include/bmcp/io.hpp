#ifndef BMCP_IO_HPP
#define BMCP_IO_HPP

#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>
#include <zlib.h>

#include <nlohmann/json.hpp>

#include "bmcp/gibbs.hpp"
#include "bmcp/summary.hpp"

namespace bmcp {

/// Failures attributable to the input data or files (CLI exit code 2).
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline bool parse_double(const std::string& tok, double& out) {
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

/// Full-precision round-trip formatting (17 significant digits).
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

/// One observation per line; a single leading header line is skipped when
/// its first token is not numeric. Any other non-numeric line is an error
/// naming the 1-based line number.
inline std::vector<double> read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open series file: " + path);
    std::vector<double> x;
    std::string line;
    long lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string tok = detail::trim(line);
        if (tok.empty()) continue;
        double v = 0.0;
        if (!detail::parse_double(tok, v)) {
            if (first) {
                first = false;
                continue; // header
            }
            throw data_error(path + ": line " + std::to_string(lineno) +
                             ": not a number: '" + tok + "'");
        }
        if (!std::isfinite(v))
            throw data_error(path + ": line " + std::to_string(lineno) + ": non-finite value");
        first = false;
        x.push_back(v);
    }
    if (x.empty()) throw data_error(path + ": no observations");
    return x;
}

/// Flat key = value configuration. Exactly the hyperparameter names below
/// are accepted; an unknown key is an error, because a silently ignored
/// typo in a prior is worse than a refused file.
inline std::map<std::string, double> parse_config_file(const std::string& path) {
    static const std::set<std::string> allowed = {"mu0",    "sigma0sq", "a",     "d",
                                                  "alpha1", "beta1",    "alpha2", "beta2",
                                                  "m",      "v",        "p_max"};
    std::ifstream in(path);
    if (!in) throw data_error("cannot open config file: " + path);
    std::map<std::string, double> out;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#') continue;
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw data_error(path + ": line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string val = detail::trim(s.substr(eq + 1));
        if (!allowed.count(key))
            throw data_error(path + ": line " + std::to_string(lineno) + ": unknown key '" + key +
                             "'");
        double v = 0.0;
        if (!detail::parse_double(val, v))
            throw data_error(path + ": line " + std::to_string(lineno) + ": bad value for '" +
                             key + "'");
        if (out.count(key))
            throw data_error(path + ": line " + std::to_string(lineno) + ": duplicate key '" +
                             key + "'");
        out[key] = v;
    }
    return out;
}

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out << content;
    if (!out) throw data_error("write failed: " + path);
}

/// gzip with a fixed header (zero mtime), so identical runs produce
/// byte-identical archives.
inline void write_gzip(const std::string& path, const std::string& content) {
    z_stream strm{};
    if (deflateInit2(&strm, Z_BEST_SPEED, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw data_error("zlib init failed for: " + path);
    std::string out;
    out.resize(deflateBound(&strm, static_cast<uLong>(content.size())));
    strm.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(content.data()));
    strm.avail_in = static_cast<uInt>(content.size());
    strm.next_out = reinterpret_cast<Bytef*>(out.data());
    strm.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&strm, Z_FINISH);
    if (rc != Z_STREAM_END) {
        deflateEnd(&strm);
        throw data_error("zlib deflate failed for: " + path);
    }
    out.resize(out.size() - strm.avail_out);
    deflateEnd(&strm);
    write_file(path, out);
}

inline std::string read_gzip(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open file: " + path);
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    z_stream strm{};
    if (inflateInit2(&strm, 15 + 32) != Z_OK) throw data_error("zlib init failed for: " + path);
    std::string out;
    std::vector<char> buf(1 << 16);
    strm.next_in = reinterpret_cast<Bytef*>(raw.data());
    strm.avail_in = static_cast<uInt>(raw.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        strm.next_out = reinterpret_cast<Bytef*>(buf.data());
        strm.avail_out = static_cast<uInt>(buf.size());
        rc = inflate(&strm, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&strm);
            throw data_error("corrupt gzip file: " + path);
        }
        out.append(buf.data(), buf.size() - strm.avail_out);
    }
    inflateEnd(&strm);
    return out;
}

inline std::string bits_to_string(const std::vector<std::uint8_t>& bits) {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
    return s;
}

inline std::vector<std::uint8_t> bits_from_string(const std::string& s) {
    std::vector<std::uint8_t> bits(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1') throw data_error("bad indicator string in samples file");
        bits[i] = (s[i] == '1') ? 1 : 0;
    }
    return bits;
}

inline std::string join17(std::span<const double> v, char sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s.push_back(sep);
        s += fmt17(v[i]);
    }
    return s;
}

inline std::vector<double> split_doubles(const std::string& s, char sep) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) next = s.size();
        const std::string tok = s.substr(pos, next - pos);
        double v = 0.0;
        if (!parse_double(tok, v)) throw data_error("bad number in samples file: '" + tok + "'");
        out.push_back(v);
        pos = next + 1;
    }
    return out;
}

} // namespace detail

inline nlohmann::json partition_probs_json(const std::vector<PartitionProb>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& pp : v)
        arr.push_back({{"endpoints", pp.partition.endpoints}, {"probability", pp.probability}});
    return arr;
}

inline nlohmann::json summary_to_json(const SummaryReport& rep) {
    nlohmann::json j;
    j["schema"] = rep.schema;
    j["model"] = rep.model;
    j["n"] = rep.n;
    j["draws"] = rep.draw_count;
    j["hpd_level"] = rep.hpd_level;
    j["p1_mean"] = rep.p1_mean;
    j["p2_mean"] = rep.p2_mean;
    j["product_estimates"] = {{"mu_mean", rep.mu_mean},     {"mu_hpd_lo", rep.mu_hpd_lo},
                              {"mu_hpd_hi", rep.mu_hpd_hi}, {"s2_mean", rep.s2_mean},
                              {"s2_hpd_lo", rep.s2_hpd_lo}, {"s2_hpd_hi", rep.s2_hpd_hi}};
    j["change_prob"] = {{"mu", rep.change_prob1}, {"sigma2", rep.change_prob2}};
    j["n_changes"] = {{"mu", rep.n1_pmf}, {"sigma2", rep.n2_pmf}, {"induced", rep.n_star_pmf}};
    j["top_partitions"] = {{"mu", partition_probs_json(rep.top_rho1)},
                           {"sigma2", partition_probs_json(rep.top_rho2)},
                           {"induced", partition_probs_json(rep.top_rho_star)}};
    return j;
}

inline std::string samples_to_csv(const PosteriorSamples& samples, const std::string& model) {
    std::string s = "draw,model,n,p1,p2,u1,u2,mu_star,s2_star\n";
    for (std::size_t t = 0; t < samples.draws.size(); ++t) {
        const auto& d = samples.draws[t];
        s += std::to_string(t) + ',' + model + ',' + std::to_string(samples.n) + ',' +
             detail::fmt17(d.p1) + ',' + detail::fmt17(d.p2) + ',' + detail::bits_to_string(d.u1) +
             ',' + detail::bits_to_string(d.u2) + ',' + detail::join17(d.mu_star, ';') + ',' +
             detail::join17(d.s2_star, ';') + '\n';
    }
    return s;
}

struct LoadedSamples {
    PosteriorSamples samples;
    std::string model;
};

inline LoadedSamples samples_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "draw,model,n,p1,p2,u1,u2,mu_star,s2_star")
        throw data_error("samples file: unrecognized header");
    LoadedSamples out;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> f;
        std::size_t pos = 0;
        for (int c = 0; c < 8; ++c) {
            const std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) throw data_error("samples file: short row");
            f.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        f.push_back(line.substr(pos));
        SampleDraw d;
        out.model = f[1];
        out.samples.n = std::stoi(f[2]);
        if (!detail::parse_double(f[3], d.p1) || !detail::parse_double(f[4], d.p2))
            throw data_error("samples file: bad p value");
        d.u1 = detail::bits_from_string(f[5]);
        d.u2 = detail::bits_from_string(f[6]);
        d.mu_star = detail::split_doubles(f[7], ';');
        d.s2_star = detail::split_doubles(f[8], ';');
        out.samples.draws.push_back(std::move(d));
    }
    if (out.samples.draws.empty()) throw data_error("samples file: no draws");
    return out;
}

/// Write the fit outputs into dir: summary.json, change_prob_mu.csv,
/// change_prob_sigma2.csv, product_estimates.csv, and optionally
/// samples.csv.gz. All numbers carry 17 significant digits so the CSVs
/// round-trip exactly.
inline void write_outputs(const SummaryReport& rep, const PosteriorSamples& samples,
                          const std::string& dir, bool keep_samples) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw data_error("not a writable directory: " + dir);

    detail::write_file(dir + "/summary.json", summary_to_json(rep).dump(2) + "\n");

    auto prob_csv = [](const std::vector<double>& prob) {
        std::string s = "instant,probability\n";
        for (std::size_t i = 0; i < prob.size(); ++i)
            s += std::to_string(i + 1) + ',' + detail::fmt17(prob[i]) + '\n';
        return s;
    };
    detail::write_file(dir + "/change_prob_mu.csv", prob_csv(rep.change_prob1));
    detail::write_file(dir + "/change_prob_sigma2.csv", prob_csv(rep.change_prob2));

    std::string pe = "instant,mu_mean,mu_hpd_lo,mu_hpd_hi,s2_mean,s2_hpd_lo,s2_hpd_hi\n";
    for (std::size_t i = 0; i < rep.mu_mean.size(); ++i) {
        pe += std::to_string(i + 1) + ',' + detail::fmt17(rep.mu_mean[i]) + ',' +
              detail::fmt17(rep.mu_hpd_lo[i]) + ',' + detail::fmt17(rep.mu_hpd_hi[i]) + ',' +
              detail::fmt17(rep.s2_mean[i]) + ',' + detail::fmt17(rep.s2_hpd_lo[i]) + ',' +
              detail::fmt17(rep.s2_hpd_hi[i]) + '\n';
    }
    detail::write_file(dir + "/product_estimates.csv", pe);

    if (keep_samples)
        detail::write_gzip(dir + "/samples.csv.gz", samples_to_csv(samples, rep.model));
}

inline LoadedSamples read_samples_file(const std::string& path) {
    return samples_from_csv(detail::read_gzip(path));
}

} // namespace bmcp

#endif
