#ifndef BMCP_SUMMARY_HPP
#define BMCP_SUMMARY_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmcp/gibbs.hpp"
#include "bmcp/partition.hpp"

namespace bmcp {

struct ProductEstimates {
    std::vector<double> mu_mean, s2_mean; // per instant, averaged over draws
};

/// Per-instant posterior means of the structural parameters, averaged over
/// partition uncertainty.
inline ProductEstimates product_estimates(const PosteriorSamples& samples) {
    if (samples.draws.empty()) throw std::invalid_argument("product_estimates: no draws");
    ProductEstimates out;
    out.mu_mean.assign(static_cast<std::size_t>(samples.n), 0.0);
    out.s2_mean.assign(static_cast<std::size_t>(samples.n), 0.0);
    std::vector<double> buf;
    for (const auto& d : samples.draws) {
        expand_blocks(d.u1, d.mu_star, buf);
        for (std::size_t i = 0; i < buf.size(); ++i) out.mu_mean[i] += buf[i];
        expand_blocks(d.u2, d.s2_star, buf);
        for (std::size_t i = 0; i < buf.size(); ++i) out.s2_mean[i] += buf[i];
    }
    const double m = static_cast<double>(samples.draws.size());
    for (auto& v : out.mu_mean) v /= m;
    for (auto& v : out.s2_mean) v /= m;
    return out;
}

/// Fraction of retained draws in which each instant is an end point of the
/// k-th partition; entry i (0-based) refers to the 1-based instant i+1.
inline std::vector<double> change_probabilities(const PosteriorSamples& samples, int k) {
    if (k != 1 && k != 2) throw std::invalid_argument("change_probabilities: k must be 1 or 2");
    if (samples.draws.empty()) throw std::invalid_argument("change_probabilities: no draws");
    // computed as 1 - mean(bits), bit-exactly
    std::vector<double> ones(static_cast<std::size_t>(samples.n - 1), 0.0);
    for (const auto& d : samples.draws) {
        const auto& bits = (k == 1) ? d.u1 : d.u2;
        for (std::size_t i = 0; i < ones.size(); ++i) ones[i] += bits[i];
    }
    const double m = static_cast<double>(samples.draws.size());
    std::vector<double> out(ones.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 - ones[i] / m;
    return out;
}

/// Empirical top-k partitions by posterior frequency; ties broken by
/// lexicographic end-point order.
inline std::vector<std::pair<Partition, double>> most_likely_partition(
    const PosteriorSamples& samples, int k, int top_k) {
    if (k != 1 && k != 2) throw std::invalid_argument("most_likely_partition: k must be 1 or 2");
    if (top_k < 1) throw std::invalid_argument("most_likely_partition: top_k must be >= 1");
    if (samples.draws.empty()) throw std::invalid_argument("most_likely_partition: no draws");
    std::map<std::vector<std::uint8_t>, long> counts;
    for (const auto& d : samples.draws) ++counts[(k == 1) ? d.u1 : d.u2];

    std::vector<std::pair<Partition, double>> all;
    all.reserve(counts.size());
    const double m = static_cast<double>(samples.draws.size());
    for (const auto& [bits, cnt] : counts)
        all.emplace_back(partition_from_indicators(ChangeIndicators(samples.n, bits)),
                         static_cast<double>(cnt) / m);
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first.endpoints < b.first.endpoints;
    });
    if (all.size() > static_cast<std::size_t>(top_k)) all.resize(static_cast<std::size_t>(top_k));
    return all;
}

/// Empirical pmf of the number of changes of the k-th partition over the
/// support 0..n-1.
inline std::vector<double> n_changes_posterior(const PosteriorSamples& samples, int k) {
    if (k != 1 && k != 2) throw std::invalid_argument("n_changes_posterior: k must be 1 or 2");
    if (samples.draws.empty()) throw std::invalid_argument("n_changes_posterior: no draws");
    std::vector<double> pmf(static_cast<std::size_t>(samples.n), 0.0);
    for (const auto& d : samples.draws) {
        const auto& bits = (k == 1) ? d.u1 : d.u2;
        const auto changes = static_cast<std::size_t>(
            std::count(bits.begin(), bits.end(), static_cast<std::uint8_t>(0)));
        pmf[changes] += 1.0;
    }
    const double m = static_cast<double>(samples.draws.size());
    for (auto& v : pmf) v /= m;
    return pmf;
}

/// Shortest contiguous interval containing ceil(level * count) sorted draws.
inline std::pair<double, double> hpd_interval(std::span<const double> draws, double level) {
    if (draws.empty()) throw std::invalid_argument("hpd_interval: empty sample");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("hpd_interval: level must lie in (0,1)");
    std::vector<double> sorted(draws.begin(), draws.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = std::min(
        sorted.size(),
        static_cast<std::size_t>(std::ceil(level * static_cast<double>(sorted.size()))));
    const std::size_t keep = std::max<std::size_t>(1, m);
    std::size_t best = 0;
    double best_width = sorted[keep - 1] - sorted[0];
    for (std::size_t i = 1; i + keep <= sorted.size(); ++i) {
        const double w = sorted[i + keep - 1] - sorted[i];
        if (w < best_width) {
            best_width = w;
            best = i;
        }
    }
    return {sorted[best], sorted[best + keep - 1]};
}

/// Per-draw induced partition: an instant is an end point of the common
/// refinement when it is one in either per-parameter partition.
inline std::vector<std::uint8_t> induced_bits(const SampleDraw& d) {
    std::vector<std::uint8_t> bits(d.u1.size());
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = (d.u1[i] & d.u2[i]);
    return bits;
}

struct PartitionProb {
    Partition partition;
    double probability = 0.0;
};

struct SummaryReport {
    std::string schema = "bmcp-summary/1";
    std::string model;
    int n = 0;
    std::size_t draw_count = 0;
    double hpd_level = 0.9;

    std::vector<double> mu_mean, mu_hpd_lo, mu_hpd_hi;
    std::vector<double> s2_mean, s2_hpd_lo, s2_hpd_hi;
    std::vector<double> change_prob1, change_prob2;
    std::vector<double> n1_pmf, n2_pmf, n_star_pmf;
    std::vector<PartitionProb> top_rho1, top_rho2, top_rho_star;
    double p1_mean = 0.0, p2_mean = 0.0;
};

inline SummaryReport summarize_samples(const PosteriorSamples& samples, const std::string& model,
                                       int top_k = 5, double hpd_level = 0.9) {
    if (samples.draws.empty()) throw std::invalid_argument("summarize_samples: no draws");
    SummaryReport rep;
    rep.model = model;
    rep.n = samples.n;
    rep.draw_count = samples.draw_count();
    rep.hpd_level = hpd_level;

    const ProductEstimates pe = product_estimates(samples);
    rep.mu_mean = pe.mu_mean;
    rep.s2_mean = pe.s2_mean;

    // per-instant HPD bounds over draws
    const std::size_t n = static_cast<std::size_t>(samples.n);
    const std::size_t m = samples.draws.size();
    rep.mu_hpd_lo.resize(n);
    rep.mu_hpd_hi.resize(n);
    rep.s2_hpd_lo.resize(n);
    rep.s2_hpd_hi.resize(n);
    std::vector<std::vector<double>> mu_draws(n, std::vector<double>(m));
    std::vector<std::vector<double>> s2_draws(n, std::vector<double>(m));
    std::vector<double> buf;
    for (std::size_t t = 0; t < m; ++t) {
        expand_blocks(samples.draws[t].u1, samples.draws[t].mu_star, buf);
        for (std::size_t i = 0; i < n; ++i) mu_draws[i][t] = buf[i];
        expand_blocks(samples.draws[t].u2, samples.draws[t].s2_star, buf);
        for (std::size_t i = 0; i < n; ++i) s2_draws[i][t] = buf[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto [lo1, hi1] = hpd_interval(mu_draws[i], hpd_level);
        rep.mu_hpd_lo[i] = lo1;
        rep.mu_hpd_hi[i] = hi1;
        auto [lo2, hi2] = hpd_interval(s2_draws[i], hpd_level);
        rep.s2_hpd_lo[i] = lo2;
        rep.s2_hpd_hi[i] = hi2;
    }

    rep.change_prob1 = change_probabilities(samples, 1);
    rep.change_prob2 = change_probabilities(samples, 2);
    rep.n1_pmf = n_changes_posterior(samples, 1);
    rep.n2_pmf = n_changes_posterior(samples, 2);
    for (auto& [p, prob] : most_likely_partition(samples, 1, top_k))
        rep.top_rho1.push_back({p, prob});
    for (auto& [p, prob] : most_likely_partition(samples, 2, top_k))
        rep.top_rho2.push_back({p, prob});

    // induced partition summary
    rep.n_star_pmf.assign(n, 0.0);
    std::map<std::vector<std::uint8_t>, long> star_counts;
    for (const auto& d : samples.draws) {
        const auto bits = induced_bits(d);
        const auto changes = static_cast<std::size_t>(
            std::count(bits.begin(), bits.end(), static_cast<std::uint8_t>(0)));
        rep.n_star_pmf[changes] += 1.0;
        ++star_counts[bits];
        rep.p1_mean += d.p1;
        rep.p2_mean += d.p2;
    }
    for (auto& v : rep.n_star_pmf) v /= static_cast<double>(m);
    rep.p1_mean /= static_cast<double>(m);
    rep.p2_mean /= static_cast<double>(m);
    std::vector<std::pair<Partition, double>> star;
    for (const auto& [bits, cnt] : star_counts)
        star.emplace_back(partition_from_indicators(ChangeIndicators(samples.n, bits)),
                          static_cast<double>(cnt) / static_cast<double>(m));
    std::sort(star.begin(), star.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first.endpoints < b.first.endpoints;
    });
    if (star.size() > static_cast<std::size_t>(top_k)) star.resize(static_cast<std::size_t>(top_k));
    for (auto& [p, prob] : star) rep.top_rho_star.push_back({p, prob});
    return rep;
}

} // namespace bmcp

#endif
