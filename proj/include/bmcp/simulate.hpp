#ifndef BMCP_SIMULATE_HPP
#define BMCP_SIMULATE_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bmcp/baselines.hpp"
#include "bmcp/gibbs.hpp"
#include "bmcp/partition.hpp"
#include "bmcp/rng.hpp"
#include "bmcp/summary.hpp"

namespace bmcp {

/// Ground truth of one synthetic study: block layout and cluster values for
/// both structural parameters.
struct ScenarioSpec {
    std::string name;
    int n = 0;
    Partition rho1, rho2;
    std::vector<double> mu_star;
    std::vector<double> sigma2_star;

    void validate() const {
        rho1.validate();
        rho2.validate();
        if (rho1.n != n || rho2.n != n)
            throw std::invalid_argument("ScenarioSpec: partitions must cover n points");
        if (static_cast<int>(mu_star.size()) != rho1.block_count())
            throw std::invalid_argument("ScenarioSpec: one mean per mean block required");
        if (static_cast<int>(sigma2_star.size()) != rho2.block_count())
            throw std::invalid_argument("ScenarioSpec: one variance per variance block required");
        for (double s : sigma2_star)
            if (!(s > 0.0)) throw std::invalid_argument("ScenarioSpec: variances must be positive");
    }

    std::vector<double> mu_path() const {
        std::vector<double> mu(static_cast<std::size_t>(n));
        for (int j = 1; j <= rho1.block_count(); ++j)
            for (int i = rho1.block_first(j); i <= rho1.block_last(j); ++i)
                mu[static_cast<std::size_t>(i) - 1] = mu_star[static_cast<std::size_t>(j) - 1];
        return mu;
    }

    std::vector<double> sigma2_path() const {
        std::vector<double> s2(static_cast<std::size_t>(n));
        for (int j = 1; j <= rho2.block_count(); ++j)
            for (int i = rho2.block_first(j); i <= rho2.block_last(j); ++i)
                s2[static_cast<std::size_t>(i) - 1] = sigma2_star[static_cast<std::size_t>(j) - 1];
        return s2;
    }
};

inline std::vector<double> generate_series(const ScenarioSpec& spec, RngStream& rng) {
    spec.validate();
    const std::vector<double> mu = spec.mu_path();
    const std::vector<double> s2 = spec.sigma2_path();
    std::vector<double> x(static_cast<std::size_t>(spec.n));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.normal(mu[i], std::sqrt(s2[i]));
    return x;
}

/// The three benchmark layouts plus the sensitivity-study layout.
inline std::vector<ScenarioSpec> scenario_presets() {
    std::vector<ScenarioSpec> out;
    {
        ScenarioSpec s;
        s.name = "scenario1";
        s.n = 100;
        s.rho1 = Partition(100, {0, 25, 50, 75, 100});
        s.rho2 = Partition(100, {0, 100});
        s.mu_star = {1.0, 3.0, 0.0, 2.0};
        s.sigma2_star = {1.0};
        out.push_back(std::move(s));
    }
    {
        ScenarioSpec s;
        s.name = "scenario2";
        s.n = 300;
        s.rho1 = Partition(300, {0, 300});
        s.rho2 = Partition(300, {0, 75, 150, 225, 300});
        s.mu_star = {1.0};
        s.sigma2_star = {1.0, 4.0, 1.0, 9.0};
        out.push_back(std::move(s));
    }
    {
        ScenarioSpec s;
        s.name = "scenario3";
        s.n = 300;
        s.rho1 = Partition(300, {0, 60, 120, 180, 240, 300});
        s.rho2 = Partition(300, {0, 150, 300});
        s.mu_star = {0.0, 2.0, 4.0, 2.0, 0.0};
        s.sigma2_star = {1.0, 4.0};
        out.push_back(std::move(s));
    }
    {
        ScenarioSpec s;
        s.name = "supplement";
        s.n = 400;
        s.rho1 = Partition(400, {0, 100, 200, 300, 400});
        s.rho2 = Partition(400, {0, 122, 223, 325, 400});
        s.mu_star = {0.5, 1.0, 0.25, 0.75};
        s.sigma2_star = {0.3 * 0.3, 0.6 * 0.6, 0.15 * 0.15, 0.45 * 0.45};
        out.push_back(std::move(s));
    }
    return out;
}

inline ScenarioSpec scenario_by_name(const std::string& name) {
    for (auto& s : scenario_presets())
        if (s.name == name) return s;
    throw std::invalid_argument("unknown scenario: " + name);
}

struct NamedHyper {
    std::string name;
    NormalHyper hyper;
};

/// Sensitivity-study hyperparameter configurations C1-C4.
inline std::vector<NamedHyper> hyper_configs() {
    return {
        {"C1", NormalHyper{0.0, 100.0, 0.05, 1.05}},
        {"C2", NormalHyper{0.0, 1.0, 1.0, 1.0}},
        {"C3", NormalHyper{0.0, 100.0, 1.0, 1.0}},
        {"C4", NormalHyper{0.0, 1.0, 0.05, 1.05}},
    };
}

enum class Model { bmcp, lcia05, bh93 };

inline std::string model_name(Model m) {
    switch (m) {
        case Model::bmcp: return "bmcp";
        case Model::lcia05: return "lcia05";
        case Model::bh93: return "bh93";
    }
    throw std::logic_error("model_name: bad enum");
}

inline Model model_from_name(const std::string& s) {
    if (s == "bmcp") return Model::bmcp;
    if (s == "lcia05") return Model::lcia05;
    if (s == "bh93") return Model::bh93;
    throw std::invalid_argument("unknown model: " + s);
}

/// All model knobs in one bundle; only the members of the selected model are
/// read.
struct ModelConfig {
    Model model = Model::bmcp;
    NormalHyper normal;
    YaoPrior yao1, yao2;
    NigHyper nig;
    Bh93Hyper bh93;
};

inline PosteriorSamples run_model(const ModelConfig& mc, std::span<const double> x,
                                  const McmcConfig& cfg) {
    switch (mc.model) {
        case Model::bmcp: return run_chain(x, mc.normal, mc.yao1, mc.yao2, cfg);
        case Model::lcia05: return run_lcia05(x, mc.nig, mc.yao1, cfg);
        case Model::bh93: return run_bh93(x, mc.bh93, cfg);
    }
    throw std::logic_error("run_model: bad enum");
}

/// Per-replication record kept by the Monte Carlo harness.
struct ReplicationSummary {
    Partition rho1_mode, rho2_mode;
    int n1_mode = 0, n2_mode = 0;
    std::vector<double> change_prob1, change_prob2; // length n-1
    std::vector<double> mu_estimate, s2_estimate;   // length n
};

struct BandedCurve {
    std::vector<double> mean, q05, q95;
};

struct McReport {
    ScenarioSpec spec;
    std::string model;
    std::vector<ReplicationSummary> replications;
    BandedCurve change_prob1, change_prob2; // across replications, per instant
    BandedCurve product_mu, product_s2;
};

namespace detail {

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty set");
    const double h = q * (static_cast<double>(sorted.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double w = h - std::floor(h);
    return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

inline BandedCurve bands_over_replications(const std::vector<const std::vector<double>*>& rows) {
    BandedCurve out;
    if (rows.empty()) return out;
    const std::size_t len = rows.front()->size();
    out.mean.resize(len);
    out.q05.resize(len);
    out.q95.resize(len);
    std::vector<double> col(rows.size());
    for (std::size_t i = 0; i < len; ++i) {
        double s = 0.0;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            col[r] = (*rows[r])[i];
            s += col[r];
        }
        std::sort(col.begin(), col.end());
        out.mean[i] = s / static_cast<double>(rows.size());
        out.q05[i] = quantile_sorted(col, 0.05);
        out.q95[i] = quantile_sorted(col, 0.95);
    }
    return out;
}

inline int pmf_mode(std::span<const double> pmf) {
    int arg = 0;
    for (std::size_t c = 1; c < pmf.size(); ++c)
        if (pmf[c] > pmf[static_cast<std::size_t>(arg)]) arg = static_cast<int>(c);
    return arg;
}

} // namespace detail

inline int replication_threads(int replications) {
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    if (const char* env = std::getenv("MCPD_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) threads = std::min(threads, cap);
    }
    return std::min(threads, replications);
}

/// Monte Carlo study: fresh data and a full chain per replication, each on
/// its own deterministic stream; the aggregation is indexed by replication,
/// so the result does not depend on the number of workers.
inline McReport run_replications(const ModelConfig& mc, const ScenarioSpec& spec,
                                 int replications, const McmcConfig& cfg) {
    spec.validate();
    cfg.validate();
    if (replications < 1) throw std::invalid_argument("run_replications: need >= 1 replication");

    std::vector<ReplicationSummary> reps(static_cast<std::size_t>(replications));
    std::atomic<int> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const int r = cursor.fetch_add(1);
            if (r >= replications) return;
            // replication seed = master seed XOR splitmix64 hash of index;
            // data stream and chain seed are fixed sub-derivations of it.
            const std::uint64_t rep_seed = cfg.seed ^ splitmix64(static_cast<std::uint64_t>(r));
            RngStream data_rng(splitmix64(rep_seed ^ 1ULL));
            const std::vector<double> x = generate_series(spec, data_rng);
            McmcConfig chain_cfg = cfg;
            chain_cfg.seed = splitmix64(rep_seed ^ 2ULL);
            const PosteriorSamples samples = run_model(mc, x, chain_cfg);

            ReplicationSummary& rs = reps[static_cast<std::size_t>(r)];
            rs.rho1_mode = most_likely_partition(samples, 1, 1).front().first;
            rs.rho2_mode = most_likely_partition(samples, 2, 1).front().first;
            rs.n1_mode = detail::pmf_mode(n_changes_posterior(samples, 1));
            rs.n2_mode = detail::pmf_mode(n_changes_posterior(samples, 2));
            rs.change_prob1 = change_probabilities(samples, 1);
            rs.change_prob2 = change_probabilities(samples, 2);
            const ProductEstimates pe = product_estimates(samples);
            rs.mu_estimate = pe.mu_mean;
            rs.s2_estimate = pe.s2_mean;
        }
    };

    const int threads = replication_threads(replications);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    McReport out;
    out.spec = spec;
    out.model = model_name(mc.model);
    out.replications = std::move(reps);
    std::vector<const std::vector<double>*> rows;
    auto collect = [&](auto proj) {
        rows.clear();
        for (const auto& r : out.replications) rows.push_back(proj(r));
        return detail::bands_over_replications(rows);
    };
    out.change_prob1 = collect([](const ReplicationSummary& r) { return &r.change_prob1; });
    out.change_prob2 = collect([](const ReplicationSummary& r) { return &r.change_prob2; });
    out.product_mu = collect([](const ReplicationSummary& r) { return &r.mu_estimate; });
    out.product_s2 = collect([](const ReplicationSummary& r) { return &r.s2_estimate; });
    return out;
}

/// Centered rolling sample variance with the window clamped to stay inside
/// the series, so every position is covered by a full-length window.
inline std::vector<double> windowed_variance(std::span<const double> x, int window) {
    const int n = static_cast<int>(x.size());
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("windowed_variance: window must be odd and >= 3");
    if (window > n) throw std::invalid_argument("windowed_variance: window larger than series");
    const int half = window / 2;
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int lo = std::clamp(i - half, 0, n - window);
        double mean = 0.0;
        for (int j = lo; j < lo + window; ++j) mean += x[static_cast<std::size_t>(j)];
        mean /= window;
        double ss = 0.0;
        for (int j = lo; j < lo + window; ++j) {
            const double r = x[static_cast<std::size_t>(j)] - mean;
            ss += r * r;
        }
        out[static_cast<std::size_t>(i)] = ss / (window - 1);
    }
    return out;
}

} // namespace bmcp

#endif
