#ifndef BMCP_GEWEKE_HPP
#define BMCP_GEWEKE_HPP

#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bmcp/gibbs.hpp"

namespace bmcp {

/// A transition kernel (state, data) -> state used by the joint-distribution
/// check. The default is gibbs_iteration; tests inject corrupted kernels to
/// confirm the check catches them.
using GewekeTransition = std::function<void(ModelState&, std::span<const double>,
                                            const NormalHyper&, const YaoPrior&, const YaoPrior&,
                                            RngStream&)>;

struct GewekeReport {
    static constexpr int kStats = 6;
    std::array<std::string, kStats> names{"N1", "N2", "mean_mu", "mean_sigma2", "p1", "p2"};
    std::array<double, kStats> z{};
    std::array<double, kStats> marginal_mean{};
    std::array<double, kStats> successive_mean{};

    double max_abs_z() const {
        double m = 0.0;
        for (double v : z) m = std::max(m, std::abs(v));
        return m;
    }
};

/// One draw of (state, data) from prior times likelihood.
inline ModelState draw_prior_state(int n, const NormalHyper& hyper, const YaoPrior& yao1,
                                   const YaoPrior& yao2, RngStream& rng) {
    ModelState st;
    st.p1 = rng.beta(yao1.alpha, yao1.beta);
    st.p2 = rng.beta(yao2.alpha, yao2.beta);
    auto draw_bits = [&](double p) {
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(n - 1));
        for (auto& b : bits) b = rng.bernoulli(p) ? 0 : 1; // change with probability p
        return bits;
    };
    st.u1 = ChangeIndicators(n, draw_bits(st.p1));
    st.u2 = ChangeIndicators(n, draw_bits(st.p2));
    st.theta.mu.resize(static_cast<std::size_t>(n));
    st.theta.sigma2.resize(static_cast<std::size_t>(n));
    const Partition rho1 = partition_from_indicators(st.u1);
    for (int j = 1; j <= rho1.block_count(); ++j) {
        const double mu = rng.normal(hyper.mu0, std::sqrt(hyper.sigma0sq));
        for (int i = rho1.block_first(j); i <= rho1.block_last(j); ++i)
            st.theta.mu[static_cast<std::size_t>(i) - 1] = mu;
    }
    const Partition rho2 = partition_from_indicators(st.u2);
    for (int j = 1; j <= rho2.block_count(); ++j) {
        const double s2 = rng.inv_gamma(hyper.d / 2.0, hyper.a / 2.0);
        for (int i = rho2.block_first(j); i <= rho2.block_last(j); ++i)
            st.theta.sigma2[static_cast<std::size_t>(i) - 1] = s2;
    }
    return st;
}

inline std::vector<double> simulate_data(const ThetaState& theta, RngStream& rng) {
    std::vector<double> x(theta.mu.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = rng.normal(theta.mu[i], std::sqrt(theta.sigma2[i]));
    return x;
}

namespace detail {

inline std::array<double, GewekeReport::kStats> geweke_stats(const ModelState& st) {
    const double n = static_cast<double>(st.theta.mu.size());
    double mu_sum = 0.0, s2_sum = 0.0;
    for (std::size_t i = 0; i < st.theta.mu.size(); ++i) {
        mu_sum += st.theta.mu[i];
        s2_sum += st.theta.sigma2[i];
    }
    const auto n1 = static_cast<double>(partition_from_indicators(st.u1).num_changes());
    const auto n2 = static_cast<double>(partition_from_indicators(st.u2).num_changes());
    return {n1, n2, mu_sum / n, s2_sum / n, st.p1, st.p2};
}

inline double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Squared standard error of the mean of an iid sample.
inline double se2_iid(std::span<const double> v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    const double nn = static_cast<double>(v.size());
    return s / (nn - 1.0) / nn;
}

// Squared standard error of the mean of an autocorrelated chain, batch
// means with ~sqrt(M) batches.
inline double se2_batch(std::span<const double> v) {
    const std::size_t m = v.size();
    const std::size_t nb = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(m)));
    const std::size_t bs = m / nb;
    std::vector<double> bm;
    bm.reserve(nb);
    for (std::size_t b = 0; b < nb; ++b)
        bm.push_back(mean_of(v.subspan(b * bs, bs)));
    const double grand = mean_of(bm);
    double s = 0.0;
    for (double x : bm) s += (x - grand) * (x - grand);
    return s / (static_cast<double>(nb) - 1.0) / static_cast<double>(nb);
}

} // namespace detail

/// Joint-distribution ("getting it right") validation: the marginal-
/// conditional sampler draws (state, data) from prior x likelihood; the
/// successive-conditional sampler alternates the transition kernel with
/// data re-simulation. Both target the same joint law, so the standardized
/// differences of the test statistics must look like noise.
inline GewekeReport geweke_joint_check(int n, const NormalHyper& hyper, const YaoPrior& yao1,
                                       const YaoPrior& yao2, long draws, RngStream& rng,
                                       GewekeTransition transition = {}) {
    if (n < 2) throw std::invalid_argument("geweke_joint_check: n must be >= 2");
    if (draws < 100) throw std::invalid_argument("geweke_joint_check: need at least 100 draws");
    hyper.validate();
    if (!transition) {
        transition = [](ModelState& st, std::span<const double> x, const NormalHyper& h,
                        const YaoPrior& y1, const YaoPrior& y2, RngStream& r) {
            const ChainContext cx(x, h, y1, y2);
            gibbs_iteration(st, cx, r);
        };
    }

    constexpr int K = GewekeReport::kStats;
    std::array<std::vector<double>, K> a, b;
    for (int k = 0; k < K; ++k) {
        a[k].reserve(static_cast<std::size_t>(draws));
        b[k].reserve(static_cast<std::size_t>(draws));
    }

    // (a) marginal-conditional: iid draws from the joint.
    for (long t = 0; t < draws; ++t) {
        const ModelState st = draw_prior_state(n, hyper, yao1, yao2, rng);
        const auto s = detail::geweke_stats(st);
        for (int k = 0; k < K; ++k) a[k].push_back(s[k]);
    }

    // (b) successive-conditional: transition then fresh data.
    ModelState st = draw_prior_state(n, hyper, yao1, yao2, rng);
    std::vector<double> x = simulate_data(st.theta, rng);
    for (long t = 0; t < draws; ++t) {
        transition(st, x, hyper, yao1, yao2, rng);
        x = simulate_data(st.theta, rng);
        const auto s = detail::geweke_stats(st);
        for (int k = 0; k < K; ++k) b[k].push_back(s[k]);
    }

    GewekeReport rep;
    for (int k = 0; k < K; ++k) {
        rep.marginal_mean[k] = detail::mean_of(a[k]);
        rep.successive_mean[k] = detail::mean_of(b[k]);
        const double se2 = detail::se2_iid(a[k]) + detail::se2_batch(b[k]);
        rep.z[k] = (rep.marginal_mean[k] - rep.successive_mean[k]) / std::sqrt(se2);
    }
    return rep;
}

} // namespace bmcp

#endif
