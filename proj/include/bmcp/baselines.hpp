#ifndef BMCP_BASELINES_HPP
#define BMCP_BASELINES_HPP

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "bmcp/gibbs.hpp"
#include "bmcp/normal_model.hpp"
#include "bmcp/partition.hpp"
#include "bmcp/prefix_stats.hpp"
#include "bmcp/rng.hpp"

namespace bmcp {

/// Normal-Inverse-Gamma cluster prior of the joint-cluster baseline:
/// mu* | s2* ~ N(m, v s2*), s2* ~ IG(d/2 shape, a/2 scale).
struct NigHyper {
    double m = 0.0;
    double v = 2.0;
    double a = 0.1;
    double d = 2.1;

    void validate() const {
        if (!(v > 0.0) || !(a > 0.0) || !(d > 0.0))
            throw std::invalid_argument("NigHyper: v, a and d must be positive");
    }
};

/// Mean-change-only baseline: shared variance with an Inverse-Gamma
/// hyperprior (shape d/2, scale a/2), block means a priori
/// N(mu0, sigma0sq / block size), and the change probability uniform on
/// (0, p_max).
struct Bh93Hyper {
    double mu0 = 0.0;
    double sigma0sq = 1.0;
    double a = 0.1;
    double d = 2.1;
    double p_max = 0.05;

    void validate() const {
        if (!(sigma0sq > 0.0) || !(a > 0.0) || !(d > 0.0))
            throw std::invalid_argument("Bh93Hyper: sigma0sq, a and d must be positive");
        if (!(p_max > 0.0 && p_max <= 1.0))
            throw std::invalid_argument("Bh93Hyper: p_max must lie in (0,1]");
    }
};

/// log of the Student-type closed form for one block under the N-IG prior,
/// from the block count, sum and sum of squares.
inline double log_marginal_nig_core(long cnt, double sum, double sumsq, const NigHyper& h) {
    if (cnt <= 0) throw std::invalid_argument("log_marginal_nig_core: empty block");
    const double n = static_cast<double>(cnt);
    const double xbar = sum / n;
    const double ss_within = std::max(0.0, sumsq - n * xbar * xbar);
    const double shrink = n * (xbar - h.m) * (xbar - h.m) / (1.0 + n * h.v);
    const double shape = (n + h.d) / 2.0;
    return -0.5 * n * kLog2Pi - 0.5 * std::log1p(n * h.v) + 0.5 * h.d * std::log(h.a / 2.0) -
           std::lgamma(h.d / 2.0) + std::lgamma(shape) -
           shape * std::log((ss_within + shrink + h.a) / 2.0);
}

inline double log_marginal_nig_cluster(std::span<const double> x, int lo, int hi,
                                       const NigHyper& h) {
    h.validate();
    const RangeStats rs = direct_range_stats(x, lo, hi);
    return log_marginal_nig_core(rs.count, rs.sum, rs.sumsq, h);
}

/// Beta(alpha + b - 1, n + beta - b) truncated to (0, p_max), drawn by
/// inverting the regularized incomplete beta function. Rejection would have
/// unbounded cost when most of the mass sits above p_max.
inline double sample_p_truncated(int b, int n, double alpha, double beta, double p_max,
                                 RngStream& rng) {
    if (!(p_max > 0.0 && p_max <= 1.0))
        throw std::invalid_argument("sample_p_truncated: p_max must lie in (0,1]");
    if (b < 1 || b > n) throw std::invalid_argument("sample_p_truncated: need 1 <= b <= n");
    const double a_post = alpha + b - 1.0;
    const double b_post = n + beta - b;
    if (p_max >= 1.0) return rng.beta(a_post, b_post);
    const double cap = boost::math::ibeta(a_post, b_post, p_max);
    const double u = rng.uniform_pos();
    double p = boost::math::ibeta_inv(a_post, b_post, u * cap);
    if (p <= 0.0) p = std::nextafter(0.0, 1.0);
    if (p >= p_max) p = std::nextafter(p_max, 0.0);
    return p;
}

namespace detail {

// Single-partition draw recorder; the two per-parameter slots of SampleDraw
// are filled according to what the model asserts about each parameter.
inline SampleDraw record_single_partition_draw(const std::vector<std::uint8_t>& bits,
                                               std::span<const double> mu_star,
                                               std::span<const double> s2_star,
                                               bool variance_follows_partition, double p) {
    SampleDraw d;
    d.u1 = bits;
    d.mu_star.assign(mu_star.begin(), mu_star.end());
    if (variance_follows_partition) {
        d.u2 = bits;
        d.s2_star.assign(s2_star.begin(), s2_star.end());
    } else {
        d.u2.assign(bits.size(), 1); // constant variance: single block
        d.s2_star.assign(s2_star.begin(), s2_star.begin() + 1);
    }
    d.p1 = p;
    d.p2 = p;
    return d;
}

} // namespace detail

/// Joint mean/variance single-partition baseline. The scan works on the
/// fully collapsed N-IG marginal, so no cluster parameter enters the ratio;
/// (mu*, s2*) are redrawn per block afterwards for the product estimates.
inline PosteriorSamples run_lcia05(std::span<const double> x, const NigHyper& hyper,
                                   const YaoPrior& yao, const McmcConfig& cfg) {
    cfg.validate();
    hyper.validate();
    yao.validate();
    const int n = static_cast<int>(x.size());
    if (n < 2) throw std::invalid_argument("run_lcia05: need at least 2 points");
    for (double v : x)
        if (!std::isfinite(v)) throw std::invalid_argument("run_lcia05: non-finite data");

    RngStream rng(cfg.seed);
    const PrefixStats px(x);
    const std::uint8_t fill = (cfg.init == InitMode::none_changed) ? 1 : 0;
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n - 1), fill);
    double p = yao.alpha / (yao.alpha + yao.beta);

    auto log_marg = [&](int lo, int hi) {
        const RangeStats rs = px.range(lo, hi);
        return log_marginal_nig_core(rs.count, rs.sum, rs.sumsq, hyper);
    };

    PosteriorSamples out;
    out.n = n;
    out.draws.reserve(static_cast<std::size_t>(cfg.iterations / cfg.thin));
    for (long t = 1; t <= cfg.warmup + cfg.iterations; ++t) {
        const int b = static_cast<int>(std::count(bits.begin(), bits.end(), 0)) + 1;
        p = sample_p(b, n, yao.alpha, yao.beta, rng);
        detail::indicator_sweep(bits, n, p, log_marg, rng);

        if (t > cfg.warmup && (t - cfg.warmup) % cfg.thin == 0) {
            // conjugate redraw per block: s2* ~ IG, mu* | s2* ~ N
            const Partition rho = partition_from_indicators(ChangeIndicators(n, bits));
            std::vector<double> mu_star, s2_star;
            for (int j = 1; j <= rho.block_count(); ++j) {
                const RangeStats rs = px.range(rho.block_first(j), rho.block_last(j));
                const double cnt = static_cast<double>(rs.count);
                const double xbar = rs.sum / cnt;
                const double ss_within = std::max(0.0, rs.sumsq - cnt * xbar * xbar);
                const double shrink =
                    cnt * (xbar - hyper.m) * (xbar - hyper.m) / (1.0 + cnt * hyper.v);
                const double s2 = rng.inv_gamma((cnt + hyper.d) / 2.0,
                                                (ss_within + shrink + hyper.a) / 2.0);
                const double post_mean =
                    (cnt * xbar * hyper.v + hyper.m) / (1.0 + cnt * hyper.v);
                const double post_var = s2 * hyper.v / (1.0 + cnt * hyper.v);
                mu_star.push_back(rng.normal(post_mean, std::sqrt(post_var)));
                s2_star.push_back(s2);
            }
            out.draws.push_back(
                detail::record_single_partition_draw(bits, mu_star, s2_star, true, p));
        }
    }
    return out;
}

/// Mean-change baseline with a shared variance. The scan collapses the
/// block mean against its size-scaled Normal prior given the current shared
/// variance; the shared variance and the truncated change probability are
/// refreshed every sweep.
inline PosteriorSamples run_bh93(std::span<const double> x, const Bh93Hyper& hyper,
                                 const McmcConfig& cfg) {
    cfg.validate();
    hyper.validate();
    const int n = static_cast<int>(x.size());
    if (n < 2) throw std::invalid_argument("run_bh93: need at least 2 points");
    for (double v : x)
        if (!std::isfinite(v)) throw std::invalid_argument("run_bh93: non-finite data");

    RngStream rng(cfg.seed);
    const PrefixStats px(x);
    const std::uint8_t fill = (cfg.init == InitMode::none_changed) ? 1 : 0;
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n - 1), fill);
    double p = hyper.p_max / 2.0;
    double sigma2 = rng.inv_gamma(hyper.d / 2.0, hyper.a / 2.0);
    std::vector<double> mu(static_cast<std::size_t>(n), hyper.mu0);
    std::vector<double> mu_star{hyper.mu0};

    // log f(X_S | sigma2) with mu* integrated against N(mu0, sigma0sq/n_S)
    auto log_marg = [&](int lo, int hi) {
        const RangeStats rs = px.range(lo, hi);
        const double cnt = static_cast<double>(rs.count);
        const double prior_var = hyper.sigma0sq / cnt;
        const double q1 = cnt / sigma2 + 1.0 / prior_var;
        const double q2 = rs.sum / sigma2 + hyper.mu0 / prior_var;
        return -0.5 * cnt * kLog2Pi - 0.5 * cnt * std::log(sigma2) -
               0.5 * std::log(prior_var * q1) -
               0.5 * (rs.sumsq / sigma2 + hyper.mu0 * hyper.mu0 / prior_var - q2 * q2 / q1);
    };

    PosteriorSamples out;
    out.n = n;
    out.draws.reserve(static_cast<std::size_t>(cfg.iterations / cfg.thin));
    for (long t = 1; t <= cfg.warmup + cfg.iterations; ++t) {
        const int b = static_cast<int>(std::count(bits.begin(), bits.end(), 0)) + 1;
        p = sample_p_truncated(b, n, 1.0, 1.0, hyper.p_max, rng);
        detail::indicator_sweep(bits, n, p, log_marg, rng);

        // block means given the shared variance
        const Partition rho = partition_from_indicators(ChangeIndicators(n, bits));
        mu_star.clear();
        for (int j = 1; j <= rho.block_count(); ++j) {
            const RangeStats rs = px.range(rho.block_first(j), rho.block_last(j));
            const double cnt = static_cast<double>(rs.count);
            const double prior_var = hyper.sigma0sq / cnt;
            const double q1 = cnt / sigma2 + 1.0 / prior_var;
            const double q2 = rs.sum / sigma2 + hyper.mu0 / prior_var;
            const double draw = rng.normal(q2 / q1, std::sqrt(1.0 / q1));
            mu_star.push_back(draw);
            for (int i = rho.block_first(j); i <= rho.block_last(j); ++i)
                mu[static_cast<std::size_t>(i) - 1] = draw;
        }

        // shared variance given all block means
        double ss = 0.0;
        for (int i = 1; i <= n; ++i) {
            const double r = x[static_cast<std::size_t>(i) - 1] - mu[static_cast<std::size_t>(i) - 1];
            ss += r * r;
        }
        sigma2 = rng.inv_gamma((static_cast<double>(n) + hyper.d) / 2.0, (ss + hyper.a) / 2.0);

        if (t > cfg.warmup && (t - cfg.warmup) % cfg.thin == 0) {
            const double s2_arr[1] = {sigma2};
            out.draws.push_back(detail::record_single_partition_draw(
                bits, mu_star, std::span<const double>(s2_arr, 1), false, p));
        }
    }
    return out;
}

} // namespace bmcp

#endif
