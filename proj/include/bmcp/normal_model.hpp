#ifndef BMCP_NORMAL_MODEL_HPP
#define BMCP_NORMAL_MODEL_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "bmcp/prefix_stats.hpp"
#include "bmcp/rng.hpp"

namespace bmcp {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// Hyperparameters of the Normal model: means are a priori
/// N(mu0, sigma0sq); variances are a priori Inverse-Gamma with shape d/2
/// and scale a/2, i.e. density proportional to s^{-(d/2+1)} exp(-a/(2s)).
struct NormalHyper {
    double mu0 = 0.0;
    double sigma0sq = 100.0;
    double a = 0.1;
    double d = 2.1;

    void validate() const {
        if (!(sigma0sq > 0.0) || !(a > 0.0) || !(d > 0.0))
            throw std::invalid_argument("NormalHyper: sigma0sq, a and d must be positive");
    }
};

/// Per-instant structural parameters; mu is constant on the blocks of the
/// mean partition and sigma2 on the blocks of the variance partition.
struct ThetaState {
    std::vector<double> mu;
    std::vector<double> sigma2;
};

/// Count of variance evaluations that hit the 1e-300 floor. Purely a
/// diagnostic; clamping keeps -inf out of the log-space arithmetic.
inline std::atomic<std::uint64_t>& variance_clamp_counter() {
    static std::atomic<std::uint64_t> counter{0};
    return counter;
}

inline double clamped_variance(double s2) {
    if (s2 < 1e-300) {
        variance_clamp_counter().fetch_add(1, std::memory_order_relaxed);
        return 1e-300;
    }
    return s2;
}

/// Accumulates the variance sub-blocks of one mean block. Each sub-block is
/// a maximal run sharing one variance value; add() takes its count, sum,
/// sum of squares and that variance. finalize with the prior terms.
class MeanClusterTerms {
public:
    void add(long count, double sum, double sumsq, double sigma2) {
        if (count <= 0) throw std::invalid_argument("MeanClusterTerms: empty sub-block");
        const double s2 = clamped_variance(sigma2);
        if (!(s2 > 0.0)) throw std::invalid_argument("MeanClusterTerms: non-positive variance");
        q1_data_ += static_cast<double>(count) / s2;
        q2_data_ += sum / s2;
        x2_over_s2_ += sumsq / s2;
        n_log_s2_ += static_cast<double>(count) * std::log(s2);
        n_ += count;
    }

    long count() const { return n_; }

    double q1(const NormalHyper& h) const { return q1_data_ + 1.0 / h.sigma0sq; }
    double q2(const NormalHyper& h) const { return q2_data_ + h.mu0 / h.sigma0sq; }

    /// log f(X_S | sigma): the block mean integrated out against its Normal
    /// prior.
    double log_marginal(const NormalHyper& h) const {
        if (n_ == 0) throw std::invalid_argument("MeanClusterTerms: empty block");
        const double Q1 = q1(h);
        const double Q2 = q2(h);
        return -0.5 * static_cast<double>(n_) * kLog2Pi - 0.5 * std::log(h.sigma0sq * Q1) -
               0.5 * n_log_s2_ -
               0.5 * (x2_over_s2_ + h.mu0 * h.mu0 / h.sigma0sq - Q2 * Q2 / Q1);
    }

    double sample_mu(const NormalHyper& h, RngStream& rng) const {
        const double Q1 = q1(h);
        return rng.normal(q2(h) / Q1, std::sqrt(1.0 / Q1));
    }

private:
    double q1_data_ = 0.0;
    double q2_data_ = 0.0;
    double x2_over_s2_ = 0.0;
    double n_log_s2_ = 0.0;
    long n_ = 0;
};

namespace detail {

// Walk the maximal runs of equal consecutive sigma2 values inside the
// 1-based range [lo, hi] and feed each run into the accumulator.
inline void accumulate_mean_terms(MeanClusterTerms& terms, std::span<const double> x, int lo,
                                  int hi, std::span<const double> sigma2) {
    int run_lo = lo;
    for (int i = lo; i <= hi; ++i) {
        const bool last = (i == hi);
        const bool breaks =
            !last && sigma2[static_cast<std::size_t>(i)] != sigma2[static_cast<std::size_t>(i) - 1];
        if (last || breaks) {
            const RangeStats rs = direct_range_stats(x, run_lo, i);
            terms.add(rs.count, rs.sum, rs.sumsq, sigma2[static_cast<std::size_t>(run_lo) - 1]);
            run_lo = i + 1;
        }
    }
}

inline void check_block(std::size_t n, int lo, int hi, const char* who) {
    if (lo < 1 || hi > static_cast<int>(n) || lo > hi)
        throw std::invalid_argument(std::string(who) + ": empty or out-of-range block");
}

} // namespace detail

/// log f(X_S | sigma) for the mean block covering 1-based [lo, hi], with the
/// block mean integrated out. sigma2 is the full length-n variance vector.
inline double log_marginal_mean_cluster(std::span<const double> x, int lo, int hi,
                                        std::span<const double> sigma2, const NormalHyper& h) {
    detail::check_block(x.size(), lo, hi, "log_marginal_mean_cluster");
    h.validate();
    MeanClusterTerms terms;
    detail::accumulate_mean_terms(terms, x, lo, hi, sigma2);
    return terms.log_marginal(h);
}

/// Core of the variance-block marginal: only the block size and the residual
/// sum of squares against the current means enter.
inline double log_marginal_var_core(long n_s, double ss, const NormalHyper& h) {
    if (n_s <= 0) throw std::invalid_argument("log_marginal_var_core: empty block");
    const double shape_num = (static_cast<double>(n_s) + h.d) / 2.0;
    return -0.5 * static_cast<double>(n_s) * kLog2Pi + 0.5 * h.d * std::log(h.a / 2.0) +
           std::lgamma(shape_num) - std::lgamma(h.d / 2.0) - shape_num * std::log((ss + h.a) / 2.0);
}

inline double residual_sumsq(std::span<const double> x, int lo, int hi,
                             std::span<const double> mu) {
    double ss = 0.0;
    for (int i = lo; i <= hi; ++i) {
        const double r = x[static_cast<std::size_t>(i) - 1] - mu[static_cast<std::size_t>(i) - 1];
        ss += r * r;
    }
    return ss;
}

/// log f(X_S | mu) for the variance block covering [lo, hi], with the block
/// variance integrated out against its Inverse-Gamma prior.
inline double log_marginal_var_cluster(std::span<const double> x, int lo, int hi,
                                       std::span<const double> mu, const NormalHyper& h) {
    detail::check_block(x.size(), lo, hi, "log_marginal_var_cluster");
    h.validate();
    return log_marginal_var_core(hi - lo + 1, residual_sumsq(x, lo, hi, mu), h);
}

/// One draw of the common mean of block [lo, hi] from its Normal full
/// conditional.
inline double sample_mu_star(std::span<const double> x, int lo, int hi,
                             std::span<const double> sigma2, const NormalHyper& h,
                             RngStream& rng) {
    detail::check_block(x.size(), lo, hi, "sample_mu_star");
    h.validate();
    MeanClusterTerms terms;
    detail::accumulate_mean_terms(terms, x, lo, hi, sigma2);
    return terms.sample_mu(h, rng);
}

/// One draw of the common variance of block [lo, hi] from its Inverse-Gamma
/// full conditional: shape (n_S + d)/2, scale (SS + a)/2.
inline double sample_sigma2_star(std::span<const double> x, int lo, int hi,
                                 std::span<const double> mu, const NormalHyper& h,
                                 RngStream& rng) {
    detail::check_block(x.size(), lo, hi, "sample_sigma2_star");
    h.validate();
    const double ss = residual_sumsq(x, lo, hi, mu);
    const long n_s = hi - lo + 1;
    return rng.inv_gamma((static_cast<double>(n_s) + h.d) / 2.0, (ss + h.a) / 2.0);
}

/// Full conditional of a change probability given its partition has b
/// blocks: Beta(alpha + b - 1, n + beta - b).
inline double sample_p(int b, int n, double alpha, double beta, RngStream& rng) {
    if (b < 1 || b > n) throw std::invalid_argument("sample_p: need 1 <= b <= n");
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("sample_p: alpha and beta must be positive");
    return rng.beta(alpha + b - 1.0, n + beta - b);
}

inline double log_normal_pdf(double x, double mean, double s2) {
    const double v = clamped_variance(s2);
    const double r = x - mean;
    return -0.5 * (kLog2Pi + std::log(v) + r * r / v);
}

/// Joint log likelihood of the series under per-instant means and variances.
inline double loglik_full(std::span<const double> x, const ThetaState& theta) {
    if (x.size() != theta.mu.size() || x.size() != theta.sigma2.size())
        throw std::invalid_argument("loglik_full: inconsistent lengths");
    double ll = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(theta.sigma2[i] > 0.0))
            throw std::invalid_argument("loglik_full: non-positive variance");
        ll += log_normal_pdf(x[i], theta.mu[i], theta.sigma2[i]);
    }
    return ll;
}

} // namespace bmcp

#endif
