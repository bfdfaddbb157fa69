#ifndef BMCP_GIBBS_HPP
#define BMCP_GIBBS_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "bmcp/normal_model.hpp"
#include "bmcp/partition.hpp"
#include "bmcp/prefix_stats.hpp"
#include "bmcp/rng.hpp"

namespace bmcp {

enum class InitMode { none_changed, all_changed };

struct McmcConfig {
    long iterations = 5000;
    long warmup = 5000;
    int thin = 1;
    std::uint64_t seed = 1;
    InitMode init = InitMode::none_changed;

    void validate() const {
        if (iterations <= 0) throw std::invalid_argument("McmcConfig: iterations must be positive");
        if (warmup < 0) throw std::invalid_argument("McmcConfig: warmup must be non-negative");
        if (thin < 1) throw std::invalid_argument("McmcConfig: thin must be >= 1");
    }
};

/// Current chain state. theta is block-constant with respect to the
/// partitions implied by u1 (means) and u2 (variances).
struct ModelState {
    ChangeIndicators u1, u2;
    ThetaState theta;
    double p1 = 0.5, p2 = 0.5;
};

/// One retained draw, stored compactly: indicator bits plus one value per
/// block. Expand with expand_blocks when per-instant vectors are needed.
struct SampleDraw {
    std::vector<std::uint8_t> u1, u2;
    std::vector<double> mu_star, s2_star;
    double p1 = 0.0, p2 = 0.0;
};

inline void expand_blocks(std::span<const std::uint8_t> bits, std::span<const double> star,
                          std::vector<double>& out) {
    const std::size_t n = bits.size() + 1;
    out.resize(n);
    std::size_t block = 0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = star[block];
        if (i < bits.size() && bits[i] == 0) ++block;
    }
    if (block + 1 != star.size())
        throw std::invalid_argument("expand_blocks: bits and star values disagree");
}

struct PosteriorSamples {
    int n = 0;
    std::vector<SampleDraw> draws;

    std::size_t draw_count() const { return draws.size(); }
};

/// Everything a chain needs that does not change across sweeps.
struct ChainContext {
    std::span<const double> x;
    PrefixStats px;
    NormalHyper hyper;
    YaoPrior yao1, yao2;

    ChainContext(std::span<const double> data, const NormalHyper& h, const YaoPrior& y1,
                 const YaoPrior& y2)
        : x(data), px(data), hyper(h), yao1(y1), yao2(y2) {
        h.validate();
        y1.validate();
        y2.validate();
        if (data.size() < 2) throw std::invalid_argument("ChainContext: need at least 2 points");
        for (double v : data)
            if (!std::isfinite(v)) throw std::invalid_argument("ChainContext: non-finite data");
    }
};

namespace detail {

// Variance structure seen by a mean-indicator scan: the variance partition's
// end points and one variance value per variance block.
struct VarLayout {
    std::vector<int> endpoints;   // 0 = e_0 < ... < e_b = n
    std::vector<double> s2_star;  // per block

    static VarLayout from_state(const ChangeIndicators& u2, std::span<const double> sigma2) {
        VarLayout vl;
        const Partition rho2 = partition_from_indicators(u2);
        vl.endpoints = rho2.endpoints;
        vl.s2_star.reserve(static_cast<std::size_t>(rho2.block_count()));
        for (int j = 1; j <= rho2.block_count(); ++j)
            vl.s2_star.push_back(sigma2[static_cast<std::size_t>(rho2.block_first(j)) - 1]);
        return vl;
    }
};

// log f(X_[lo,hi] | sigma) through prefix statistics; O(#overlapping
// variance blocks) rather than O(block size).
inline MeanClusterTerms mean_terms_fast(const PrefixStats& px, int lo, int hi,
                                        const VarLayout& vl) {
    MeanClusterTerms terms;
    // first variance block whose last index >= lo
    auto it = std::lower_bound(vl.endpoints.begin() + 1, vl.endpoints.end(), lo);
    std::size_t t = static_cast<std::size_t>(it - vl.endpoints.begin());
    while (t < vl.endpoints.size() && vl.endpoints[t - 1] < hi) {
        const int sub_lo = std::max(lo, vl.endpoints[t - 1] + 1);
        const int sub_hi = std::min(hi, vl.endpoints[t]);
        const RangeStats rs = px.range(sub_lo, sub_hi);
        terms.add(rs.count, rs.sum, rs.sumsq, vl.s2_star[t - 1]);
        ++t;
    }
    return terms;
}

// For a position scan over old indicator bits: next_change[i] = the smallest
// end point >= i under the pre-sweep bits, or n when there is none.
inline std::vector<int> next_change_table(const std::vector<std::uint8_t>& bits, int n) {
    std::vector<int> next(static_cast<std::size_t>(n) + 2, n);
    for (int i = n - 1; i >= 1; --i) {
        next[static_cast<std::size_t>(i)] =
            bits[static_cast<std::size_t>(i) - 1] == 0 ? i : next[static_cast<std::size_t>(i) + 1];
    }
    return next;
}

} // namespace detail

/// Reference log ratio for merging at position i (1 <= i <= n-1) in the
/// k-th indicator vector (k = 1 means, k = 2 variances):
/// log R = [marginal + cohesion of the merged block]
///       - [marginals + cohesions of the left/right split blocks],
/// with the other parameter vector held at its current value. Slow path;
/// the sweep uses an algebraically identical incremental form.
inline double indicator_log_ratio(int k, int i, const ModelState& state,
                                  std::span<const double> x, const NormalHyper& hyper,
                                  const YaoPrior& yao) {
    const int n = static_cast<int>(x.size());
    if (k != 1 && k != 2) throw std::invalid_argument("indicator_log_ratio: k must be 1 or 2");
    if (i < 1 || i > n - 1) throw std::invalid_argument("indicator_log_ratio: position out of range");
    (void)yao;
    const ChangeIndicators& u = (k == 1) ? state.u1 : state.u2;
    const double p = (k == 1) ? state.p1 : state.p2;

    // Merged block limits from all bits except the one at position i.
    int left = 0;
    for (int j = i - 1; j >= 1; --j)
        if (u.bits[static_cast<std::size_t>(j) - 1] == 0) { left = j; break; }
    int right = n;
    for (int j = i + 1; j <= n - 1; ++j)
        if (u.bits[static_cast<std::size_t>(j) - 1] == 0) { right = j; break; }

    const bool merged_last = (right == n);
    auto marginal = [&](int lo, int hi) {
        if (k == 1) return log_marginal_mean_cluster(x, lo, hi, state.theta.sigma2, hyper);
        return log_marginal_var_cluster(x, lo, hi, state.theta.mu, hyper);
    };
    const double merged = marginal(left + 1, right) + log_cohesion_yao(right - left, p, merged_last);
    const double split = marginal(left + 1, i) + log_cohesion_yao(i - left, p, false) +
                         marginal(i + 1, right) + log_cohesion_yao(right - i, p, merged_last);
    return merged - split;
}

namespace detail {

// Shared sweep driver. log_marg(lo, hi) must evaluate the collapsed block
// marginal for the scanned parameter; bits are updated in place, with the
// decision at position i conditioned on the already-updated earlier bits and
// the pre-sweep later bits.
template <typename LogMarginal>
inline void indicator_sweep(std::vector<std::uint8_t>& bits, int n, double p,
                            LogMarginal&& log_marg, RngStream& rng) {
    const std::vector<int> next = next_change_table(bits, n);
    const double log_odds_keep = std::log1p(-p) - std::log(p);
    int left = 0;
    for (int i = 1; i <= n - 1; ++i) {
        const int right = next[static_cast<std::size_t>(i) + 1];
        const double log_r = log_marg(left + 1, right) - log_marg(left + 1, i) -
                             log_marg(i + 1, right) + log_odds_keep;
        const double u = rng.uniform_pos();
        const std::uint8_t bit = (std::log(u) - std::log1p(-u) <= log_r) ? 1 : 0;
        bits[static_cast<std::size_t>(i) - 1] = bit;
        if (bit == 0) left = i;
    }
}

} // namespace detail

/// One full scan of the k-th indicator vector with the k-th cluster
/// parameters integrated out. Positions 1..n-1 are visited in order.
inline void update_indicators_scan(int k, ModelState& state, const ChainContext& cx,
                                   RngStream& rng) {
    const int n = static_cast<int>(cx.x.size());
    if (k == 1) {
        const detail::VarLayout vl = detail::VarLayout::from_state(state.u2, state.theta.sigma2);
        auto log_marg = [&](int lo, int hi) {
            return detail::mean_terms_fast(cx.px, lo, hi, vl).log_marginal(cx.hyper);
        };
        detail::indicator_sweep(state.u1.bits, n, state.p1, log_marg, rng);
    } else if (k == 2) {
        std::vector<double> res(cx.x.size());
        for (std::size_t i = 0; i < res.size(); ++i) {
            const double r = cx.x[i] - state.theta.mu[i];
            res[i] = r * r;
        }
        const PrefixStats pr{std::span<const double>(res)};
        auto log_marg = [&](int lo, int hi) {
            const RangeStats rs = pr.range(lo, hi);
            return log_marginal_var_core(rs.count, rs.sum, cx.hyper);
        };
        detail::indicator_sweep(state.u2.bits, n, state.p2, log_marg, rng);
    } else {
        throw std::invalid_argument("update_indicators_scan: k must be 1 or 2");
    }
}

/// Redraw every cluster parameter of the k-th partition from its full
/// conditional and expand to the per-instant vector.
inline void redraw_cluster_params(int k, ModelState& state, const ChainContext& cx,
                                  RngStream& rng) {
    if (k == 1) {
        const Partition rho1 = partition_from_indicators(state.u1);
        const detail::VarLayout vl = detail::VarLayout::from_state(state.u2, state.theta.sigma2);
        for (int j = 1; j <= rho1.block_count(); ++j) {
            const MeanClusterTerms terms =
                detail::mean_terms_fast(cx.px, rho1.block_first(j), rho1.block_last(j), vl);
            const double mu = terms.sample_mu(cx.hyper, rng);
            for (int i = rho1.block_first(j); i <= rho1.block_last(j); ++i)
                state.theta.mu[static_cast<std::size_t>(i) - 1] = mu;
        }
    } else if (k == 2) {
        const Partition rho2 = partition_from_indicators(state.u2);
        for (int j = 1; j <= rho2.block_count(); ++j) {
            const int lo = rho2.block_first(j), hi = rho2.block_last(j);
            const double ss = residual_sumsq(cx.x, lo, hi, state.theta.mu);
            const double s2 =
                rng.inv_gamma((static_cast<double>(hi - lo + 1) + cx.hyper.d) / 2.0,
                              (ss + cx.hyper.a) / 2.0);
            for (int i = lo; i <= hi; ++i)
                state.theta.sigma2[static_cast<std::size_t>(i) - 1] = s2;
        }
    } else {
        throw std::invalid_argument("redraw_cluster_params: k must be 1 or 2");
    }
}

/// One partially collapsed sweep. The order is load-bearing:
/// p draws, then for each parameter its indicator scan immediately followed
/// by the cluster-parameter redraw. The scanned parameter is integrated out
/// during its own scan and must be refreshed before the next scan uses it.
inline void gibbs_iteration(ModelState& state, const ChainContext& cx, RngStream& rng) {
    const int n = static_cast<int>(cx.x.size());
    const int b1 = partition_from_indicators(state.u1).block_count();
    const int b2 = partition_from_indicators(state.u2).block_count();
    state.p1 = sample_p(b1, n, cx.yao1.alpha, cx.yao1.beta, rng);
    state.p2 = sample_p(b2, n, cx.yao2.alpha, cx.yao2.beta, rng);
    update_indicators_scan(1, state, cx, rng);
    redraw_cluster_params(1, state, cx, rng);
    update_indicators_scan(2, state, cx, rng);
    redraw_cluster_params(2, state, cx, rng);
}

/// Fresh starting state: indicators all ones (single block per parameter)
/// or all zeros, one prior draw per initial block, p at its prior mean.
inline ModelState initial_state(int n, const NormalHyper& hyper, const YaoPrior& yao1,
                                const YaoPrior& yao2, InitMode init, RngStream& rng) {
    const std::uint8_t fill = (init == InitMode::none_changed) ? 1 : 0;
    ModelState st;
    st.u1 = ChangeIndicators(n, std::vector<std::uint8_t>(static_cast<std::size_t>(n - 1), fill));
    st.u2 = ChangeIndicators(n, std::vector<std::uint8_t>(static_cast<std::size_t>(n - 1), fill));
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
    st.p1 = yao1.alpha / (yao1.alpha + yao1.beta);
    st.p2 = yao2.alpha / (yao2.alpha + yao2.beta);
    return st;
}

inline SampleDraw record_draw(const ModelState& state) {
    SampleDraw d;
    d.u1 = state.u1.bits;
    d.u2 = state.u2.bits;
    const Partition rho1 = partition_from_indicators(state.u1);
    for (int j = 1; j <= rho1.block_count(); ++j)
        d.mu_star.push_back(state.theta.mu[static_cast<std::size_t>(rho1.block_first(j)) - 1]);
    const Partition rho2 = partition_from_indicators(state.u2);
    for (int j = 1; j <= rho2.block_count(); ++j)
        d.s2_star.push_back(state.theta.sigma2[static_cast<std::size_t>(rho2.block_first(j)) - 1]);
    d.p1 = state.p1;
    d.p2 = state.p2;
    return d;
}

/// Run one chain: warmup + iterations sweeps, retaining every thin-th
/// post-warmup state. Fully deterministic given the seed.
inline PosteriorSamples run_chain(std::span<const double> x, const NormalHyper& hyper,
                                  const YaoPrior& yao1, const YaoPrior& yao2,
                                  const McmcConfig& cfg) {
    cfg.validate();
    const ChainContext cx(x, hyper, yao1, yao2);
    RngStream rng(cfg.seed);
    const int n = static_cast<int>(x.size());
    ModelState state = initial_state(n, hyper, yao1, yao2, cfg.init, rng);

    PosteriorSamples out;
    out.n = n;
    out.draws.reserve(static_cast<std::size_t>(cfg.iterations / cfg.thin));
    for (long t = 1; t <= cfg.warmup + cfg.iterations; ++t) {
        gibbs_iteration(state, cx, rng);
        if (t > cfg.warmup && (t - cfg.warmup) % cfg.thin == 0)
            out.draws.push_back(record_draw(state));
    }
    return out;
}

} // namespace bmcp

#endif
