#ifndef BMCP_PARTITION_HPP
#define BMCP_PARTITION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace bmcp {

/// Contiguous partition of the time axis {1,...,n}, stored as the ordered
/// end points 0 = e_0 < e_1 < ... < e_b = n. Block j (1-based) covers the
/// 1-based time indices {e_{j-1}+1, ..., e_j}.
struct Partition {
    int n = 0;
    std::vector<int> endpoints; // includes 0 and n

    Partition() = default;
    Partition(int n_, std::vector<int> eps) : n(n_), endpoints(std::move(eps)) { validate(); }

    void validate() const {
        if (n < 1) throw std::invalid_argument("Partition: n must be >= 1");
        if (endpoints.size() < 2 || endpoints.front() != 0 || endpoints.back() != n)
            throw std::invalid_argument("Partition: endpoints must start at 0 and end at n");
        for (std::size_t j = 1; j < endpoints.size(); ++j)
            if (endpoints[j] <= endpoints[j - 1])
                throw std::invalid_argument("Partition: endpoints must be strictly increasing");
    }

    int block_count() const { return static_cast<int>(endpoints.size()) - 1; }
    int num_changes() const { return block_count() - 1; }
    /// First 1-based index of block j (1-based j).
    int block_first(int j) const { return endpoints[static_cast<std::size_t>(j) - 1] + 1; }
    /// Last 1-based index of block j.
    int block_last(int j) const { return endpoints[static_cast<std::size_t>(j)]; }
    int block_size(int j) const { return block_last(j) - block_first(j) + 1; }

    bool operator==(const Partition& o) const { return n == o.n && endpoints == o.endpoints; }
    bool operator<(const Partition& o) const { return endpoints < o.endpoints; }
};

/// Binary representation of a partition: bits[i] (0-based i = 0..n-2) refers
/// to the 1-based pair (i+1, i+2); bits[i] = 1 means no change between them,
/// bits[i] = 0 means i+1 is an interior end point.
struct ChangeIndicators {
    int n = 0;
    std::vector<std::uint8_t> bits; // length n-1

    ChangeIndicators() = default;
    ChangeIndicators(int n_, std::vector<std::uint8_t> b) : n(n_), bits(std::move(b)) { validate(); }

    void validate() const {
        if (n < 1) throw std::invalid_argument("ChangeIndicators: n must be >= 1");
        if (bits.size() != static_cast<std::size_t>(n - 1))
            throw std::invalid_argument("ChangeIndicators: bits must have length n-1");
        for (auto b : bits)
            if (b != 0 && b != 1) throw std::invalid_argument("ChangeIndicators: bits must be 0/1");
    }
};

inline Partition partition_from_indicators(const ChangeIndicators& u) {
    u.validate();
    std::vector<int> eps;
    eps.reserve(u.bits.size() + 2);
    eps.push_back(0);
    for (int i = 1; i < u.n; ++i)
        if (u.bits[static_cast<std::size_t>(i - 1)] == 0) eps.push_back(i);
    eps.push_back(u.n);
    return Partition(u.n, std::move(eps));
}

inline ChangeIndicators indicators_from_partition(const Partition& p) {
    p.validate();
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(p.n - 1), 1);
    for (std::size_t j = 1; j + 1 < p.endpoints.size(); ++j)
        bits[static_cast<std::size_t>(p.endpoints[j]) - 1] = 0;
    return ChangeIndicators(p.n, std::move(bits));
}

/// Common refinement of several partitions over the same axis: the union of
/// all end points.
inline Partition induced_partition(std::span<const Partition> rhos) {
    if (rhos.empty()) throw std::invalid_argument("induced_partition: empty input");
    const int n = rhos.front().n;
    std::vector<int> eps;
    for (const auto& r : rhos) {
        if (r.n != n) throw std::invalid_argument("induced_partition: mismatched series lengths");
        eps.insert(eps.end(), r.endpoints.begin(), r.endpoints.end());
    }
    std::sort(eps.begin(), eps.end());
    eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
    return Partition(n, std::move(eps));
}

inline Partition induced_partition(std::initializer_list<Partition> rhos) {
    std::vector<Partition> v(rhos);
    return induced_partition(std::span<const Partition>(v));
}

/// Per-instant change probability p with its Beta(alpha, beta) prior.
/// p defaults to the prior mean; the sampler replaces it with posterior
/// draws each sweep.
struct YaoPrior {
    double alpha = 1.0;
    double beta = 1.0;
    double p = 0.5;

    YaoPrior() = default;
    YaoPrior(double a, double b) : alpha(a), beta(b), p(a / (a + b)) { validate(); }
    YaoPrior(double a, double b, double p0) : alpha(a), beta(b), p(p0) { validate(); }

    void validate() const {
        if (!(alpha > 0.0) || !(beta > 0.0))
            throw std::invalid_argument("YaoPrior: alpha and beta must be positive");
        if (!(p > 0.0 && p < 1.0))
            throw std::invalid_argument("YaoPrior: p must lie in (0,1)");
    }
};

/// log cohesion of one block: (1-p)^{size-1} p for interior blocks,
/// (1-p)^{size-1} for the block that ends at n.
inline double log_cohesion_yao(int block_size, double p, bool is_last_block) {
    if (block_size < 1) throw std::invalid_argument("log_cohesion_yao: block size must be >= 1");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("log_cohesion_yao: p must lie in (0,1)");
    double lp = static_cast<double>(block_size - 1) * std::log1p(-p);
    if (!is_last_block) lp += std::log(p);
    return lp;
}

/// log P(rho | p) = (b-1) log p + (n-b) log(1-p); the cohesion product over
/// blocks collapses to this, so the prior needs no normalizer.
inline double log_partition_prior_given_p(const Partition& rho, double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("log_partition_prior_given_p: p must lie in (0,1)");
    rho.validate();
    const int b = rho.block_count();
    return static_cast<double>(b - 1) * std::log(p) +
           static_cast<double>(rho.n - b) * std::log1p(-p);
}

inline double log_binomial_coefficient(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Beta-Binomial(n-1, alpha, beta) mass at c changes. Out-of-range c has
/// zero mass. Computed through log-gamma so it stays finite for n in the
/// thousands.
inline double beta_binomial_pmf(int c, int n, double alpha, double beta) {
    if (n < 2) throw std::invalid_argument("beta_binomial_pmf: n must be >= 2");
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("beta_binomial_pmf: alpha and beta must be positive");
    if (c < 0 || c > n - 1) return 0.0;
    const int m = n - 1;
    const double lp = log_binomial_coefficient(m, c) + std::lgamma(alpha + beta) +
                      std::lgamma(alpha + c) + std::lgamma(m + beta - c) - std::lgamma(alpha) -
                      std::lgamma(beta) - std::lgamma(alpha + beta + m);
    return std::exp(lp);
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Prior mean and variance of the number of changes under the
/// Beta-Binomial(n-1, alpha, beta) law.
inline Moments prior_n_moments(int n, double alpha, double beta) {
    if (n < 2) throw std::invalid_argument("prior_n_moments: n must be >= 2");
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("prior_n_moments: alpha and beta must be positive");
    const double m = n - 1.0;
    const double s = alpha + beta;
    Moments out;
    out.mean = m * alpha / s;
    out.variance = m * alpha * beta * (s + m) / (s * s * (s + 1.0));
    return out;
}

/// Solve for beta so the prior expected number of changes equals
/// expected_changes: beta = alpha (n-1-c)/c.
inline double elicit_beta(int n, double expected_changes, double alpha) {
    if (n < 2) throw std::invalid_argument("elicit_beta: n must be >= 2");
    if (!(alpha > 0.0)) throw std::invalid_argument("elicit_beta: alpha must be positive");
    if (!(expected_changes > 0.0 && expected_changes < n - 1.0))
        throw std::invalid_argument("elicit_beta: expected_changes must lie in (0, n-1)");
    return alpha * (n - 1.0 - expected_changes) / expected_changes;
}

/// Moments of the number of changes in the induced partition when each of
/// the d per-parameter change probabilities has its own Beta prior.
inline Moments induced_changes_moments(int n, std::span<const double> alphas,
                                       std::span<const double> betas) {
    if (n < 2) throw std::invalid_argument("induced_changes_moments: n must be >= 2");
    if (alphas.size() != betas.size() || alphas.empty())
        throw std::invalid_argument("induced_changes_moments: hyperparameter lists must match");
    double prod_q = 1.0;   // prod E(1-p_k)
    double prod_q2 = 1.0;  // prod (E(1-p_k))^2
    double prod_m2 = 1.0;  // prod E((1-p_k)^2)
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        const double a = alphas[k], b = betas[k];
        if (!(a > 0.0) || !(b > 0.0))
            throw std::invalid_argument("induced_changes_moments: hyperparameters must be positive");
        const double s = a + b;
        const double q = b / s;
        prod_q *= q;
        prod_q2 *= q * q;
        prod_m2 *= q * q + a * b / (s * s * (s + 1.0));
    }
    const double m = n - 1.0;
    Moments out;
    out.mean = m * (1.0 - prod_q);
    out.variance = m * prod_q - m * m * prod_q2 + (m * m - m) * prod_m2;
    return out;
}

} // namespace bmcp

#endif
