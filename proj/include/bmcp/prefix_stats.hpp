#ifndef BMCP_PREFIX_STATS_HPP
#define BMCP_PREFIX_STATS_HPP

#include <span>
#include <stdexcept>
#include <vector>

namespace bmcp {

struct RangeStats {
    long count = 0;
    double sum = 0.0;
    double sumsq = 0.0;
};

/// O(1) (count, sum, sum of squares) over any contiguous 1-based range of a
/// fixed series. The per-sweep ratio evaluations query this many times per
/// position, so block statistics must not be recomputed from raw data there.
class PrefixStats {
public:
    PrefixStats() = default;

    explicit PrefixStats(std::span<const double> x)
        : cum_(x.size() + 1, 0.0), cum2_(x.size() + 1, 0.0) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            cum_[i + 1] = cum_[i] + x[i];
            cum2_[i + 1] = cum2_[i] + x[i] * x[i];
        }
    }

    int size() const { return static_cast<int>(cum_.size()) - 1; }

    /// Stats over 1-based inclusive [lo, hi].
    RangeStats range(int lo, int hi) const {
        if (lo < 1 || hi > size() || lo > hi)
            throw std::invalid_argument("PrefixStats: range out of bounds");
        RangeStats r;
        r.count = hi - lo + 1;
        r.sum = cum_[static_cast<std::size_t>(hi)] - cum_[static_cast<std::size_t>(lo) - 1];
        r.sumsq = cum2_[static_cast<std::size_t>(hi)] - cum2_[static_cast<std::size_t>(lo) - 1];
        return r;
    }

private:
    std::vector<double> cum_, cum2_;
};

/// Reference path: recompute range stats directly from the data. Exists so
/// tests can pin the incremental path against it.
inline RangeStats direct_range_stats(std::span<const double> x, int lo, int hi) {
    if (lo < 1 || hi > static_cast<int>(x.size()) || lo > hi)
        throw std::invalid_argument("direct_range_stats: range out of bounds");
    RangeStats r;
    r.count = hi - lo + 1;
    for (int i = lo; i <= hi; ++i) {
        const double v = x[static_cast<std::size_t>(i) - 1];
        r.sum += v;
        r.sumsq += v * v;
    }
    return r;
}

} // namespace bmcp

#endif
