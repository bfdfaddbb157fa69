#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "bmcp/partition.hpp"
#include "bmcp/rng.hpp"
#include "support/enumeration.hpp"
#include "support/quadrature.hpp"

using namespace bmcp;
using Catch::Approx;

TEST_CASE("indicator / end point conversions") {
    CHECK(partition_from_indicators(ChangeIndicators(5, {1, 1, 1, 1})).endpoints ==
          std::vector<int>{0, 5});
    CHECK(partition_from_indicators(ChangeIndicators(5, {0, 0, 0, 0})).endpoints ==
          std::vector<int>{0, 1, 2, 3, 4, 5});

    // three interior zeros at 0-based 24, 49, 74
    std::vector<std::uint8_t> bits(99, 1);
    bits[24] = bits[49] = bits[74] = 0;
    CHECK(partition_from_indicators(ChangeIndicators(100, bits)).endpoints ==
          std::vector<int>{0, 25, 50, 75, 100});

    CHECK(indicators_from_partition(Partition(5, {0, 5})).bits ==
          std::vector<std::uint8_t>{1, 1, 1, 1});
    CHECK(indicators_from_partition(Partition(5, {0, 1, 5})).bits ==
          std::vector<std::uint8_t>{0, 1, 1, 1});
    CHECK(indicators_from_partition(Partition(100, {0, 25, 50, 75, 100})).bits == bits);
}

TEST_CASE("round trip is the identity for every partition of n <= 12") {
    for (int n = 2; n <= 12; ++n) {
        for (const auto& p : bmcp_tests::all_partitions(n)) {
            CHECK(partition_from_indicators(indicators_from_partition(p)) == p);
        }
    }
}

TEST_CASE("cohesion values") {
    CHECK(log_cohesion_yao(4, 0.5, false) == Approx(std::log(0.0625)).epsilon(1e-12));
    CHECK(log_cohesion_yao(1, 0.3, true) == Approx(0.0).margin(1e-15));
    CHECK(log_cohesion_yao(3, 0.2, false) == Approx(std::log(0.128)).epsilon(1e-12));
    CHECK_THROWS_AS(log_cohesion_yao(0, 0.5, false), std::invalid_argument);
    CHECK_THROWS_AS(log_cohesion_yao(3, 1.0, false), std::invalid_argument);
    CHECK_THROWS_AS(log_cohesion_yao(3, 0.0, false), std::invalid_argument);
}

TEST_CASE("partition prior given p") {
    CHECK(log_partition_prior_given_p(Partition(5, {0, 5}), 0.5) ==
          Approx(std::log(0.0625)).epsilon(1e-12));
    CHECK(log_partition_prior_given_p(Partition(5, {0, 1, 2, 3, 4, 5}), 0.5) ==
          Approx(std::log(0.0625)).epsilon(1e-12));
}

TEST_CASE("prior equals the cohesion product over blocks, exactly") {
    RngStream rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        const int n = 2 + static_cast<int>(rng.raw() % 40);
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(n - 1));
        for (auto& b : bits) b = rng.bernoulli(0.5) ? 1 : 0;
        const Partition p = partition_from_indicators(ChangeIndicators(n, bits));
        const double prob = 0.05 + 0.9 * rng.uniform();
        double coh = 0.0;
        for (int j = 1; j <= p.block_count(); ++j)
            coh += log_cohesion_yao(p.block_size(j), prob, j == p.block_count());
        CHECK(log_partition_prior_given_p(p, prob) == Approx(coh).margin(1e-12));
    }
}

TEST_CASE("prior normalizes over all partitions for n <= 12") {
    for (int n : {2, 3, 5, 8, 12}) {
        for (double p : {0.1, 0.5, 0.9}) {
            double total = 0.0;
            for (const auto& part : bmcp_tests::all_partitions(n))
                total += std::exp(log_partition_prior_given_p(part, p));
            CHECK(total == Approx(1.0).margin(1e-10));
        }
    }
}

TEST_CASE("degenerate single-block partition") {
    const Partition p(7, {0, 7});
    CHECK(p.block_count() == 1);
    CHECK(p.num_changes() == 0);
    // only the last-block cohesion factor remains
    CHECK(log_partition_prior_given_p(p, 0.3) ==
          Approx(log_cohesion_yao(7, 0.3, true)).margin(1e-12));
}

TEST_CASE("induced partition") {
    const Partition a(100, {0, 25, 50, 75, 100});
    const Partition b(100, {0, 100});
    CHECK(induced_partition({a, b}) == a);

    const Partition c(300, {0, 60, 120, 180, 240, 300});
    const Partition d(300, {0, 150, 300});
    CHECK(induced_partition({c, d}).endpoints ==
          std::vector<int>{0, 60, 120, 150, 180, 240, 300});

    CHECK(induced_partition({c}) == c);
    // idempotent, commutative, associative
    CHECK(induced_partition({c, c}) == c);
    CHECK(induced_partition({c, d}) == induced_partition({d, c}));
    const Partition e(300, {0, 10, 300});
    CHECK(induced_partition({induced_partition({c, d}), e}) ==
          induced_partition({c, induced_partition({d, e})}));

    CHECK_THROWS_AS(induced_partition({a, c}), std::invalid_argument);
}

TEST_CASE("beta-binomial pmf") {
    SECTION("uniform when alpha = beta = 1") {
        for (int n : {3, 17, 2000})
            for (int c : {0, 1, n - 2, n - 1})
                CHECK(beta_binomial_pmf(c, n, 1.0, 1.0) == Approx(1.0 / n).epsilon(1e-10));
    }
    SECTION("matches direct quadrature of Binomial(2,p) against Beta(2,2)") {
        auto integrand = [](double p) {
            const double binom = 2.0 * p * (1.0 - p); // C(2,1) p (1-p)
            const double beta_pdf = p * (1.0 - p) / (1.0 / 6.0);
            return binom * beta_pdf;
        };
        const double expected = bmcp_tests::detail::simpson_plain(integrand, 0.0, 1.0, 4096);
        CHECK(beta_binomial_pmf(1, 3, 2.0, 2.0) == Approx(expected).epsilon(1e-9));
    }
    SECTION("normalizes") {
        for (auto [n, a, b] : std::vector<std::tuple<int, double, double>>{
                 {50, 1.0, 1.0}, {50, 2.0, 18.0}, {100, 5.0, 5.0}, {2000, 0.3, 7.7}}) {
            double total = 0.0;
            for (int c = 0; c <= n - 1; ++c) total += beta_binomial_pmf(c, n, a, b);
            CHECK(total == Approx(1.0).margin(1e-12));
        }
    }
    SECTION("out of range mass is zero") {
        CHECK(beta_binomial_pmf(-1, 10, 1, 1) == 0.0);
        CHECK(beta_binomial_pmf(10, 10, 1, 1) == 0.0);
    }
}

TEST_CASE("prior moments of the number of changes") {
    const Moments m = prior_n_moments(100, 1.0, 1.0);
    CHECK(m.mean == Approx(49.5).epsilon(1e-12));

    SECTION("match simulation from the pmf-implied sampler") {
        // p ~ Beta(a,b), then N counts n-1 Bernoulli(p) changes
        RngStream rng(99);
        const int n = 50;
        const double a = 2.0, b = 18.0;
        const long draws = 100000;
        double s = 0.0, s2 = 0.0;
        for (long t = 0; t < draws; ++t) {
            const double p = rng.beta(a, b);
            int cnt = 0;
            for (int i = 0; i < n - 1; ++i) cnt += rng.bernoulli(p) ? 1 : 0;
            s += cnt;
            s2 += static_cast<double>(cnt) * cnt;
        }
        const double mean = s / draws;
        const double var = s2 / draws - mean * mean;
        const Moments mm = prior_n_moments(n, a, b);
        const double se_mean = std::sqrt(mm.variance / draws);
        CHECK(std::abs(mean - mm.mean) < 3.0 * se_mean);
        CHECK(std::abs(var - mm.variance) / mm.variance < 0.05);
    }

    SECTION("variance limit as alpha grows, with beta = alpha L") {
        const int n = 100;
        const double c = 10.0;
        const double L = (n - 1.0 - c) / c;
        const double limit = c * (n - 1.0 - c) / (n - 1.0);
        const Moments big = prior_n_moments(n, 1e9, 1e9 * L);
        CHECK(big.mean == Approx(c).epsilon(1e-9));
        CHECK(big.variance == Approx(limit).epsilon(1e-6));
    }
}

TEST_CASE("beta elicitation") {
    CHECK(elicit_beta(100, 49.5, 1.0) == Approx(1.0).epsilon(1e-12));
    CHECK(elicit_beta(101, 10.0, 2.0) == Approx(18.0).epsilon(1e-12));
    CHECK_THROWS_AS(elicit_beta(100, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(elicit_beta(100, 99.0, 1.0), std::invalid_argument);

    SECTION("the implied prior variance decreases in alpha for n >= 3") {
        for (int n : {3, 10, 250}) {
            const double c = (n - 1) / 3.0;
            double prev = std::numeric_limits<double>::infinity();
            for (double alpha : {0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 100.0}) {
                const double beta = elicit_beta(n, c, alpha);
                const Moments m = prior_n_moments(n, alpha, beta);
                CHECK(m.mean == Approx(c).epsilon(1e-9));
                CHECK(m.variance < prev);
                prev = m.variance;
            }
        }
    }
}

TEST_CASE("moments of the induced number of changes") {
    SECTION("single partition reduces to the Beta-Binomial moments") {
        const double a[] = {2.0};
        const double b[] = {5.0};
        const Moments got = induced_changes_moments(40, a, b);
        const Moments want = prior_n_moments(40, 2.0, 5.0);
        CHECK(got.mean == Approx(want.mean).epsilon(1e-12));
        CHECK(got.variance == Approx(want.variance).epsilon(1e-12));
    }
    SECTION("two partitions match joint prior simulation") {
        const int n = 5;
        const double al[] = {1.0, 1.0};
        const double be[] = {1.0, 1.0};
        const Moments want = induced_changes_moments(n, al, be);
        RngStream rng(7);
        const long draws = 100000;
        double s = 0.0, s2 = 0.0;
        for (long t = 0; t < draws; ++t) {
            const double p1 = rng.beta(1.0, 1.0);
            const double p2 = rng.beta(1.0, 1.0);
            int cnt = 0;
            for (int i = 0; i < n - 1; ++i) {
                const bool change = rng.bernoulli(p1) || rng.bernoulli(p2);
                cnt += change ? 1 : 0;
            }
            s += cnt;
            s2 += static_cast<double>(cnt) * cnt;
        }
        const double mean = s / draws;
        const double var = s2 / draws - mean * mean;
        CHECK(std::abs(mean - want.mean) < 3.0 * std::sqrt(want.variance / draws));
        CHECK(std::abs(var - want.variance) / want.variance < 0.05);
    }
    SECTION("mean never exceeds n-1") {
        RngStream rng(3);
        for (int rep = 0; rep < 100; ++rep) {
            const int n = 2 + static_cast<int>(rng.raw() % 60);
            std::vector<double> a(1 + rng.raw() % 4), b(a.size());
            for (std::size_t k = 0; k < a.size(); ++k) {
                a[k] = 0.1 + 5.0 * rng.uniform();
                b[k] = 0.1 + 5.0 * rng.uniform();
            }
            const Moments m = induced_changes_moments(n, a, b);
            CHECK(m.mean <= n - 1.0 + 1e-12);
            CHECK(m.variance >= 0.0);
        }
    }
}

TEST_CASE("empirical law of N matches the Beta-Binomial pmf") {
    RngStream rng(2024);
    for (auto [n, a, b] : std::vector<std::tuple<int, double, double>>{
             {50, 1.0, 1.0}, {50, 2.0, 18.0}, {100, 5.0, 5.0}}) {
        const long draws = 100000;
        std::vector<double> emp(static_cast<std::size_t>(n), 0.0);
        for (long t = 0; t < draws; ++t) {
            const double p = rng.beta(a, b);
            int cnt = 0;
            for (int i = 0; i < n - 1; ++i) cnt += rng.bernoulli(p) ? 1 : 0;
            emp[static_cast<std::size_t>(cnt)] += 1.0 / draws;
        }
        std::vector<double> pmf(static_cast<std::size_t>(n));
        for (int c = 0; c < n; ++c) pmf[static_cast<std::size_t>(c)] = beta_binomial_pmf(c, n, a, b);
        CHECK(bmcp_tests::total_variation(emp, pmf) < 0.01);
    }
}
