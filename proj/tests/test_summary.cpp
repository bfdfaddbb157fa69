#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "bmcp/rng.hpp"
#include "bmcp/summary.hpp"

using namespace bmcp;
using Catch::Approx;

namespace {

SampleDraw make_draw(std::vector<std::uint8_t> u1, std::vector<double> mu,
                     std::vector<std::uint8_t> u2, std::vector<double> s2, double p1 = 0.1,
                     double p2 = 0.1) {
    SampleDraw d;
    d.u1 = std::move(u1);
    d.mu_star = std::move(mu);
    d.u2 = std::move(u2);
    d.s2_star = std::move(s2);
    d.p1 = p1;
    d.p2 = p2;
    return d;
}

} // namespace

TEST_CASE("product estimates") {
    PosteriorSamples s;
    s.n = 4;
    s.draws.push_back(make_draw({1, 0, 1}, {1.0, 5.0}, {1, 1, 1}, {2.0}));
    SECTION("a single draw is returned as-is") {
        const ProductEstimates pe = product_estimates(s);
        CHECK(pe.mu_mean == std::vector<double>{1.0, 1.0, 5.0, 5.0});
        CHECK(pe.s2_mean == std::vector<double>{2.0, 2.0, 2.0, 2.0});
    }
    SECTION("two draws average to the midpoint") {
        s.draws.push_back(make_draw({1, 1, 1}, {3.0}, {1, 1, 1}, {4.0}));
        const ProductEstimates pe = product_estimates(s);
        CHECK(pe.mu_mean == std::vector<double>{2.0, 2.0, 4.0, 4.0});
        CHECK(pe.s2_mean == std::vector<double>{3.0, 3.0, 3.0, 3.0});
    }
    SECTION("empty samples are rejected") {
        PosteriorSamples empty;
        empty.n = 4;
        CHECK_THROWS_AS(product_estimates(empty), std::invalid_argument);
    }
}

TEST_CASE("change probabilities") {
    PosteriorSamples s;
    s.n = 26;
    std::vector<std::uint8_t> bits(25, 1);
    bits[24] = 0; // end point at instant 25
    for (int t = 0; t < 8; ++t)
        s.draws.push_back(make_draw(bits, {0.0, 1.0}, std::vector<std::uint8_t>(25, 1), {1.0}));

    const std::vector<double> prob = change_probabilities(s, 1);
    REQUIRE(prob.size() == 25);
    CHECK(prob[24] == 1.0);
    for (int i = 0; i < 24; ++i) CHECK(prob[static_cast<std::size_t>(i)] == 0.0);

    SECTION("equals one minus the bit mean, exactly") {
        RngStream rng(101);
        PosteriorSamples r;
        r.n = 6;
        for (int t = 0; t < 50; ++t) {
            std::vector<std::uint8_t> b(5);
            std::vector<double> stars;
            for (auto& v : b) v = rng.bernoulli(0.5) ? 1 : 0;
            const int blocks = 1 + static_cast<int>(std::count(b.begin(), b.end(), 0));
            stars.assign(static_cast<std::size_t>(blocks), 1.0);
            r.draws.push_back(make_draw(b, stars, std::vector<std::uint8_t>(5, 1), {1.0}));
        }
        const auto p = change_probabilities(r, 1);
        for (int i = 0; i < 5; ++i) {
            double bitmean = 0.0;
            for (const auto& d : r.draws) bitmean += d.u1[static_cast<std::size_t>(i)];
            bitmean /= static_cast<double>(r.draws.size());
            CHECK(p[static_cast<std::size_t>(i)] == 1.0 - bitmean);
        }
    }
    SECTION("k out of range") {
        CHECK_THROWS_AS(change_probabilities(s, 3), std::invalid_argument);
    }
}

TEST_CASE("most likely partitions") {
    PosteriorSamples s;
    s.n = 4;
    // three draws of {0,2,4}, one of {0,4}
    for (int t = 0; t < 3; ++t)
        s.draws.push_back(make_draw({1, 0, 1}, {0.0, 1.0}, {1, 1, 1}, {1.0}));
    s.draws.push_back(make_draw({1, 1, 1}, {0.0}, {1, 1, 1}, {1.0}));

    const auto top = most_likely_partition(s, 1, 5);
    REQUIRE(top.size() == 2);
    CHECK(top[0].first.endpoints == std::vector<int>{0, 2, 4});
    CHECK(top[0].second == Approx(0.75));
    CHECK(top[1].second == Approx(0.25));
    double total = 0.0;
    for (const auto& [p, pr] : top) total += pr;
    CHECK(total <= 1.0 + 1e-12);

    SECTION("degenerate chain concentrates at probability one") {
        PosteriorSamples stuck;
        stuck.n = 3;
        for (int t = 0; t < 5; ++t)
            stuck.draws.push_back(make_draw({0, 1}, {0.0, 1.0}, {1, 1}, {1.0}));
        const auto one = most_likely_partition(stuck, 1, 2);
        REQUIRE(one.size() == 1);
        CHECK(one[0].second == 1.0);
    }
    SECTION("ties break lexicographically") {
        PosteriorSamples tie;
        tie.n = 3;
        tie.draws.push_back(make_draw({0, 1}, {0.0, 1.0}, {1, 1}, {1.0}));
        tie.draws.push_back(make_draw({1, 0}, {0.0, 1.0}, {1, 1}, {1.0}));
        const auto t2 = most_likely_partition(tie, 1, 2);
        CHECK(t2[0].first.endpoints == std::vector<int>{0, 1, 3});
        CHECK(t2[1].first.endpoints == std::vector<int>{0, 2, 3});
    }
}

TEST_CASE("posterior pmf of the number of changes") {
    PosteriorSamples s;
    s.n = 4;
    for (int t = 0; t < 2; ++t)
        s.draws.push_back(make_draw({1, 0, 1}, {0.0, 1.0}, {1, 1, 1}, {1.0}));
    s.draws.push_back(make_draw({0, 0, 0}, {0.0, 1.0, 2.0, 3.0}, {1, 1, 1}, {1.0}));

    const auto pmf = n_changes_posterior(s, 1);
    REQUIRE(pmf.size() == 4);
    CHECK(pmf[1] == Approx(2.0 / 3.0));
    CHECK(pmf[3] == Approx(1.0 / 3.0));
    CHECK(std::accumulate(pmf.begin(), pmf.end(), 0.0) == Approx(1.0).margin(1e-12));
}

TEST_CASE("highest posterior density interval") {
    SECTION("all draws equal") {
        std::vector<double> d(10, 2.5);
        const auto [lo, hi] = hpd_interval(d, 0.9);
        CHECK(lo == 2.5);
        CHECK(hi == 2.5);
    }
    SECTION("uniform draws give width about the level") {
        RngStream rng(102);
        std::vector<double> d(100000);
        for (auto& v : d) v = rng.uniform();
        const auto [lo, hi] = hpd_interval(d, 0.9);
        CHECK(hi - lo == Approx(0.9).margin(0.02));
        CHECK(lo >= 0.0);
        CHECK(hi <= 1.0);
    }
    SECTION("interval sits inside the sample range and is short") {
        // bimodal-ish: mass near 0, a few outliers at 10
        std::vector<double> d;
        RngStream rng(103);
        for (int t = 0; t < 95; ++t) d.push_back(rng.normal(0.0, 0.1));
        for (int t = 0; t < 5; ++t) d.push_back(10.0 + rng.normal(0.0, 0.1));
        const auto [lo, hi] = hpd_interval(d, 0.9);
        CHECK(lo >= -1.0);
        CHECK(hi <= 1.0); // excludes the outlier cloud
    }
    SECTION("empty input is an error") {
        std::vector<double> none;
        CHECK_THROWS_AS(hpd_interval(none, 0.9), std::invalid_argument);
    }
}

TEST_CASE("summary report invariants") {
    RngStream rng(104);
    PosteriorSamples s;
    s.n = 8;
    for (int t = 0; t < 40; ++t) {
        std::vector<std::uint8_t> u1(7), u2(7);
        for (auto& b : u1) b = rng.bernoulli(0.7) ? 1 : 0;
        for (auto& b : u2) b = rng.bernoulli(0.9) ? 1 : 0;
        const int b1 = 1 + static_cast<int>(std::count(u1.begin(), u1.end(), 0));
        const int b2 = 1 + static_cast<int>(std::count(u2.begin(), u2.end(), 0));
        std::vector<double> mu(static_cast<std::size_t>(b1));
        std::vector<double> s2(static_cast<std::size_t>(b2));
        for (auto& v : mu) v = rng.normal(0.0, 1.0);
        for (auto& v : s2) v = 0.5 + rng.uniform();
        s.draws.push_back(make_draw(u1, mu, u2, s2, rng.uniform(), rng.uniform()));
    }
    const SummaryReport rep = summarize_samples(s, "bmcp", 3);
    CHECK(rep.n == 8);
    CHECK(rep.draw_count == 40);
    CHECK(std::accumulate(rep.n1_pmf.begin(), rep.n1_pmf.end(), 0.0) == Approx(1.0).margin(1e-9));
    CHECK(std::accumulate(rep.n2_pmf.begin(), rep.n2_pmf.end(), 0.0) == Approx(1.0).margin(1e-9));
    CHECK(std::accumulate(rep.n_star_pmf.begin(), rep.n_star_pmf.end(), 0.0) ==
          Approx(1.0).margin(1e-9));
    for (std::size_t i = 0; i < rep.mu_mean.size(); ++i) {
        CHECK(rep.mu_hpd_lo[i] <= rep.mu_hpd_hi[i]);
        CHECK(rep.s2_hpd_lo[i] <= rep.s2_hpd_hi[i]);
        CHECK(rep.mu_hpd_lo[i] <= rep.mu_mean[i] + 1e-12);
        CHECK(rep.mu_hpd_hi[i] >= rep.mu_mean[i] - 1e-12);
    }
    for (double p : rep.change_prob1) {
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
    CHECK(rep.top_rho1.size() <= 3);

    SECTION("induced partition refines both per-parameter partitions") {
        for (const auto& d : s.draws) {
            const auto star = induced_bits(d);
            for (std::size_t i = 0; i < star.size(); ++i) {
                if (d.u1[i] == 0 || d.u2[i] == 0) CHECK(star[i] == 0);
                if (d.u1[i] == 1 && d.u2[i] == 1) CHECK(star[i] == 1);
            }
        }
    }
}
