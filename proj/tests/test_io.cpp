#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "bmcp/io.hpp"
#include "bmcp/simulate.hpp"

using namespace bmcp;
using Catch::Approx;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("bmcp_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void put(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

PosteriorSamples small_samples() {
    std::vector<double> x{0.1, -0.4, 2.2, 2.9, 3.4};
    NormalHyper h{0.0, 10.0, 0.5, 2.5};
    McmcConfig cfg;
    cfg.iterations = 40;
    cfg.warmup = 20;
    cfg.seed = 11;
    return run_chain(x, h, YaoPrior(1, 1), YaoPrior(1, 1), cfg);
}

} // namespace

TEST_CASE("series parsing") {
    TempDir t;
    SECTION("plain numbers") {
        put(t.file("a.csv"), "1.0\n2.5\n-3\n");
        CHECK(read_series_csv(t.file("a.csv")) == std::vector<double>{1.0, 2.5, -3.0});
    }
    SECTION("single header line is skipped") {
        put(t.file("b.csv"), "value\n1\n2\n");
        CHECK(read_series_csv(t.file("b.csv")) == std::vector<double>{1.0, 2.0});
    }
    SECTION("bad body line is reported with its line number") {
        put(t.file("c.csv"), "1\nx\n");
        try {
            read_series_csv(t.file("c.csv"));
            FAIL("expected data_error");
        } catch (const data_error& e) {
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SECTION("empty file is an error") {
        put(t.file("d.csv"), "");
        CHECK_THROWS_AS(read_series_csv(t.file("d.csv")), data_error);
        put(t.file("e.csv"), "header_only\n");
        CHECK_THROWS_AS(read_series_csv(t.file("e.csv")), data_error);
    }
    SECTION("missing file is an error") {
        CHECK_THROWS_AS(read_series_csv(t.file("nope.csv")), data_error);
    }
    SECTION("windows line endings are tolerated") {
        put(t.file("f.csv"), "value\r\n1.5\r\n2.5\r\n");
        CHECK(read_series_csv(t.file("f.csv")) == std::vector<double>{1.5, 2.5});
    }
}

TEST_CASE("configuration parsing") {
    TempDir t;
    SECTION("known keys parse") {
        put(t.file("ok.cfg"), "# priors\nmu0 = 0.5\nsigma0sq = 100\na = 0.1\nd = 2.1\n");
        const auto kv = parse_config_file(t.file("ok.cfg"));
        CHECK(kv.at("mu0") == 0.5);
        CHECK(kv.at("sigma0sq") == 100.0);
        CHECK(kv.size() == 4);
    }
    SECTION("unknown keys are errors, not warnings") {
        put(t.file("typo.cfg"), "sigma0 = 100\n");
        CHECK_THROWS_AS(parse_config_file(t.file("typo.cfg")), data_error);
    }
    SECTION("duplicate keys are errors") {
        put(t.file("dup.cfg"), "a = 1\na = 2\n");
        CHECK_THROWS_AS(parse_config_file(t.file("dup.cfg")), data_error);
    }
    SECTION("bad value is an error") {
        put(t.file("bad.cfg"), "a = fast\n");
        CHECK_THROWS_AS(parse_config_file(t.file("bad.cfg")), data_error);
    }
}

TEST_CASE("written outputs round-trip and repeat byte-identically") {
    const PosteriorSamples s = small_samples();
    const SummaryReport rep = summarize_samples(s, "bmcp", 4);

    TempDir t1, t2;
    write_outputs(rep, s, t1.path.string(), true);
    write_outputs(rep, s, t2.path.string(), true);

    for (const char* name : {"summary.json", "change_prob_mu.csv", "change_prob_sigma2.csv",
                             "product_estimates.csv", "samples.csv.gz"}) {
        CHECK(slurp(t1.file(name)) == slurp(t2.file(name)));
    }

    SECTION("product estimates parse back to the exact in-memory doubles") {
        std::ifstream in(t1.file("product_estimates.csv"));
        std::string line;
        std::getline(in, line);
        CHECK(line == "instant,mu_mean,mu_hpd_lo,mu_hpd_hi,s2_mean,s2_hpd_lo,s2_hpd_hi");
        std::size_t i = 0;
        while (std::getline(in, line)) {
            std::vector<std::string> f;
            std::size_t pos = 0;
            while (true) {
                const auto comma = line.find(',', pos);
                f.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
            REQUIRE(f.size() == 7);
            CHECK(std::stod(f[1]) == rep.mu_mean[i]);
            CHECK(std::stod(f[2]) == rep.mu_hpd_lo[i]);
            CHECK(std::stod(f[4]) == rep.s2_mean[i]);
            ++i;
        }
        CHECK(i == rep.mu_mean.size());
    }

    SECTION("summary.json carries the schema and normalized pmfs") {
        const auto j = nlohmann::json::parse(slurp(t1.file("summary.json")));
        CHECK(j.at("schema") == "bmcp-summary/1");
        CHECK(j.at("model") == "bmcp");
        CHECK(j.at("n") == s.n);
        double total = 0.0;
        for (double v : j.at("n_changes").at("mu")) total += v;
        CHECK(total == Approx(1.0).margin(1e-9));
        for (double v : j.at("change_prob").at("mu")) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        for (const auto& required :
             {"schema", "model", "n", "draws", "product_estimates", "change_prob", "n_changes",
              "top_partitions"}) {
            CHECK(j.contains(required));
        }
    }

    SECTION("samples archive restores the draws exactly") {
        const LoadedSamples back = read_samples_file(t1.file("samples.csv.gz"));
        CHECK(back.model == "bmcp");
        REQUIRE(back.samples.draw_count() == s.draw_count());
        CHECK(back.samples.n == s.n);
        for (std::size_t i = 0; i < s.draw_count(); ++i) {
            CHECK(back.samples.draws[i].u1 == s.draws[i].u1);
            CHECK(back.samples.draws[i].u2 == s.draws[i].u2);
            CHECK(back.samples.draws[i].mu_star == s.draws[i].mu_star);
            CHECK(back.samples.draws[i].s2_star == s.draws[i].s2_star);
            CHECK(back.samples.draws[i].p1 == s.draws[i].p1);
            CHECK(back.samples.draws[i].p2 == s.draws[i].p2);
        }
    }
}

TEST_CASE("samples text round trip is exact without compression too") {
    const PosteriorSamples s = small_samples();
    const std::string csv = samples_to_csv(s, "bmcp");
    const LoadedSamples back = samples_from_csv(csv);
    REQUIRE(back.samples.draw_count() == s.draw_count());
    for (std::size_t i = 0; i < s.draw_count(); ++i) {
        CHECK(back.samples.draws[i].mu_star == s.draws[i].mu_star);
        CHECK(back.samples.draws[i].p1 == s.draws[i].p1);
    }
}
