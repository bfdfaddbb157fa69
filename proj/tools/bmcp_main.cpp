// Command-line front end: fit real data, simulate scenario data, run Monte
// Carlo replications, or recompute summaries from a saved samples file.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "bmcp/bmcp.hpp"

namespace {

using bmcp::data_error;

struct CommonOpts {
    std::string model = "bmcp";
    std::string config_path;
    std::uint64_t seed = 1;
    long iters = 5000;
    long warmup = 5000;
    int thin = 1;
    std::string out_dir = ".";
    int top_k = 5;
    bool keep_samples = false;
    double prob_threshold = 0.5;
};

void add_mcmc_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--iters", o.iters, "retained iterations");
    cmd->add_option("--warmup", o.warmup, "warm-up iterations (discarded)");
    cmd->add_option("--thin", o.thin, "thinning interval");
    cmd->add_option("--out", o.out_dir, "output directory");
}

bmcp::McmcConfig mcmc_config(const CommonOpts& o) {
    bmcp::McmcConfig cfg;
    cfg.iterations = o.iters;
    cfg.warmup = o.warmup;
    cfg.thin = o.thin;
    cfg.seed = o.seed;
    return cfg;
}

// Assemble the per-model hyperparameters from defaults plus the config
// file, resolving the data-dependent defaults of the mean-only baseline.
bmcp::ModelConfig model_config(const CommonOpts& o, const std::vector<double>* data) {
    bmcp::ModelConfig mc;
    mc.model = bmcp::model_from_name(o.model);

    std::map<std::string, double> kv;
    if (!o.config_path.empty()) kv = bmcp::parse_config_file(o.config_path);
    auto get = [&](const char* key, double fallback) {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    };

    const double alpha1 = get("alpha1", 1.0), beta1 = get("beta1", 1.0);
    const double alpha2 = get("alpha2", 1.0), beta2 = get("beta2", 1.0);
    mc.yao1 = bmcp::YaoPrior(alpha1, beta1);
    mc.yao2 = bmcp::YaoPrior(alpha2, beta2);

    switch (mc.model) {
        case bmcp::Model::bmcp:
            mc.normal.mu0 = get("mu0", 0.0);
            mc.normal.sigma0sq = get("sigma0sq", 100.0);
            mc.normal.a = get("a", 0.1);
            mc.normal.d = get("d", 2.1);
            mc.normal.validate();
            break;
        case bmcp::Model::lcia05:
            mc.nig.m = get("m", 0.0);
            mc.nig.v = get("v", 2.0);
            mc.nig.a = get("a", 0.1);
            mc.nig.d = get("d", 2.1);
            mc.nig.validate();
            break;
        case bmcp::Model::bh93: {
            double mu0 = get("mu0", std::numeric_limits<double>::quiet_NaN());
            double s0 = get("sigma0sq", std::numeric_limits<double>::quiet_NaN());
            if ((std::isnan(mu0) || std::isnan(s0))) {
                if (data == nullptr || data->size() < 2)
                    throw data_error("bh93: mu0/sigma0sq defaults need input data");
                double mean = 0.0;
                for (double v : *data) mean += v;
                mean /= static_cast<double>(data->size());
                double var = 0.0;
                for (double v : *data) var += (v - mean) * (v - mean);
                var /= static_cast<double>(data->size() - 1);
                if (std::isnan(mu0)) mu0 = mean;
                if (std::isnan(s0)) s0 = var;
            }
            mc.bh93.mu0 = mu0;
            mc.bh93.sigma0sq = s0;
            mc.bh93.a = get("a", 0.1);
            mc.bh93.d = get("d", 2.1);
            mc.bh93.p_max = get("p_max", 0.05);
            mc.bh93.validate();
            break;
        }
    }
    return mc;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_banded_csv(const std::string& path, const bmcp::BandedCurve& c, int first_instant) {
    std::string s = "instant,mean,q05,q95\n";
    for (std::size_t i = 0; i < c.mean.size(); ++i)
        s += std::to_string(first_instant + static_cast<int>(i)) + ',' + fmt17(c.mean[i]) + ',' +
             fmt17(c.q05[i]) + ',' + fmt17(c.q95[i]) + '\n';
    bmcp::detail::write_file(path, s);
}

std::string endpoints_string(const bmcp::Partition& p) {
    std::string s;
    for (std::size_t i = 0; i < p.endpoints.size(); ++i) {
        if (i) s.push_back(';');
        s += std::to_string(p.endpoints[i]);
    }
    return s;
}

int cmd_fit(const CommonOpts& o, const std::string& input) {
    const std::vector<double> x = bmcp::read_series_csv(input);
    const bmcp::ModelConfig mc = model_config(o, &x);
    const bmcp::PosteriorSamples samples = bmcp::run_model(mc, x, mcmc_config(o));
    const bmcp::SummaryReport rep = bmcp::summarize_samples(samples, o.model, o.top_k);
    bmcp::write_outputs(rep, samples, o.out_dir, o.keep_samples);

    // instants whose mean-change probability clears the reporting threshold
    std::string flagged;
    for (std::size_t i = 0; i < rep.change_prob1.size(); ++i)
        if (rep.change_prob1[i] > o.prob_threshold) flagged += " " + std::to_string(i + 1);
    std::cout << "fit: model=" << o.model << " n=" << rep.n << " draws=" << rep.draw_count
              << "\n  mean changes with P > " << o.prob_threshold << ":"
              << (flagged.empty() ? " none" : flagged) << "\n  outputs in " << o.out_dir
              << std::endl;
    return 0;
}

int cmd_simulate(const CommonOpts& o, const std::string& scenario) {
    const bmcp::ScenarioSpec spec = bmcp::scenario_by_name(scenario);
    bmcp::RngStream rng(o.seed);
    const std::vector<double> x = bmcp::generate_series(spec, rng);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(o.out_dir, ec);
    std::string series = "value\n";
    for (double v : x) series += fmt17(v) + "\n";
    bmcp::detail::write_file(o.out_dir + "/series.csv", series);

    nlohmann::json truth;
    truth["scenario"] = spec.name;
    truth["n"] = spec.n;
    truth["seed"] = o.seed;
    truth["rho1"] = spec.rho1.endpoints;
    truth["rho2"] = spec.rho2.endpoints;
    truth["mu_star"] = spec.mu_star;
    truth["sigma2_star"] = spec.sigma2_star;
    bmcp::detail::write_file(o.out_dir + "/truth.json", truth.dump(2) + "\n");
    std::cout << "simulate: " << spec.name << " n=" << spec.n << " -> " << o.out_dir << std::endl;
    return 0;
}

int cmd_replicate(const CommonOpts& o, const std::string& scenario, int reps) {
    const bmcp::ScenarioSpec spec = bmcp::scenario_by_name(scenario);
    const bmcp::ModelConfig mc = model_config(o, nullptr);
    const bmcp::McReport report = bmcp::run_replications(mc, spec, reps, mcmc_config(o));

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(o.out_dir, ec);

    std::string rows = "replication,n1_mode,n2_mode,rho1_mode,rho2_mode\n";
    std::map<int, int> n1_counts, n2_counts;
    for (std::size_t r = 0; r < report.replications.size(); ++r) {
        const auto& rep = report.replications[r];
        rows += std::to_string(r) + ',' + std::to_string(rep.n1_mode) + ',' +
                std::to_string(rep.n2_mode) + ',' + endpoints_string(rep.rho1_mode) + ',' +
                endpoints_string(rep.rho2_mode) + '\n';
        ++n1_counts[rep.n1_mode];
        ++n2_counts[rep.n2_mode];
    }
    bmcp::detail::write_file(o.out_dir + "/replications.csv", rows);
    write_banded_csv(o.out_dir + "/avg_change_prob_mu.csv", report.change_prob1, 1);
    write_banded_csv(o.out_dir + "/avg_change_prob_sigma2.csv", report.change_prob2, 1);
    write_banded_csv(o.out_dir + "/avg_product_mu.csv", report.product_mu, 1);
    write_banded_csv(o.out_dir + "/avg_product_sigma2.csv", report.product_s2, 1);

    nlohmann::json j;
    j["schema"] = "bmcp-mc-report/1";
    j["model"] = report.model;
    j["scenario"] = spec.name;
    j["replications"] = report.replications.size();
    j["seed"] = o.seed;
    nlohmann::json jn1 = nlohmann::json::object(), jn2 = nlohmann::json::object();
    for (auto [k, v] : n1_counts) jn1[std::to_string(k)] = v;
    for (auto [k, v] : n2_counts) jn2[std::to_string(k)] = v;
    j["n1_mode_counts"] = jn1;
    j["n2_mode_counts"] = jn2;
    bmcp::detail::write_file(o.out_dir + "/mc_summary.json", j.dump(2) + "\n");
    std::cout << "replicate: " << spec.name << " model=" << report.model << " reps=" << reps
              << " -> " << o.out_dir << std::endl;
    return 0;
}

int cmd_summarize(const CommonOpts& o, const std::string& samples_path) {
    const bmcp::LoadedSamples loaded = bmcp::read_samples_file(samples_path);
    const bmcp::SummaryReport rep =
        bmcp::summarize_samples(loaded.samples, loaded.model, o.top_k);
    bmcp::write_outputs(rep, loaded.samples, o.out_dir, false);
    std::cout << "summarize: model=" << loaded.model << " draws=" << rep.draw_count << " -> "
              << o.out_dir << std::endl;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multipartition change point detection for Normal sequences"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string input, scenario = "scenario1", samples_path;
    int reps = 20;

    CLI::App* fit = app.add_subcommand("fit", "fit a model to a series read from CSV");
    fit->add_option("input", input, "series CSV (one observation per line)")->required();
    fit->add_option("--model", o.model, "bmcp | lcia05 | bh93");
    fit->add_option("--config", o.config_path, "key = value hyperparameter file");
    fit->add_option("--top-k", o.top_k, "partitions to report");
    fit->add_option("--prob-threshold", o.prob_threshold, "reporting threshold for mean changes");
    fit->add_flag("--keep-samples", o.keep_samples, "also write samples.csv.gz");
    add_mcmc_flags(fit, o);

    CLI::App* sim = app.add_subcommand("simulate", "emit one synthetic series plus its truth");
    sim->add_option("--scenario", scenario, "scenario1 | scenario2 | scenario3 | supplement");
    sim->add_option("--seed", o.seed, "RNG seed");
    sim->add_option("--out", o.out_dir, "output directory");

    CLI::App* rep = app.add_subcommand("replicate", "Monte Carlo study over fresh data sets");
    rep->add_option("--scenario", scenario, "scenario1 | scenario2 | scenario3 | supplement");
    rep->add_option("--model", o.model, "bmcp | lcia05 | bh93");
    rep->add_option("--config", o.config_path, "key = value hyperparameter file");
    rep->add_option("--reps", reps, "number of replications");
    add_mcmc_flags(rep, o);

    CLI::App* sum = app.add_subcommand("summarize", "recompute summaries from samples.csv.gz");
    sum->add_option("samples", samples_path, "samples.csv.gz from a --keep-samples fit")
        ->required();
    sum->add_option("--top-k", o.top_k, "partitions to report");
    sum->add_option("--out", o.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1; // usage error
    }

    try {
        if (fit->parsed()) return cmd_fit(o, input);
        if (sim->parsed()) return cmd_simulate(o, scenario);
        if (rep->parsed()) return cmd_replicate(o, scenario, reps);
        if (sum->parsed()) return cmd_summarize(o, samples_path);
        return 1;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    }
}
