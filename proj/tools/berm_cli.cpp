#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "berm/config.hpp"
#include "berm/errors.hpp"
#include "berm/harness.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 1, kIo = 2, kFailed = 3 };

struct RunFlags {
    std::string config;
    std::optional<int> threads;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicates;
    bool quiet = false;
};

int default_threads(const std::optional<int>& from_config) {
    if (from_config) return *from_config;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

int run_suite(const RunFlags& f) {
    auto cfg = std::get<berm::config::SuiteConfig>(berm::config::parse_config(f.config));
    if (f.out) cfg.output_dir = *f.out;
    if (f.seed) cfg.base_seed = *f.seed;
    if (f.replicates) cfg.replicates = *f.replicates;
    if (f.threads) cfg.threads = *f.threads;
    cfg.validate();

    berm::harness::SuiteRunOptions opts;
    opts.threads = default_threads(cfg.threads);
    if (!f.quiet) {
        opts.progress = [](const berm::harness::CellKey& k, std::size_t done, std::size_t total) {
            fmt::print(stderr, "[{}/{}] {} rep {} {}\n", done, total, k.scenario, k.replicate,
                       berm::to_string(k.method));
        };
    }
    const auto report = berm::harness::run_suite(cfg, opts);
    berm::harness::write_suite_outputs(report, cfg.output_dir);
    fmt::print("{} cells, {} ok, {} failed; results in {}\n", report.cells, report.rows.size(),
               report.errors.size(), cfg.output_dir.string());
    return report.rows.empty() ? kFailed : kOk;
}

int run_case(const RunFlags& f) {
    auto cfg = std::get<berm::config::CaseStudyConfig>(berm::config::parse_config(f.config));
    if (f.out) cfg.output_dir = *f.out;
    if (f.seed) cfg.seed = *f.seed;
    if (f.threads) cfg.threads = *f.threads;
    cfg.validate();
    const auto rep = berm::harness::run_case_study(cfg, default_threads(cfg.threads));
    berm::harness::write_case_outputs(rep, cfg.output_dir);
    fmt::print("method {}: {} of {} features selected, train R2 {:.4f}, test R2 {:.4f}\n",
               berm::to_string(rep.method), rep.selected.size(), rep.n_features, rep.train_r2,
               rep.test_r2);
    for (const auto& c : rep.comparisons) {
        if (c.test)
            fmt::print("{} vs {}: difference {:.4f}, p = {:.4g}\n", c.group, c.reference,
                       c.test->difference, c.test->p_value);
        else
            fmt::print("{} vs {}: no test ({})\n", c.group, c.reference, c.note);
    }
    if (!rep.warning.empty()) fmt::print(stderr, "warning: {}\n", rep.warning);
    fmt::print("outputs in {}\n", cfg.output_dir.string());
    return kOk;
}

int validate(const std::string& path) {
    const auto cfg = berm::config::parse_config(path);
    std::cout << berm::config::serialize(cfg);
    return kOk;
}

void add_run_flags(CLI::App* cmd, RunFlags& f, bool suite) {
    cmd->add_option("config", f.config, "YAML config file")->required();
    cmd->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", f.out, "output directory (overrides the config)");
    cmd->add_option("--seed", f.seed, "base seed (overrides the config)");
    if (suite) {
        cmd->add_option("--replicates", f.replicates, "replicates per scenario")->check(CLI::PositiveNumber);
        cmd->add_flag("--quiet", f.quiet, "no per-cell progress");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bootstrap-enhanced penalized regression: simulation suite and case-study runner"};
    app.require_subcommand(1);

    RunFlags suite_flags, case_flags;
    std::string validate_path;
    auto* suite = app.add_subcommand("suite", "simulation suite");
    suite->require_subcommand(1);
    add_run_flags(suite->add_subcommand("run", "run a suite config"), suite_flags, true);
    auto* cs = app.add_subcommand("case", "case study on a CSV dataset");
    cs->require_subcommand(1);
    add_run_flags(cs->add_subcommand("run", "run a case-study config"), case_flags, false);
    auto* val = app.add_subcommand("validate", "check a config and print its expanded form");
    val->add_option("config", validate_path, "YAML config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (suite->parsed()) return run_suite(suite_flags);
        if (cs->parsed()) return run_case(case_flags);
        return validate(validate_path);
    } catch (const std::bad_variant_access&) {
        fmt::print(stderr, "error: config kind does not match the subcommand\n");
        return kConfig;
    } catch (const berm::IoError& e) {
        fmt::print(stderr, "io error: {}\n", e.what());
        return kIo;
    } catch (const berm::SchemaViolation& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kConfig;
    } catch (const berm::MissingColumn& e) {
        fmt::print(stderr, "data error: {}\n", e.what());
        return kConfig;
    } catch (const berm::TooFewRows& e) {
        fmt::print(stderr, "data error: {}\n", e.what());
        return kConfig;
    } catch (const berm::UnparseableCell& e) {
        fmt::print(stderr, "data error: {}\n", e.what());
        return kConfig;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kFailed;
    }
}
