// One PASS/FAIL line per headline criterion. Exit status is nonzero when any
// criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>

#include <fmt/format.h>

#include "berm/config.hpp"
#include "berm/errors.hpp"
#include "berm/harness.hpp"
#include "berm/metrics.hpp"
#include "berm/selection.hpp"
#include "berm/simgen.hpp"
#include "berm/solver.hpp"
#include "fixture.hpp"
#include "kkt_audit.hpp"
#include "oracles.hpp"

using namespace berm;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
    std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- solver ----

void solver_oracle() {
    const auto t0 = Clock::now();
    std::mt19937 gen(2024);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst = 0.0;
    for (unsigned k = 0; k < 50; ++k) {
        const Eigen::Index p = 2 + static_cast<Eigen::Index>(k % 19);
        const Matrix X = oracle::orthonormal_design(200, p, 100 + k);
        Vector coef = oracle::gaussian(p, 1, 300 + k).col(0);
        const Vector y = X * coef + oracle::gaussian(200, 1, 500 + k).col(0);
        const StandardizedDesign sd = oracle::as_design(X, y);
        const double alpha = 0.05 + 0.95 * unif(gen);
        const double lmax = (X.transpose() * sd.yc / 200.0).cwiseAbs().maxCoeff() / alpha;
        const double lambda = lmax * (0.01 + 0.8 * unif(gen));
        const FitResult f = solver::cd_fit(sd, solver::PenaltyConfig::uniform(p, alpha, lambda));
        const Vector expect = oracle::orthonormal_enet(X, sd.yc, lambda, alpha, Vector::Ones(p));
        worst = std::max(worst, (f.beta - expect).cwiseAbs().maxCoeff());
    }
    double worst_ls = 0.0;
    for (unsigned k = 0; k < 10; ++k) {
        const Matrix X = oracle::gaussian(200, 15, 700 + k);
        const Vector y = X.col(0) - X.col(3) + oracle::gaussian(200, 1, 800 + k).col(0);
        const StandardizedDesign sd = standardize(Dataset(X, y));
        const FitResult f = solver::cd_fit(sd, solver::PenaltyConfig::uniform(15, 1.0, 0.0));
        worst_ls = std::max(worst_ls, (f.beta - oracle::least_squares(sd.Xs, sd.yc)).cwiseAbs().maxCoeff());
    }
    const double secs = seconds_since(t0);
    report("solver-oracle", worst < 1e-6 && worst_ls < 1e-6 && secs < 10.0,
           fmt::format("closed form max err {:.2e}, least squares max err {:.2e}, {:.2f} s", worst, worst_ls, secs));
}

// ---- relevance / refit ----

void relevance_logic() {
    bool ok = true;
    std::string why;
    Vector lo(5), hi(5);
    lo << -0.2, 0.1, -0.5, 0.0, -0.3;
    hi << 0.3, 0.5, -0.1, 0.4, 0.0;
    if (selection::relevance_from_ci(lo, hi) != Mask{false, true, true, false, false}) {
        ok = false;
        why += " coverage";
    }
    const Matrix X = oracle::gaussian(150, 8, 12);
    Vector b = Vector::Zero(8);
    b.head(3) << 2.0, -1.5, 1.0;
    const StandardizedDesign sd = standardize(Dataset(X, X * b + oracle::gaussian(150, 1, 13).col(0)));
    const auto all = selection::berm_refit(sd, Mask(8, true), 0.5, 77);
    const auto plain = solver::cv_fit(sd, 0.5, Vector::Ones(8), 77, Method::enet);
    if (all.fit.beta != plain.fit.beta || all.fit.lambda != plain.fit.lambda) {
        ok = false;
        why += " all-relevant";
    }
    const auto none = selection::berm_refit(sd, Mask(8, false), 0.5, 77);
    if (!none.empty_relevant_set || !none.fit.beta.isZero(0.0) || !none.fit.warning) {
        ok = false;
        why += " all-irrelevant";
    }
    Mask some(8, false);
    some[0] = some[4] = true;
    const auto part = selection::berm_refit(sd, some, 0.5, 77);
    for (Eigen::Index j = 0; j < 8; ++j)
        if (!some[static_cast<std::size_t>(j)] && part.fit.beta[j] != 0.0) {
            ok = false;
            why += " excluded-column";
        }
    report("relevance-berm-logic", ok,
           ok ? "interval cases, all-relevant = elastic net, empty set = zero model" : "failed:" + why);
}

// ---- generator ----

void generator_fidelity() {
    const auto t0 = Clock::now();
    simgen::Scenario s;
    s.id = "fidelity";
    s.n = 20000;
    s.p = 60;
    s.seed = 5;
    try {
        const simgen::SimulatedDataset d = simgen::realize_scenario(s);
        const Matrix& Xr = d.dataset.X();
        const Matrix C = Xr.rowwise() - Xr.colwise().mean();
        const Matrix S = C.transpose() * C / static_cast<double>(Xr.rows());
        const double fro = (S - d.sigma_true).norm() / d.sigma_true.norm();
        const double min_eig =
            Eigen::SelfAdjointEigenSolver<Matrix>(d.sigma_true, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
        const double es = std::abs(*d.achieved_skewness / 5000.0 - 1.0);
        const double ek = std::abs(*d.achieved_kurtosis / 25000.0 - 1.0);
        const double secs = seconds_since(t0);
        report("generator-fidelity", es <= 0.25 && ek <= 0.25 && fro < 0.05 && min_eig > 0.0 && secs < 120.0,
               fmt::format("skewness {:.0f} ({:+.1f}%), kurtosis {:.0f} ({:+.1f}%), covariance error {:.2e}, "
                           "min eigenvalue {:.2e}, {:.1f} s",
                           *d.achieved_skewness, 100 * (*d.achieved_skewness / 5000.0 - 1),
                           *d.achieved_kurtosis, 100 * (*d.achieved_kurtosis / 25000.0 - 1), fro, min_eig, secs));
    } catch (const std::exception& e) {
        report("generator-fidelity", false, e.what());
    }
}

// ---- desk-scale suite ----

std::string desk_yaml(bool simple) {
    return fmt::format(R"(suite:
  replicates: 20
  base_seed: 20240601
  methods: [berm, lasso, enet, alasso, aenet]
  scenarios:
    - id: {}
      preset: moderate
      sparsity: 0.5
      sigma: 1
      simple: {}
)",
                       simple ? "desk_simple" : "desk_complex", simple ? "true" : "false");
}

struct MethodMeans {
    double ba = 0.0, delta = 0.0, abs_delta = 0.0, mse = 0.0;
    int rows = 0, mse_rows = 0;
};

std::map<Method, MethodMeans> means(const harness::SuiteReport& r) {
    std::map<Method, MethodMeans> m;
    for (const auto& row : r.rows) {
        auto& x = m[row.key.method];
        x.ba += row.report.balanced_accuracy;
        x.delta += static_cast<double>(row.report.selection_delta);
        x.abs_delta += std::abs(static_cast<double>(row.report.selection_delta));
        if (row.report.mse_selected) {
            x.mse += *row.report.mse_selected;
            ++x.mse_rows;
        }
        ++x.rows;
    }
    for (auto& [k, x] : m) {
        x.ba /= x.rows;
        x.delta /= x.rows;
        x.abs_delta /= x.rows;
        if (x.mse_rows) x.mse /= x.mse_rows;
    }
    return m;
}

void desk_suite(const fs::path& work, const std::string& cli) {
    const int threads = 1;
    const auto t0 = Clock::now();
    const auto complex_cfg = std::get<config::SuiteConfig>(config::parse_config_string(desk_yaml(false)));
    const harness::SuiteReport complex = harness::run_suite(complex_cfg, {threads, {}});
    const double secs_complex = seconds_since(t0);
    const auto simple_cfg = std::get<config::SuiteConfig>(config::parse_config_string(desk_yaml(true)));
    const harness::SuiteReport simple = harness::run_suite(simple_cfg, {threads, {}});
    harness::write_suite_outputs(complex, work / "desk_complex");
    harness::write_suite_outputs(simple, work / "desk_simple");

    const std::size_t expected = 20 * 5;
    const bool complete = complex.rows.size() == expected && simple.rows.size() == expected;
    const auto mc = means(complex), ms = means(simple);
    auto at = [](const std::map<Method, MethodMeans>& m, Method k) {
        auto it = m.find(k);
        return it == m.end() ? MethodMeans{} : it->second;
    };
    const Method all[] = {Method::berm, Method::lasso, Method::enet, Method::alasso, Method::aenet};

    std::string table;
    for (Method k : all)
        table += fmt::format(" {}={:.3f}", to_string(k), at(mc, k).ba);
    const double berm_ba = at(mc, Method::berm).ba;
    bool is_max = true;
    for (Method k : all)
        if (k != Method::berm && !(berm_ba > at(mc, k).ba)) is_max = false;
    const double margin = std::min(berm_ba - at(mc, Method::lasso).ba, berm_ba - at(mc, Method::enet).ba);
    report("desk-balanced-accuracy", complete && margin >= 0.03 && is_max,
           fmt::format("mean BA{}; margin over lasso/enet {:+.3f}; {} errors; {:.0f} s", table, margin,
                       complex.errors.size(), secs_complex));

    const double dl = at(mc, Method::lasso).delta, de = at(mc, Method::enet).delta;
    const double db = at(mc, Method::berm).abs_delta;
    report("desk-over-selection", complete && dl > 0 && de > 0 && dl > db && de > db,
           fmt::format("mean delta lasso {:+.2f}, enet {:+.2f}; BERM mean |delta| {:.2f} (signed {:+.2f})", dl, de, db,
                       at(mc, Method::berm).delta));

    const double mb = at(mc, Method::berm).mse, me = at(mc, Method::enet).mse;
    report("desk-mse-comparable", complete && at(mc, Method::berm).mse_rows > 0 && mb <= 2.0 * me,
           fmt::format("mean mse_selected BERM {:.4f}, enet {:.4f}, ratio {:.2f}", mb, me, mb / me));

    bool simple_ok = complete;
    std::string gaps;
    for (Method k : all) {
        const double g = at(ms, k).ba - at(mc, k).ba;
        gaps += fmt::format(" {}={:+.3f}", to_string(k), g);
        if (!(g >= 0.0)) simple_ok = false;
    }
    report("simple-vs-complex", simple_ok, "simple minus complex BA:" + gaps);

    // Same config through the command line with another thread count.
    const fs::path cfg_path = work / "desk_complex.yaml";
    std::ofstream(cfg_path) << desk_yaml(false);
    const fs::path cli_out = work / "desk_complex_cli";
    const std::string cmd =
        fmt::format("\"{}\" suite run \"{}\" --threads 3 --out \"{}\" --quiet", cli, cfg_path.string(), cli_out.string());
    const int rc = std::system(cmd.c_str());
    const std::string a = slurp(work / "desk_complex" / "results.csv");
    const std::string b = slurp(cli_out / "results.csv");
    report("determinism", rc == 0 && !a.empty() && a == b,
           fmt::format("in-process threads {} vs command line threads 3: {} ({} bytes)", threads,
                       a == b ? "byte-identical" : "DIFFERENT", a.size()));
}

// ---- case study ----

void case_study(const fs::path& work) {
    try {
        const fs::path d = work / "case";
        fs::create_directories(d);
        fixture::write_case_csv(d / "fixture.csv", 1);
        auto cfg = std::get<config::CaseStudyConfig>(
            config::parse_config_string(fixture::case_yaml(d / "fixture.csv", d / "out", 1)));
        const harness::CaseStudyReport r = harness::run_case_study(cfg);
        harness::write_case_outputs(r, cfg.output_dir);
        bool exact = r.selected.size() == 3;
        std::string names;
        for (std::size_t k = 0; k < r.selected.size(); ++k) {
            names += (k ? "," : "") + r.selected[k].name;
            if (k < 3 && r.selected[k].name != fixture::kTrueFeatures[k]) exact = false;
        }
        int quiet = 0;
        for (unsigned s = 1; s <= 20; ++s) {
            fixture::write_case_csv(d / "null.csv", 1000 + s);
            auto c = std::get<config::CaseStudyConfig>(
                config::parse_config_string(fixture::case_yaml(d / "null.csv", d / "null_out", s)));
            const harness::CaseStudyReport n = harness::run_case_study(c);
            if (!n.comparisons.empty() && n.comparisons[0].test && n.comparisons[0].test->p_value > 0.05) ++quiet;
        }
        report("case-study-fixture", r.test_r2 > 0.95 && exact && quiet >= 18,
               fmt::format("test R2 {:.5f}, selected [{}], null comparisons non-significant in {}/20", r.test_r2,
                           names, quiet));
    } catch (const std::exception& e) {
        report("case-study-fixture", false, e.what());
    }
}

// Unit-test binary's own audit line: "KKT audit: N fits certified, worst violation X, K above 1e-05".
bool unit_audit(const std::string& tests, std::size_t& fits, std::size_t& bad, double& worst) {
    FILE* pipe = ::popen(("\"" + tests + "\" 2>&1").c_str(), "r");
    if (!pipe) return false;
    std::array<char, 4096> buf{};
    bool found = false;
    while (std::fgets(buf.data(), buf.size(), pipe))
        if (std::sscanf(buf.data(), "KKT audit: %zu fits certified, worst violation %lf, %zu above", &fits, &worst,
                        &bad) == 3)
            found = true;
    const int rc = ::pclose(pipe);
    return found && rc == 0;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : BERM_CLI_PATH;
    const std::string tests = argc > 2 ? argv[2] : BERM_TESTS_PATH;
    const fs::path work = fs::temp_directory_path() / fmt::format("berm_acceptance_{}", ::getpid());
    fs::remove_all(work);
    fs::create_directories(work);

    testing::KktAudit audit;
    solver_oracle();
    relevance_logic();
    generator_fidelity();
    desk_suite(work, cli);
    case_study(work);

    const auto own = audit.summary();
    std::size_t unit_fits = 0, unit_bad = 0;
    double unit_worst = 0.0;
    const bool unit_ok = unit_audit(tests, unit_fits, unit_bad, unit_worst);
    report("kkt-certification", own.failures == 0 && unit_ok && unit_bad == 0,
           fmt::format("acceptance fits {} (worst {:.2e}), unit-test fits {} (worst {:.2e}), {} above {:.0e}{}",
                       own.fits, own.worst, unit_fits, unit_worst, own.failures + unit_bad,
                       testing::KktAudit::kTol, unit_ok ? "" : "; unit tests did not pass"));

    std::printf("outputs kept in %s\n", work.string().c_str());
    std::printf("%s\n", failures ? fmt::format("{} criteria failed", failures).c_str() : "all criteria passed");
    return failures ? 1 : 0;
}
