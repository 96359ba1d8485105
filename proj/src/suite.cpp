#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <typeinfo>

#include <fmt/format.h>

#include "berm/csv.hpp"
#include "berm/errors.hpp"
#include "berm/harness.hpp"
#include "berm/parallel.hpp"
#include "berm/seed.hpp"

namespace berm::harness {

std::uint64_t realization_seed(std::uint64_t base_seed, const std::string& scenario_id, int replicate) {
    return derive_seed(derive_seed(base_seed, scenario_id), static_cast<std::uint64_t>(replicate));
}

std::uint64_t fit_seed(std::uint64_t realization, Method m) { return derive_seed(realization, to_string(m)); }

namespace {

bool key_less(const CellKey& a, const CellKey& b) {
    if (a.scenario != b.scenario) return a.scenario < b.scenario;
    if (a.replicate != b.replicate) return a.replicate < b.replicate;
    return to_string(a.method) < to_string(b.method);
}

std::string error_type(const std::exception& e) {
    if (dynamic_cast<const NoConvergence*>(&e)) return "NoConvergence";
    if (dynamic_cast<const ConstantColumn*>(&e)) return "ConstantColumn";
    if (dynamic_cast<const DegenerateResample*>(&e)) return "DegenerateResample";
    if (dynamic_cast<const TransformFitFailure*>(&e)) return "TransformFitFailure";
    if (dynamic_cast<const SingularCovariance*>(&e)) return "SingularCovariance";
    if (dynamic_cast<const Error*>(&e)) return "Error";
    return "Exception";
}

struct Cell {
    const simgen::Scenario* scenario;
    int replicate;
    Method method;
};

SuiteRow run_cell(const config::SuiteConfig& cfg, const Cell& cell) {
    const auto start = std::chrono::steady_clock::now();
    simgen::Scenario s = *cell.scenario;
    s.seed = realization_seed(cfg.base_seed, s.id, cell.replicate);
    if (cfg.fixed_beta) s.beta_seed = derive_seed(derive_seed(cfg.base_seed, s.id), "beta");
    const simgen::SimulatedDataset sim = simgen::realize_scenario(s, cfg.transform);
    const StandardizedDesign sd = standardize(sim.dataset);

    const std::uint64_t seed = fit_seed(s.seed, cell.method);
    FitResult fit;
    if (cell.method == Method::berm) {
        fit = selection::berm_fit(sd, cfg.fit.alpha, seed, cfg.fit.bootstrap_options()).fit;
    } else {
        fit = selection::baseline_fit(sd, cell.method, seed, cfg.fit.cv_options(), cfg.fit.adaptive);
    }

    SuiteRow row;
    row.key = {s.id, cell.replicate, cell.method};
    row.scenario = s;
    const Vector beta_raw = raw_coefficients(fit, sd);
    row.report = metrics::score(sim.beta_true, sim.support_true, beta_raw, fit.selected);
    if (cfg.mse_include_false_positives)
        row.report.mse_selected = metrics::mse_selected(sim.beta_true, beta_raw, fit.selected, true);
    row.lambda = fit.lambda;
    row.kkt_violation = solver::kkt_violation(sd, fit);
    row.achieved_skewness = sim.achieved_skewness;
    row.achieved_kurtosis = sim.achieved_kurtosis;
    if (fit.warning) row.warning = *fit.warning;
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}

std::string yes_no(bool b) { return b ? "true" : "false"; }

struct Stat {
    std::vector<double> values;

    void add(double v) { values.push_back(v); }
    std::optional<double> mean() const {
        if (values.empty()) return std::nullopt;
        double sum = 0.0;
        for (double v : values) sum += v;
        return sum / static_cast<double>(values.size());
    }
    // Standard error of the mean with the n - 1 sample SD.
    std::optional<double> se() const {
        if (values.size() < 2) return std::nullopt;
        const double m = *mean();
        double ss = 0.0;
        for (double v : values) ss += (v - m) * (v - m);
        const double n = static_cast<double>(values.size());
        return std::sqrt(ss / (n - 1.0) / n);
    }
};

}  // namespace

SuiteReport run_suite(const config::SuiteConfig& cfg, const SuiteRunOptions& opts) {
    cfg.validate();
    std::vector<Cell> cells;
    for (const auto& s : cfg.scenarios)
        for (int r = 0; r < cfg.replicates; ++r)
            for (Method m : cfg.methods) cells.push_back({&s, r, m});

    // BERM cells are by far the slowest; hand them out first.
    std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        return (a.method == Method::berm) > (b.method == Method::berm);
    });

    std::vector<std::optional<SuiteRow>> rows(cells.size());
    std::vector<std::optional<SuiteError>> errors(cells.size());
    std::mutex progress_mutex;
    std::size_t done = 0;
    parallel_for(cells.size(), opts.threads, [&](std::size_t i) {
        const Cell& c = cells[i];
        const CellKey key{c.scenario->id, c.replicate, c.method};
        try {
            rows[i] = run_cell(cfg, c);
        } catch (const std::exception& e) {
            errors[i] = SuiteError{key, error_type(e), e.what()};
        }
        if (opts.progress) {
            std::lock_guard lock(progress_mutex);
            opts.progress(key, ++done, cells.size());
        }
    });

    SuiteReport report;
    report.cells = cells.size();
    for (auto& r : rows)
        if (r) report.rows.push_back(std::move(*r));
    for (auto& e : errors)
        if (e) report.errors.push_back(std::move(*e));
    std::sort(report.rows.begin(), report.rows.end(),
              [](const SuiteRow& a, const SuiteRow& b) { return key_less(a.key, b.key); });
    std::sort(report.errors.begin(), report.errors.end(),
              [](const SuiteError& a, const SuiteError& b) { return key_less(a.key, b.key); });
    return report;
}

std::string results_csv(const SuiteReport& report) {
    using csv::format_number;
    csv::Writer w({"scenario", "replicate", "method", "n", "p", "sparsity", "sigma", "simple", "tp",
                   "fp", "tn", "fn", "balanced_accuracy", "accuracy_fallback", "selection_delta",
                   "mse_selected", "n_selected", "lambda", "kkt_violation", "achieved_skewness",
                   "achieved_kurtosis", "warning"});
    for (const auto& r : report.rows) {
        const auto& c = r.report.confusion;
        w.row({r.key.scenario, std::to_string(r.key.replicate), std::string(to_string(r.key.method)),
               std::to_string(r.scenario.n), std::to_string(r.scenario.p),
               format_number(r.scenario.sparsity), format_number(r.scenario.sigma),
               yes_no(r.scenario.simple), std::to_string(c.tp), std::to_string(c.fp),
               std::to_string(c.tn), std::to_string(c.fn), format_number(r.report.balanced_accuracy),
               yes_no(r.report.accuracy_fallback), std::to_string(r.report.selection_delta),
               format_number(r.report.mse_selected), std::to_string(r.report.n_selected),
               format_number(r.lambda), format_number(r.kkt_violation),
               format_number(r.achieved_skewness), format_number(r.achieved_kurtosis), r.warning});
    }
    return w.str();
}

std::string summary_csv(const SuiteReport& report) {
    struct Group {
        const SuiteRow* first = nullptr;
        Stat ba, delta, abs_delta, mse, n_selected;
    };
    std::map<std::pair<std::string, std::string>, Group> groups;
    for (const auto& r : report.rows) {
        Group& g = groups[{r.key.scenario, std::string(to_string(r.key.method))}];
        if (!g.first) g.first = &r;
        g.ba.add(r.report.balanced_accuracy);
        g.delta.add(static_cast<double>(r.report.selection_delta));
        g.abs_delta.add(std::abs(static_cast<double>(r.report.selection_delta)));
        if (r.report.mse_selected) g.mse.add(*r.report.mse_selected);
        g.n_selected.add(static_cast<double>(r.report.n_selected));
    }
    using csv::format_number;
    csv::Writer w({"scenario", "method", "n", "p", "sparsity", "sigma", "simple", "replicates",
                   "balanced_accuracy_mean", "balanced_accuracy_se", "selection_delta_mean",
                   "selection_delta_se", "abs_selection_delta_mean", "abs_selection_delta_se",
                   "mse_selected_mean", "mse_selected_se", "mse_selected_count", "n_selected_mean",
                   "n_selected_se"});
    for (const auto& [key, g] : groups) {
        const simgen::Scenario& s = g.first->scenario;
        w.row({key.first, key.second, std::to_string(s.n), std::to_string(s.p),
               format_number(s.sparsity), format_number(s.sigma), yes_no(s.simple),
               std::to_string(g.ba.values.size()), format_number(g.ba.mean()), format_number(g.ba.se()),
               format_number(g.delta.mean()), format_number(g.delta.se()),
               format_number(g.abs_delta.mean()), format_number(g.abs_delta.se()),
               format_number(g.mse.mean()), format_number(g.mse.se()),
               std::to_string(g.mse.values.size()), format_number(g.n_selected.mean()),
               format_number(g.n_selected.se())});
    }
    return w.str();
}

std::string errors_csv(const SuiteReport& report) {
    csv::Writer w({"scenario", "replicate", "method", "error_type", "message"});
    for (const auto& e : report.errors)
        w.row({e.key.scenario, std::to_string(e.key.replicate), std::string(to_string(e.key.method)),
               e.type, e.message});
    return w.str();
}

std::string timing_csv(const SuiteReport& report) {
    csv::Writer w({"scenario", "replicate", "method", "wall_seconds"});
    for (const auto& r : report.rows)
        w.row({r.key.scenario, std::to_string(r.key.replicate), std::string(to_string(r.key.method)),
               fmt::format("{:.6f}", r.wall_seconds)});
    return w.str();
}

void write_suite_outputs(const SuiteReport& report, const std::filesystem::path& dir) {
    csv::write_atomic(dir / "results.csv", results_csv(report));
    csv::write_atomic(dir / "summary.csv", summary_csv(report));
    csv::write_atomic(dir / "errors.csv", errors_csv(report));
    csv::write_atomic(dir / "timing.csv", timing_csv(report));
}

}  // namespace berm::harness
