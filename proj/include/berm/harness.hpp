#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "berm/config.hpp"
#include "berm/metrics.hpp"

namespace berm::harness {

// ---- statistics used by the case study ----

struct TestResult {
    double difference = 0.0;  // mean(a) - mean(b)
    double statistic = 0.0;   // t for Welch, z for Mann-Whitney
    double df = 0.0;          // Welch-Satterthwaite df; 0 for Mann-Whitney
    double p_value = 1.0;     // two-sided
};

// Throws InvalidArgument when a sample has fewer than 2 values or both
// variances are zero.
TestResult welch_test(const std::vector<double>& a, const std::vector<double>& b);
// Normal approximation with tie and continuity corrections.
TestResult mann_whitney_test(const std::vector<double>& a, const std::vector<double>& b);

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> midranks(const std::vector<double>& x);
double pearson(const Vector& x, const Vector& y);
double spearman(const Vector& x, const Vector& y);

// ---- simulation suite ----

struct CellKey {
    std::string scenario;
    int replicate = 0;
    Method method = Method::berm;
};

struct SuiteRow {
    CellKey key;
    simgen::Scenario scenario;
    metrics::MetricsReport report;
    double lambda = 0.0;
    double kkt_violation = 0.0;
    std::optional<double> achieved_skewness;
    std::optional<double> achieved_kurtosis;
    std::string warning;
    double wall_seconds = 0.0;
};

struct SuiteError {
    CellKey key;
    std::string type;
    std::string message;
};

struct SuiteReport {
    std::vector<SuiteRow> rows;      // sorted by (scenario, replicate, method tag)
    std::vector<SuiteError> errors;  // same order
    std::size_t cells = 0;
};

// Seed of the data realized for (scenario, replicate). Independent of the
// method roster, so adding a method never changes another cell.
std::uint64_t realization_seed(std::uint64_t base_seed, const std::string& scenario_id, int replicate);
std::uint64_t fit_seed(std::uint64_t realization, Method m);

struct SuiteRunOptions {
    int threads = 1;
    // Called once per finished cell (from worker threads, serialized).
    std::function<void(const CellKey&, std::size_t done, std::size_t total)> progress;
};

// Every (scenario, replicate, method) cell regenerates its data from the
// realization seed and fits one method. Failing cells land in `errors`.
SuiteReport run_suite(const config::SuiteConfig& cfg, const SuiteRunOptions& opts = {});

// results.csv, summary.csv, errors.csv, timing.csv. Each is written atomically.
// Wall time goes to timing.csv only, so results.csv is byte-reproducible.
void write_suite_outputs(const SuiteReport& report, const std::filesystem::path& dir);

std::string results_csv(const SuiteReport& report);
std::string summary_csv(const SuiteReport& report);
std::string errors_csv(const SuiteReport& report);
std::string timing_csv(const SuiteReport& report);

// ---- case study ----

struct SelectedFeature {
    std::string name;
    double coef_standardized = 0.0;
    double coef_raw = 0.0;
    std::optional<double> ci_lower;  // BERM bootstrap interval
    std::optional<double> ci_upper;
};

struct Prediction {
    std::size_t row = 0;  // 1-based data row in the input CSV
    std::string id;
    std::string group;
    std::string split;  // train, test or eval
    double observed = 0.0;
    double predicted = 0.0;
    double acceleration() const noexcept { return predicted - observed; }
};

struct GroupComparison {
    std::string group;
    std::string reference;
    std::optional<double> threshold;
    std::size_t n_group = 0;
    std::size_t n_reference = 0;
    double mean_group = 0.0;
    double mean_reference = 0.0;
    std::optional<TestResult> test;  // empty when either side has < 2 rows
    std::string note;
};

struct FeatureDiagnostics {
    std::string name;
    double skewness = 0.0;
    std::optional<double> max_abs_corr_selected;  // Spearman, over other selected features
    double corr_with_response = 0.0;              // Spearman
    double coef_standardized = 0.0;
    double coef_raw = 0.0;
};

struct CaseStudyReport {
    Method method = Method::berm;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::size_t n_features = 0;
    double lambda = 0.0;
    double train_r2 = 0.0;
    double test_r2 = 0.0;
    std::string warning;
    std::vector<SelectedFeature> selected;
    std::vector<Prediction> predictions;
    std::vector<GroupComparison> comparisons;
    std::vector<FeatureDiagnostics> diagnostics;
};

// Throws MissingColumn, TooFewRows, UnparseableCell, IoError.
CaseStudyReport run_case_study(const config::CaseStudyConfig& cfg, int threads = 1);

// selected_features.csv, predictions.csv, acceleration.csv, diagnostics.csv
// and case_summary.csv.
void write_case_outputs(const CaseStudyReport& report, const std::filesystem::path& dir);

}  // namespace berm::harness
