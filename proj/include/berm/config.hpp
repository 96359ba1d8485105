#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "berm/model.hpp"
#include "berm/selection.hpp"
#include "berm/simgen.hpp"

namespace berm::config {

// Fitting knobs shared by suite and case-study runs.
struct FitSettings {
    int bootstrap = 100;                 // B
    double alpha = 0.5;                  // BERM mixing parameter
    bool retune_per_replicate = true;    // re-run CV inside each bootstrap fit
    int folds = 10;
    int n_lambda = 100;
    std::optional<double> lambda_ratio;  // default: 1e-3 when n > p, else 1e-2
    bool one_se_rule = false;
    selection::AdaptiveOptions adaptive;

    selection::BootstrapOptions bootstrap_options() const;
    solver::CvOptions cv_options() const;
};

struct SuiteConfig {
    std::vector<simgen::Scenario> scenarios;  // grid already expanded; seeds unset
    std::vector<Method> methods{Method::berm, Method::lasso, Method::enet, Method::alasso,
                                Method::aenet};
    int replicates = 100;
    std::uint64_t base_seed = 1;
    std::filesystem::path output_dir = "results";
    std::optional<int> threads;
    // Keep beta fixed across the replicates of a scenario.
    bool fixed_beta = false;
    // Count falsely selected zeros in mse_selected as well.
    bool mse_include_false_positives = false;
    FitSettings fit;
    simgen::TransformFitOptions transform;

    // Throws SchemaViolation.
    void validate() const;
};

enum class GroupTest { welch, mann_whitney };

struct CaseStudyConfig {
    std::filesystem::path data_path;
    std::string response_column;
    std::optional<std::string> group_column;
    std::optional<std::string> id_column;
    std::string fit_group = "CTR";
    std::vector<std::string> eval_groups;
    // Empty: every numeric column other than response, group and id.
    std::vector<std::string> features;
    double test_fraction = 0.2;
    std::optional<double> age_threshold;
    Method method = Method::berm;
    std::uint64_t seed = 1;
    GroupTest test = GroupTest::welch;
    std::filesystem::path output_dir = "case_results";
    std::optional<int> threads;
    FitSettings fit;

    void validate() const;
};

using Config = std::variant<SuiteConfig, CaseStudyConfig>;

// Top-level key `suite:` or `case_study:`. Relative paths resolve against
// `base_dir`. Unknown keys, wrong types and out-of-range values throw
// SchemaViolation naming the key and line.
Config parse_config_string(const std::string& text, const std::filesystem::path& base_dir = {});
// Throws IoError when the file cannot be read.
Config parse_config(const std::filesystem::path& path);

// Fully expanded form that parses back to an equal config.
std::string serialize(const Config& cfg);

std::string_view to_string(GroupTest t) noexcept;

}  // namespace berm::config
