#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "berm/model.hpp"
#include "berm/seed.hpp"
#include "berm/solver.hpp"

namespace berm::selection {

struct BootstrapSummary {
    int B = 0;
    Matrix coef_samples;  // B x p
    Vector ci_lower;      // 2.5th percentile
    Vector ci_upper;      // 97.5th percentile
    Mask relevance;       // 0 outside [ci_lower, ci_upper]
};

struct BootstrapOptions {
    int B = 100;
    double lower_q = 0.025;
    double upper_q = 0.975;
    // Re-tune lambda by CV inside every replicate. When false, lambda is tuned
    // once on the full data and reused.
    bool retune_per_replicate = true;
    int max_redraws = 10;
    // Row indices for replicate b; the default draws n rows with replacement.
    std::function<std::vector<Eigen::Index>(int b, Eigen::Index n, Rng& rng)> resampler;
    int threads = 1;  // replicates evaluated concurrently
    solver::CvOptions cv;
};

// Linear interpolation between order statistics ("type 7").
double quantile_type7(std::vector<double> values, double q);

// r_j = 1 iff 0 is not in the closed interval [lower_j, upper_j].
Mask relevance_from_ci(const Vector& ci_lower, const Vector& ci_upper);

// Resample rows with replacement, re-standardize, tune lambda, fit with unit
// weights; percentile intervals per coefficient. Each replicate b draws from
// its own stream derive_seed(seed, b).
BootstrapSummary bootstrap_coefficients(const StandardizedDesign& sd, double alpha, std::uint64_t seed,
                                        const BootstrapOptions& opts = {});

struct BermResult {
    FitResult fit;
    BootstrapSummary bootstrap;
    std::optional<solver::CvResult> cv;  // absent when nothing was relevant
    bool empty_relevant_set = false;
};

// Weighted refit given relevance flags: weight 1 for relevant columns, +inf
// otherwise, lambda re-tuned by CV over the relevant columns.
BermResult berm_refit(const StandardizedDesign& sd, const Mask& relevance, double alpha,
                      std::uint64_t seed, const solver::CvOptions& cv = {});

// Bootstrap relevance screening followed by the weighted refit. Every
// resample is re-standardized with its own statistics.
BermResult berm_fit(const StandardizedDesign& sd, double alpha, std::uint64_t seed,
                    const BootstrapOptions& opts = {});

struct AdaptiveOptions {
    double init_alpha = 0.001;
    double gamma = 1.0;
    double tau = 1e-6;
};

// Adaptive weights w_j = 1 / (|b_j| + tau)^gamma.
Vector adaptive_weights(const Vector& beta_init, const AdaptiveOptions& opts = {});

// lasso / enet / alasso / aenet. Throws InvalidArgument for Method::berm.
FitResult baseline_fit(const StandardizedDesign& sd, Method method, std::uint64_t seed,
                       const solver::CvOptions& cv = {}, const AdaptiveOptions& adaptive = {});

}  // namespace berm::selection
