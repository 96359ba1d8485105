#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "berm/model.hpp"

namespace berm::solver {

inline constexpr double kInfiniteWeight = std::numeric_limits<double>::infinity();

// Weighted elastic-net penalty
//   lambda * sum_j w_j * ((1 - alpha)/2 * b_j^2 + alpha * |b_j|).
// A weight of +inf removes column j from the problem (b_j fixed at 0).
struct PenaltyConfig {
    double alpha = 0.5;
    double lambda = 0.0;
    Vector weights;

    // Unit weights for p columns.
    static PenaltyConfig uniform(Eigen::Index p, double alpha, double lambda);
    // Throws InvalidArgument on alpha outside [0,1], negative lambda, NaN or
    // negative weights.
    void validate(Eigen::Index p) const;
};

struct CdOptions {
    double tol = 1e-7;       // max |delta b_j| over a full sweep
    int max_iter = 100000;   // full sweeps
    // Called after every full sweep with the current objective value.
    std::function<void(double)> on_sweep;
};

inline double soft_threshold(double z, double gamma) noexcept {
    if (z > gamma) return z - gamma;
    if (z < -gamma) return z + gamma;
    return 0.0;
}

// Precomputed sufficient statistics of a standardized design: G = X'X/n and
// c = X'y/n. Coordinate updates only touch these, so one Gram serves a whole
// lambda path.
class Gram {
public:
    explicit Gram(const StandardizedDesign& sd);
    Gram(const Matrix& Xs, const Vector& yc);

    const Matrix& G() const noexcept { return G_; }
    const Vector& c() const noexcept { return c_; }
    double yy() const noexcept { return yy_; }  // y'y/n
    Eigen::Index p() const noexcept { return c_.size(); }

private:
    Matrix G_;
    Vector c_;
    double yy_ = 0.0;
};

// Penalized objective (1/2n)||y - Xb||^2 + penalty, evaluated from a Gram.
double objective(const Gram& gram, const PenaltyConfig& pen, const Vector& beta);
double objective(const StandardizedDesign& sd, const PenaltyConfig& pen, const Vector& beta);

// Cyclic coordinate descent with active-set cycling. Throws NoConvergence.
FitResult cd_fit(const StandardizedDesign& sd, const PenaltyConfig& pen,
                 const std::optional<Vector>& warm_start = std::nullopt,
                 const CdOptions& opts = {});
Vector cd_solve(const Gram& gram, const PenaltyConfig& pen, const Vector& warm_start,
                const CdOptions& opts = {});

// Largest stationarity violation of `beta` for the penalized problem on `sd`.
// For b_j != 0: |g_j - lambda w_j (alpha sign(b_j) + (1-alpha) b_j)|;
// for b_j == 0 with finite w_j: max(0, |g_j| - lambda w_j alpha), where
// g = X'(y - Xb)/n. Excluded columns must be exactly zero (else +inf).
double kkt_violation(const StandardizedDesign& sd, const PenaltyConfig& pen, const Vector& beta);
double kkt_violation(const StandardizedDesign& sd, const FitResult& fit);
bool check_kkt(const StandardizedDesign& sd, const FitResult& fit, double tol = 1e-5);

// Log-spaced descending grid from lambda_max to lambda_max * ratio.
// Throws AlphaZero, AllWeightsInfinite, InvalidArgument.
Vector lambda_grid(const StandardizedDesign& sd, double alpha, const Vector& weights,
                   int n_lambda = 100, double ratio = 1e-3);
double lambda_max(const Gram& gram, double alpha, const Vector& weights);
// 1e-3 when n > p, 1e-2 otherwise.
double default_lambda_ratio(Eigen::Index n, Eigen::Index p) noexcept;

// Warm-started fits along a descending grid; column k is the fit at grid[k].
Matrix fit_path(const Gram& gram, double alpha, const Vector& weights, const Vector& grid,
                const CdOptions& opts = {});

// Audit hook. When set, it is called with every FitResult that cd_fit and
// cv_fit return, and with the zero model of an empty BERM refit, together
// with the design it was fitted on. Calls may come from several threads.
using FitObserver = std::function<void(const StandardizedDesign&, const FitResult&)>;
void set_fit_observer(FitObserver observer);
void notify_fit(const StandardizedDesign& sd, const FitResult& fit);

struct CvOptions {
    int k = 10;
    int n_lambda = 100;
    std::optional<double> ratio;      // default_lambda_ratio when unset
    std::optional<Vector> grid;       // overrides the generated grid
    bool one_se_rule = false;
    int threads = 1;                  // folds evaluated concurrently
    CdOptions cd;
};

struct CvResult {
    Vector lambda_grid;
    Vector cv_mean_error;
    Vector cv_se;
    double lambda_best = 0.0;
    Eigen::Index best_index = 0;
    std::uint64_t fold_assignment_seed = 0;
};

// Seeded near-equal random partition of n rows into k folds; entry i is the
// fold of row i.
std::vector<int> assign_folds(Eigen::Index n, int k, std::uint64_t seed);

// k-fold CV over the lambda grid. Each fold is re-standardized with its own
// training rows. Ties go to the larger lambda.
CvResult cv_select_lambda(const StandardizedDesign& sd, double alpha, const Vector& weights,
                          std::uint64_t seed, const CvOptions& opts = {});

// CV for lambda then a full-data fit at lambda_best (warm-started along the
// grid). The returned FitResult carries `method` as given.
struct CvFit {
    FitResult fit;
    CvResult cv;
};
CvFit cv_fit(const StandardizedDesign& sd, double alpha, const Vector& weights,
             std::uint64_t seed, Method method, const CvOptions& opts = {});

}  // namespace berm::solver
