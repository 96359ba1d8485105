#include <algorithm>
#include <cmath>
#include <numeric>

#include "berm/errors.hpp"
#include "berm/parallel.hpp"
#include "berm/seed.hpp"
#include "berm/solver.hpp"

namespace berm::solver {

std::vector<int> assign_folds(Eigen::Index n, int k, std::uint64_t seed) {
    if (k < 2) throw InvalidArgument("k must be >= 2");
    if (n < k) throw InvalidArgument("need at least k rows for k-fold CV");
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    Rng rng = make_rng(seed);
    shuffle(perm, rng);
    std::vector<int> fold(static_cast<std::size_t>(n));
    for (std::size_t pos = 0; pos < perm.size(); ++pos)
        fold[static_cast<std::size_t>(perm[pos])] = static_cast<int>(pos % static_cast<std::size_t>(k));
    return fold;
}

namespace {

// Held-out mean squared error along the grid for one fold.
Vector fold_errors(const StandardizedDesign& sd, const std::vector<int>& folds, int fold,
                   double alpha, const Vector& weights, const Vector& grid, const CdOptions& cd) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t i = 0; i < folds.size(); ++i)
        (folds[i] == fold ? test : train).push_back(static_cast<Eigen::Index>(i));

    const Dataset full(sd.Xs, sd.yc);
    const StandardizedDesign tr = standardize(full.rows(train));
    const Matrix path = fit_path(Gram(tr), alpha, weights, grid, cd);

    // held-out rows taken directly: a single row is not a valid Dataset
    Matrix Xh(static_cast<Eigen::Index>(test.size()), sd.p());
    Vector yh(Xh.rows());
    for (Eigen::Index r = 0; r < Xh.rows(); ++r) {
        Xh.row(r) = sd.Xs.row(test[static_cast<std::size_t>(r)]);
        yh[r] = sd.yc[test[static_cast<std::size_t>(r)]];
    }
    Matrix pred = apply_standardization(tr, Xh) * path;
    pred.array() += tr.y_mean;
    pred.colwise() -= yh;
    return pred.array().square().colwise().mean().transpose();
}

}  // namespace

CvResult cv_select_lambda(const StandardizedDesign& sd, double alpha, const Vector& weights,
                          std::uint64_t seed, const CvOptions& opts) {
    CvResult out;
    out.fold_assignment_seed = seed;
    out.lambda_grid = opts.grid ? *opts.grid
                                : lambda_grid(sd, alpha, weights, opts.n_lambda,
                                              opts.ratio.value_or(default_lambda_ratio(sd.n(), sd.p())));
    const Vector& grid = out.lambda_grid;
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        if (!(grid[k] > 0.0)) throw InvalidArgument("lambda grid must be positive");
        if (k > 0 && !(grid[k] < grid[k - 1]))
            throw InvalidArgument("lambda grid must be strictly decreasing");
    }

    const std::vector<int> folds = assign_folds(sd.n(), opts.k, seed);
    Matrix errors(grid.size(), opts.k);
    parallel_for(static_cast<std::size_t>(opts.k), opts.threads, [&](std::size_t f) {
        errors.col(static_cast<Eigen::Index>(f)) =
            fold_errors(sd, folds, static_cast<int>(f), alpha, weights, grid, opts.cd);
    });

    const double k = static_cast<double>(opts.k);
    out.cv_mean_error = errors.rowwise().mean();
    out.cv_se.resize(grid.size());
    for (Eigen::Index l = 0; l < grid.size(); ++l) {
        const double var =
            (errors.row(l).array() - out.cv_mean_error[l]).square().sum() / (k - 1.0);
        out.cv_se[l] = std::sqrt(var / k);
    }

    // Strict comparison over a descending grid keeps the larger lambda on ties.
    Eigen::Index best = 0;
    for (Eigen::Index l = 1; l < grid.size(); ++l)
        if (out.cv_mean_error[l] < out.cv_mean_error[best]) best = l;
    if (opts.one_se_rule) {
        const double bound = out.cv_mean_error[best] + out.cv_se[best];
        for (Eigen::Index l = 0; l <= best; ++l) {
            if (out.cv_mean_error[l] <= bound) {
                best = l;
                break;
            }
        }
    }
    out.best_index = best;
    out.lambda_best = grid[best];
    return out;
}

CvFit cv_fit(const StandardizedDesign& sd, double alpha, const Vector& weights, std::uint64_t seed,
             Method method, const CvOptions& opts) {
    CvResult cv = cv_select_lambda(sd, alpha, weights, seed, opts);
    const Vector head = cv.lambda_grid.head(cv.best_index + 1);
    const Matrix path = fit_path(Gram(sd), alpha, weights, head, opts.cd);
    FitResult fit = FitResult::from_beta(path.col(path.cols() - 1), cv.lambda_best, alpha, method,
                                         weights);
    notify_fit(sd, fit);
    return CvFit{std::move(fit), std::move(cv)};
}

}  // namespace berm::solver
