#include "berm/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "berm/errors.hpp"
#include "berm/parallel.hpp"
#include "berm/seed.hpp"

namespace berm::selection {

double quantile_type7(std::vector<double> values, double q) {
    if (values.empty()) throw InvalidArgument("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = static_cast<double>(values.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

Mask relevance_from_ci(const Vector& ci_lower, const Vector& ci_upper) {
    if (ci_lower.size() != ci_upper.size()) throw DimensionMismatch("interval bounds differ in length");
    Mask r(static_cast<std::size_t>(ci_lower.size()));
    for (Eigen::Index j = 0; j < ci_lower.size(); ++j) {
        if (ci_lower[j] > ci_upper[j]) throw InvalidArgument("ci_lower exceeds ci_upper");
        const bool covers_zero = ci_lower[j] <= 0.0 && 0.0 <= ci_upper[j];
        r[static_cast<std::size_t>(j)] = !covers_zero;
    }
    return r;
}

namespace {

std::vector<Eigen::Index> draw_with_replacement(int, Eigen::Index n, Rng& rng) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (auto& i : idx) i = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    return idx;
}

}  // namespace

BootstrapSummary bootstrap_coefficients(const StandardizedDesign& sd, double alpha,
                                        std::uint64_t seed, const BootstrapOptions& opts) {
    if (opts.B < 2) throw InvalidArgument("bootstrap needs B >= 2");
    const Eigen::Index p = sd.p();
    const Vector ones = Vector::Ones(p);
    const Dataset full(sd.Xs, sd.yc);
    const auto resample = opts.resampler ? opts.resampler : draw_with_replacement;

    solver::CvOptions cv = opts.cv;
    cv.threads = 1;

    // Fast mode: one lambda from the full data, reused by every replicate.
    std::optional<solver::CvResult> shared;
    if (!opts.retune_per_replicate)
        shared = solver::cv_select_lambda(sd, alpha, ones, derive_seed(seed, "shared-lambda"), cv);

    BootstrapSummary out;
    out.B = opts.B;
    out.coef_samples.resize(opts.B, p);
    parallel_for(static_cast<std::size_t>(opts.B), opts.threads, [&](std::size_t bi) {
        const int b = static_cast<int>(bi);
        const std::uint64_t rep_seed = derive_seed(seed, static_cast<std::uint64_t>(b));
        Rng rng = make_rng(rep_seed);
        for (int attempt = 0; attempt <= opts.max_redraws; ++attempt) {
            try {
                const StandardizedDesign rs = standardize(full.rows(resample(b, sd.n(), rng)));
                Vector beta;
                if (shared) {
                    const Vector head = shared->lambda_grid.head(shared->best_index + 1);
                    const Matrix path = solver::fit_path(solver::Gram(rs), alpha, ones, head, cv.cd);
                    beta = path.col(path.cols() - 1);
                } else {
                    beta = solver::cv_fit(rs, alpha, ones, derive_seed(rep_seed, "cv"),
                                          Method::enet, cv)
                               .fit.beta;
                }
                out.coef_samples.row(b) = beta.transpose();
                return;
            } catch (const ConstantColumn&) {
                // redraw from the same stream
            }
        }
        throw DegenerateResample(b);
    });

    out.ci_lower.resize(p);
    out.ci_upper.resize(p);
    std::vector<double> column(static_cast<std::size_t>(opts.B));
    for (Eigen::Index j = 0; j < p; ++j) {
        for (int b = 0; b < opts.B; ++b) column[static_cast<std::size_t>(b)] = out.coef_samples(b, j);
        out.ci_lower[j] = quantile_type7(column, opts.lower_q);
        out.ci_upper[j] = quantile_type7(column, opts.upper_q);
    }
    out.relevance = relevance_from_ci(out.ci_lower, out.ci_upper);
    return out;
}

BermResult berm_refit(const StandardizedDesign& sd, const Mask& relevance, double alpha,
                      std::uint64_t seed, const solver::CvOptions& cv) {
    if (static_cast<Eigen::Index>(relevance.size()) != sd.p())
        throw DimensionMismatch("relevance has wrong length");
    Vector weights(sd.p());
    bool any = false;
    for (Eigen::Index j = 0; j < sd.p(); ++j) {
        const bool r = relevance[static_cast<std::size_t>(j)];
        weights[j] = r ? 1.0 : solver::kInfiniteWeight;
        any = any || r;
    }

    BermResult out;
    if (!any) {
        out.fit = FitResult::from_beta(Vector::Zero(sd.p()), 0.0, alpha, Method::berm, weights);
        out.fit.warning = "EmptyRelevantSet: no variable survived bootstrap screening";
        out.empty_relevant_set = true;
        solver::notify_fit(sd, out.fit);
        return out;
    }
    solver::CvFit fitted = solver::cv_fit(sd, alpha, weights, seed, Method::berm, cv);
    out.fit = std::move(fitted.fit);
    out.cv = std::move(fitted.cv);
    return out;
}

BermResult berm_fit(const StandardizedDesign& sd, double alpha, std::uint64_t seed,
                    const BootstrapOptions& opts) {
    BootstrapSummary boot = bootstrap_coefficients(sd, alpha, derive_seed(seed, "bootstrap"), opts);
    solver::CvOptions cv = opts.cv;
    cv.threads = std::max(cv.threads, opts.threads);
    BermResult out = berm_refit(sd, boot.relevance, alpha, derive_seed(seed, "refit"), cv);
    out.bootstrap = std::move(boot);
    return out;
}

Vector adaptive_weights(const Vector& beta_init, const AdaptiveOptions& opts) {
    Vector w(beta_init.size());
    for (Eigen::Index j = 0; j < w.size(); ++j)
        w[j] = 1.0 / std::pow(std::abs(beta_init[j]) + opts.tau, opts.gamma);
    return w;
}

FitResult baseline_fit(const StandardizedDesign& sd, Method method, std::uint64_t seed,
                       const solver::CvOptions& cv, const AdaptiveOptions& adaptive) {
    const Vector ones = Vector::Ones(sd.p());
    switch (method) {
        case Method::lasso: return solver::cv_fit(sd, 1.0, ones, seed, method, cv).fit;
        case Method::enet: return solver::cv_fit(sd, 0.5, ones, seed, method, cv).fit;
        case Method::alasso:
        case Method::aenet: {
            const FitResult init = solver::cv_fit(sd, adaptive.init_alpha, ones,
                                                  derive_seed(seed, "initial"), method, cv)
                                       .fit;
            const Vector w = adaptive_weights(init.beta, adaptive);
            const double alpha = method == Method::alasso ? 1.0 : 0.5;
            return solver::cv_fit(sd, alpha, w, derive_seed(seed, "adaptive"), method, cv).fit;
        }
        case Method::berm: break;
    }
    throw InvalidArgument("baseline_fit does not handle BERM; use berm_fit");
}

}  // namespace berm::selection
