#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <future>
#include <map>
#include <mutex>
#include <string>

#include "berm/errors.hpp"
#include "berm/metrics.hpp"
#include "berm/seed.hpp"
#include "berm/simgen.hpp"

namespace berm::simgen {

namespace {

constexpr double kHalfWidth = 14.0;
constexpr int kNodes = 7001;

double sas_raw(double z, double epsilon, double delta) noexcept {
    return std::sinh((std::asinh(z) + epsilon) / delta);
}

}  // namespace

// Hermite coefficients a_k = E[t(Z) He_k(Z)] / sqrt(k!) by trapezoid
// quadrature against the normal density. Then
//   corr(t(Z1), t(Z2)) = sum_{k>=1} a_k^2 r^k / sum_{k>=1} a_k^2.
MarginalTransform::MarginalTransform(double epsilon, double delta, int hermite_order)
    : epsilon_(epsilon), delta_(delta) {
    if (!std::isfinite(epsilon) || !(delta >= 0.1 && delta <= 10.0))
        throw InvalidArgument("sinh-arcsinh transform needs finite epsilon and delta in [0.1, 10]");
    if (is_identity()) {
        hermite_sq_ = {1.0};
        return;
    }
    const int K = hermite_order;
    std::vector<double> coef(static_cast<std::size_t>(K + 1), 0.0);
    std::vector<double> herm(static_cast<std::size_t>(K + 1));
    const double step = 2.0 * kHalfWidth / (kNodes - 1);
    const double norm = step / std::sqrt(2.0 * M_PI);
    double second = 0.0;
    for (int i = 0; i < kNodes; ++i) {
        const double z = -kHalfWidth + step * i;
        const double w = norm * std::exp(-0.5 * z * z) * ((i == 0 || i == kNodes - 1) ? 0.5 : 1.0);
        const double t = sas_raw(z, epsilon, delta);
        herm[0] = 1.0;
        herm[1] = z;
        for (std::size_t k = 1; k < static_cast<std::size_t>(K); ++k) {
            const double kd = static_cast<double>(k);
            herm[k + 1] = (z * herm[k] - std::sqrt(kd) * herm[k - 1]) / std::sqrt(kd + 1.0);
        }
        for (std::size_t k = 0; k <= static_cast<std::size_t>(K); ++k) coef[k] += w * t * herm[k];
        second += w * t * t;
    }
    mean_ = coef[0];
    sd_ = std::sqrt(second - mean_ * mean_);
    hermite_sq_.assign(coef.begin() + 1, coef.end());
    for (double& a : hermite_sq_) a *= a;
}

double MarginalTransform::raw(double z) const noexcept { return sas_raw(z, epsilon_, delta_); }

double MarginalTransform::output_correlation(double r) const noexcept {
    double num = 0.0;
    double den = 0.0;
    for (auto it = hermite_sq_.rbegin(); it != hermite_sq_.rend(); ++it) {
        num = (num + *it) * r;
        den += *it;
    }
    return num / den;
}

double MarginalTransform::intermediate_correlation(double rho) const noexcept {
    if (is_identity()) return rho;
    double lo = rho >= 0.0 ? 0.0 : -1.0;
    double hi = rho >= 0.0 ? 1.0 : 0.0;
    if (output_correlation(lo) >= rho) return lo;
    if (output_correlation(hi) <= rho) return hi;
    for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        (output_correlation(mid) < rho ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Matrix intermediate_correlation(const Matrix& Sigma, const MarginalTransform& t) {
    if (t.is_identity()) return Sigma;
    const Eigen::Index p = Sigma.rows();
    Matrix R = Matrix::Identity(p, p);
    std::map<double, double> memo;
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = j + 1; i < p; ++i) {
            const double rho = Sigma(i, j);
            auto it = memo.find(rho);
            if (it == memo.end()) it = memo.emplace(rho, t.intermediate_correlation(rho)).first;
            R(i, j) = R(j, i) = it->second;
        }
    }
    return nearest_correlation_pd(R);
}

namespace {

Matrix standard_normal_matrix(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    StandardNormal normal;
    Matrix Z(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) Z(i, j) = normal(rng);
    return Z;
}

Matrix cholesky_factor(const Matrix& R) {
    Eigen::LLT<Matrix> llt(R);
    if (llt.info() != Eigen::Success) {
        llt.compute(nearest_correlation_pd(R));
        if (llt.info() != Eigen::Success) throw Error("correlation matrix is not positive definite");
    }
    return llt.matrixL();
}

// Correlate, then transform elementwise.
Matrix transform_sample(const Matrix& white, const Matrix& Sigma, const MarginalTransform& t) {
    const Matrix L = cholesky_factor(intermediate_correlation(Sigma, t));
    Matrix X = white * L.transpose();
    if (t.is_identity()) return X;
    X = X.unaryExpr([&](double z) { return t.standardized(z); });
    if (X.rows() <= X.cols()) return X;

    // Heavy tails make the sample covariance converge slowly, so map the
    // sample onto Sigma exactly. Affine, hence Mardia statistics are untouched.
    X.rowwise() -= X.colwise().mean();
    Matrix S = Matrix::Zero(X.cols(), X.cols());
    S.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose(), 1.0 / static_cast<double>(X.rows()));
    const Eigen::LLT<Matrix> ls(S.selfadjointView<Eigen::Lower>());
    if (ls.info() != Eigen::Success) return X;
    const Matrix LS = cholesky_factor(Sigma);
    ls.matrixU().solveInPlace<Eigen::OnTheRight>(X);  // X L_S^{-T}: identity sample covariance
    return X * LS.transpose();
}

struct Evaluation {
    double eps = 0.0, delta = 1.0;
    double skew = 0.0, kurt = 0.0;
    double loss = 0.0;
};


std::string cache_key(const Matrix& Sigma, double ts, double tk, const TransformFitOptions& o,
                      int n_fit) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    const auto* bytes = reinterpret_cast<const unsigned char*>(Sigma.data());
    for (std::size_t i = 0; i < static_cast<std::size_t>(Sigma.size()) * sizeof(double); ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ULL;
    }
    char buf[256];
    std::snprintf(buf, sizeof buf, "%016llx|%ld|%.17g|%.17g|%d|%d|%d|%.17g|%.17g|%llu",
                  static_cast<unsigned long long>(hash), static_cast<long>(Sigma.rows()), ts, tk,
                  n_fit, o.fit_replicates, o.max_evals, o.success_tol, o.failure_tol,
                  static_cast<unsigned long long>(o.fit_seed));
    return buf;
}

std::mutex g_cache_mutex;
std::map<std::string, std::shared_future<TransformFit>> g_cache;

TransformFit fit_uncached(const Matrix& Sigma, double ts, double tk, const TransformFitOptions& o,
                          int n_fit) {
    const Eigen::Index p = Sigma.rows();
    const int reps = std::max(o.fit_replicates, 1);
    std::vector<Matrix> white;
    for (int r = 0; r < reps; ++r)
        white.push_back(standard_normal_matrix(n_fit, p, derive_seed(o.fit_seed, static_cast<std::uint64_t>(r))));
    const bool symmetric = ts == 0.0;
    constexpr double kMaxEps = 3.0;
    constexpr double kMinDelta = 0.15;
    constexpr double kMaxDelta = 3.0;

    int evals = 0;
    Evaluation best;
    best.loss = std::numeric_limits<double>::infinity();

    // Residuals in log space, Mardia statistics averaged over the common
    // random samples.
    auto evaluate = [&](double eps, double delta) {
        const MarginalTransform t(eps, delta);
        double skew = 0.0, kurt = 0.0;
        for (const Matrix& w : white) {
            const metrics::MardiaStats m = metrics::mardia(transform_sample(w, Sigma, t), o.threads);
            skew += m.skewness / reps;
            kurt += m.kurtosis / reps;
        }
        ++evals;
        Eigen::Vector2d r(symmetric ? 0.0 : std::log(std::max(skew, 1e-300) / ts), std::log(kurt / tk));
        const double loss = r.squaredNorm();
        if (loss < best.loss) best = Evaluation{eps, delta, skew, kurt, loss};
        return r;
    };
    auto project = [&](Eigen::Vector2d x) {
        x[0] = symmetric ? 0.0 : std::clamp(x[0], 0.0, kMaxEps);
        x[1] = std::clamp(x[1], kMinDelta, kMaxDelta);
        return x;
    };
    auto converged = [&] {
        const bool skew_ok = symmetric || std::abs(std::log(best.skew / ts)) < o.success_tol;
        return skew_ok && std::abs(std::log(best.kurt / tk)) < o.success_tol;
    };

    // Projected Levenberg-Marquardt with a forward-difference Jacobian.
    Eigen::Vector2d x = project(Eigen::Vector2d(symmetric ? 0.0 : 0.5, 0.6));
    Eigen::Vector2d r = evaluate(x[0], x[1]);
    double mu = 1e-2;
    const Eigen::Vector2d fd_step(0.01, 0.002);
    bool stalled = false;
    while (evals + 3 <= o.max_evals && !converged()) {
        Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
        for (int k = symmetric ? 1 : 0; k < 2; ++k) {
            Eigen::Vector2d xs = x;
            // Step inward at the upper bound.
            xs[k] += (x[k] + fd_step[k] > (k == 0 ? kMaxEps : kMaxDelta)) ? -fd_step[k] : fd_step[k];
            J.col(k) = (evaluate(xs[0], xs[1]) - r) / (xs[k] - x[k]);
        }
        bool improved = false;
        while (evals < o.max_evals) {
            Eigen::Matrix2d A = J.transpose() * J;
            A.diagonal() += mu * A.diagonal().cwiseMax(1e-12);
            if (symmetric) {
                A(0, 0) = 1.0;
                A(0, 1) = A(1, 0) = 0.0;
            }
            Eigen::Vector2d step = A.ldlt().solve(-J.transpose() * r);
            if (symmetric) step[0] = 0.0;
            const Eigen::Vector2d trial = project(x + step);
            if ((trial - x).norm() < 1e-7) break;
            const Eigen::Vector2d rt = evaluate(trial[0], trial[1]);
            if (rt.squaredNorm() < r.squaredNorm()) {
                // Unreachable target pairs end on a compromise; stop once it stalls.
                stalled = r.squaredNorm() - rt.squaredNorm() < 1e-3 * r.squaredNorm();
                x = trial;
                r = rt;
                mu = std::max(mu / 3.0, 1e-6);
                improved = true;
                break;
            }
            mu *= 4.0;
            if (mu > 1e6) break;
        }
        if (!improved || stalled) break;
    }

    const double skew_err = symmetric ? 0.0 : std::abs(std::log(best.skew / ts));
    const double kurt_err = std::abs(std::log(best.kurt / tk));
    if (std::max(skew_err, kurt_err) > o.failure_tol) {
        char msg[256];
        std::snprintf(msg, sizeof msg,
                      "no sinh-arcsinh transform reaches skewness %.6g / kurtosis %.6g (best %.6g / %.6g "
                      "after %d evaluations)",
                      ts, tk, best.skew, best.kurt, evals);
        throw TransformFitFailure(msg);
    }
    return TransformFit{MarginalTransform(best.eps, best.delta), best.skew, best.kurt, evals};
}

}  // namespace

TransformFit fit_transform(const Matrix& Sigma, double target_skew, double target_kurt,
                           const TransformFitOptions& opts) {
    const Eigen::Index p = Sigma.rows();
    if (Sigma.cols() != p) throw DimensionMismatch("Sigma must be square");
    if (!(target_skew >= 0.0) || !(target_kurt > 0.0))
        throw InvalidArgument("targets must be non-negative (kurtosis positive)");
    const double normal_kurt = static_cast<double>(p * (p + 2));
    if (target_skew == 0.0 && std::abs(target_kurt - normal_kurt) <= 1e-9 * normal_kurt)
        return TransformFit{MarginalTransform(), 0.0, normal_kurt, 0};

    const int n_fit = opts.fit_sample > 0 ? opts.fit_sample
                                          : (p <= 100 ? 20000 : static_cast<int>(5 * p));
    if (n_fit <= p) throw InvalidArgument("fit_sample must exceed p");
    if (!opts.use_cache) return fit_uncached(Sigma, target_skew, target_kurt, opts, n_fit);

    const std::string key = cache_key(Sigma, target_skew, target_kurt, opts, n_fit);
    std::promise<TransformFit> promise;
    std::shared_future<TransformFit> future;
    bool owner = false;
    {
        std::lock_guard lock(g_cache_mutex);
        auto it = g_cache.find(key);
        if (it == g_cache.end()) {
            future = promise.get_future().share();
            g_cache.emplace(key, future);
            owner = true;
        } else {
            future = it->second;
        }
    }
    if (owner) {
        try {
            promise.set_value(fit_uncached(Sigma, target_skew, target_kurt, opts, n_fit));
        } catch (...) {
            promise.set_exception(std::current_exception());
        }
    }
    return future.get();
}

Matrix generate_with_transform(Eigen::Index n, const Matrix& Sigma, const MarginalTransform& t,
                               std::uint64_t seed) {
    if (n < 1) throw InvalidArgument("n must be positive");
    return transform_sample(standard_normal_matrix(n, Sigma.rows(), seed), Sigma, t);
}

Matrix generate_nonnormal(Eigen::Index n, const Matrix& Sigma, double target_skew,
                          double target_kurt, std::uint64_t seed, const TransformFitOptions& opts) {
    const TransformFit fit = fit_transform(Sigma, target_skew, target_kurt, opts);
    return generate_with_transform(n, Sigma, fit.transform, seed);
}

}  // namespace berm::simgen
