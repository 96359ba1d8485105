#include "berm/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "berm/errors.hpp"
#include "berm/metrics.hpp"
#include "berm/seed.hpp"

namespace berm::simgen {

std::pair<Vector, Mask> generate_coefficients(int p, double sparsity, std::uint64_t seed) {
    if (p < 1) throw InvalidArgument("p must be positive");
    if (!(sparsity >= 0.0 && sparsity <= 1.0)) throw InvalidArgument("sparsity must lie in [0, 1]");
    const int nonzero = static_cast<int>(std::floor(p * (1.0 - sparsity) + 0.5));

    Rng rng = make_rng(seed);
    std::vector<int> idx(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates: the first `nonzero` slots are a uniform subset.
    for (int i = 0; i < nonzero; ++i) {
        const auto j = i + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(p - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    std::sort(idx.begin(), idx.begin() + nonzero);

    Vector beta = Vector::Zero(p);
    Mask support(static_cast<std::size_t>(p), false);
    StandardNormal normal;
    for (int i = 0; i < nonzero; ++i) {
        const int j = idx[static_cast<std::size_t>(i)];
        double v = 0.0;
        while (v == 0.0) v = 4.0 * normal(rng);
        beta[j] = v;
        support[static_cast<std::size_t>(j)] = true;
    }
    return {beta, support};
}

Vector generate_response(const Matrix& X, const Vector& beta, double sigma, std::uint64_t seed) {
    if (X.cols() != beta.size()) throw DimensionMismatch("X and beta disagree on p");
    if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be non-negative");
    Vector y = X * beta;
    if (sigma > 0.0) {
        Rng rng = make_rng(seed);
        StandardNormal normal;
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += sigma * normal(rng);
    }
    return y;
}

Matrix generate_simple(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
    if (n < 1 || p < 1) throw InvalidArgument("n and p must be positive");
    Rng rng = make_rng(seed);
    StandardNormal normal;
    Matrix X(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) X(i, j) = normal(rng);
    return X;
}

void Scenario::validate() const {
    if (n < 2) throw InvalidArgument("scenario '" + id + "': n must be >= 2");
    if (p < 1) throw InvalidArgument("scenario '" + id + "': p must be >= 1");
    if (!(sparsity >= 0.0 && sparsity <= 1.0))
        throw InvalidArgument("scenario '" + id + "': sparsity must lie in [0, 1]");
    if (!(sigma > 0.0)) throw InvalidArgument("scenario '" + id + "': sigma must be > 0");
    if (!(target_skewness >= 0.0) || !(target_kurtosis >= 0.0))
        throw InvalidArgument("scenario '" + id + "': targets must be non-negative");
    if (!simple) {
        cov_spec.validate();
        if (cov_spec.dimension() != p)
            throw InvalidArgument("scenario '" + id + "': covariance blocks sum to " +
                                  std::to_string(cov_spec.dimension()) + ", p is " +
                                  std::to_string(p));
    }
}

SimulatedDataset realize_scenario(const Scenario& s, const TransformFitOptions& fit_opts) {
    s.validate();
    Matrix sigma_true;
    Matrix X;
    if (s.simple) {
        sigma_true = Matrix::Identity(s.p, s.p);
        X = generate_simple(s.n, s.p, derive_seed(s.seed, "design"));
    } else {
        sigma_true = build_covariance(s.cov_spec, derive_seed(s.seed, "covariance"));
        const Matrix reference = fit_opts.fit_per_dataset
                                     ? sigma_true
                                     : build_covariance(s.cov_spec,
                                                        derive_seed(fit_opts.fit_seed, "reference-covariance"));
        const TransformFit fit =
            fit_transform(reference, s.target_skewness, s.target_kurtosis, fit_opts);
        X = generate_with_transform(s.n, sigma_true, fit.transform, derive_seed(s.seed, "design"));
    }
    auto [beta, support] =
        generate_coefficients(s.p, s.sparsity, derive_seed(s.beta_seed.value_or(s.seed), "coefficients"));
    Vector y = generate_response(X, beta, s.sigma, derive_seed(s.seed, "noise"));

    std::optional<double> skew, kurt;
    if (s.n > s.p) {
        try {
            const auto m = metrics::mardia(X, fit_opts.threads);
            skew = m.skewness;
            kurt = m.kurtosis;
        } catch (const SingularCovariance&) {
        }
    }
    return SimulatedDataset{Dataset(std::move(X), std::move(y)), std::move(beta), std::move(support),
                            std::move(sigma_true), skew, kurt};
}

}  // namespace berm::simgen
