#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "berm/model.hpp"

namespace berm::simgen {

// Unit diagonal, off-diagonals i.i.d. U(low, high).
struct UniformBlock {
    int size = 0;
    double low = 0.0;
    double high = 0.0;
};

// Unit diagonal, off-diagonals all `value`.
struct ConstantBlock {
    int size = 0;
    double value = 0.0;
};

struct IdentityBlock {
    int size = 0;
};

using Block = std::variant<UniformBlock, ConstantBlock, IdentityBlock>;

// Fills the rectangle between diagonal blocks `first` and `second` (0-based)
// with `value`, symmetrically.
struct Coupling {
    int first = 0;
    int second = 0;
    double value = 0.0;
};

struct CovarianceSpec {
    std::vector<Block> blocks;
    std::vector<Coupling> couplings;

    int dimension() const noexcept;
    // Throws InvalidArgument.
    void validate() const;

    // p = 60: U(0.6,1) x20, U(0.3,0.5) x20, J_0.05 x20, coupling (1,2) = 0.2.
    static CovarianceSpec moderate();
    // p = 500: U(0.6,1) x100, U(0.3,0.5) x100, J_0.1 x100, coupling (1,2) = 0.1,
    // I x200.
    static CovarianceSpec high_dimensional();
};

int block_size(const Block& b) noexcept;

// Symmetric positive-definite matrix with unit diagonal, deterministic in
// `seed`. Indefinite assemblies are repaired with nearest_correlation_pd.
Matrix build_covariance(const CovarianceSpec& spec, std::uint64_t seed);

// Eigenvalue clipping at `floor` followed by diagonal renormalization to 1.
// Returns the input unchanged when it is already PD at that floor.
Matrix nearest_correlation_pd(const Matrix& S, double floor = 1e-6);

// Sinh-arcsinh marginal transform t(z) = sinh((asinh(z) + epsilon) / delta).
// epsilon shifts mass to one tail (skewness), delta < 1 fattens both tails
// and delta > 1 thins them. (0, 1) is the identity.
class MarginalTransform {
public:
    explicit MarginalTransform(double epsilon = 0.0, double delta = 1.0, int hermite_order = 80);

    double epsilon() const noexcept { return epsilon_; }
    double delta() const noexcept { return delta_; }
    bool is_identity() const noexcept { return epsilon_ == 0.0 && delta_ == 1.0; }

    double raw(double z) const noexcept;
    // (t(z) - mean) / sd: zero mean and unit variance under z ~ N(0,1).
    double standardized(double z) const noexcept { return (raw(z) - mean_) / sd_; }
    double mean() const noexcept { return mean_; }
    double sd() const noexcept { return sd_; }

    // Correlation of t(Z1), t(Z2) when corr(Z1, Z2) = r.
    double output_correlation(double r) const noexcept;
    // The r in [-1, 1] that produces output correlation rho (clamped when rho
    // is outside the reachable range).
    double intermediate_correlation(double rho) const noexcept;

private:
    double epsilon_;
    double delta_;
    double mean_ = 0.0;
    double sd_ = 1.0;
    std::vector<double> hermite_sq_;  // squared normalized Hermite coefficients, k >= 1
};

// Intermediate correlation matrix for a marginal transform, made PD.
Matrix intermediate_correlation(const Matrix& Sigma, const MarginalTransform& t);

struct TransformFitOptions {
    int fit_sample = 0;            // rows per sample; 0: 20000 when p <= 100, else 5p
    int fit_replicates = 4;        // Mardia estimates averaged over this many samples
    int max_evals = 60;
    double success_tol = 0.02;     // stop when both log-ratio errors are below
    double failure_tol = 0.10;     // TransformFitFailure above this
    std::uint64_t fit_seed = 0x5eed5eedULL;
    int threads = 1;
    bool use_cache = true;
    // realize_scenario fits the transform once per covariance spec, on a
    // reference matrix built from fit_seed, and applies it to every
    // replicate's own matrix. Set to fit on each replicate's matrix instead.
    bool fit_per_dataset = false;
};

struct TransformFit {
    MarginalTransform transform;
    double fitted_skewness = 0.0;  // Monte-Carlo Mardia estimates at fit_sample
    double fitted_kurtosis = 0.0;
    int evaluations = 0;
};

// Fit of (epsilon, delta) so that Monte-Carlo Mardia skewness/kurtosis
// of the generated sample match the targets. Normal targets (skew 0, kurt
// p(p+2)) return the identity without sampling. Throws TransformFitFailure.
TransformFit fit_transform(const Matrix& Sigma, double target_skew, double target_kurt,
                           const TransformFitOptions& opts = {});

// n x p sample: Z ~ N(0, R) with R the intermediate correlation, then the
// standardized marginal transform elementwise.
Matrix generate_with_transform(Eigen::Index n, const Matrix& Sigma, const MarginalTransform& t,
                               std::uint64_t seed);

Matrix generate_nonnormal(Eigen::Index n, const Matrix& Sigma, double target_skew,
                          double target_kurt, std::uint64_t seed,
                          const TransformFitOptions& opts = {});

// round(p (1 - sparsity)) positions (round half up) get N(0, 4^2) draws.
std::pair<Vector, Mask> generate_coefficients(int p, double sparsity, std::uint64_t seed);

// y = X beta + eps, eps ~ N(0, sigma^2). sigma == 0 is allowed.
Vector generate_response(const Matrix& X, const Vector& beta, double sigma, std::uint64_t seed);

// i.i.d. N(0,1) entries.
Matrix generate_simple(Eigen::Index n, Eigen::Index p, std::uint64_t seed);

struct Scenario {
    std::string id;
    int n = 300;
    int p = 60;
    double sparsity = 0.5;
    double sigma = 1.0;
    CovarianceSpec cov_spec = CovarianceSpec::moderate();
    double target_skewness = 5000.0;
    double target_kurtosis = 25000.0;
    bool simple = false;
    std::uint64_t seed = 0;
    // When set, coefficients come from this seed instead of `seed`, so they
    // stay fixed across replicates.
    std::optional<std::uint64_t> beta_seed;

    // Throws InvalidArgument.
    void validate() const;
};

struct SimulatedDataset {
    Dataset dataset;
    Vector beta_true;
    Mask support_true;
    Matrix sigma_true;                    // realized covariance (identity when simple)
    std::optional<double> achieved_skewness;  // empty when n <= p
    std::optional<double> achieved_kurtosis;
};

SimulatedDataset realize_scenario(const Scenario& s, const TransformFitOptions& fit_opts = {});

}  // namespace berm::simgen
