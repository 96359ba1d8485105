#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace berm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = std::vector<bool>;

enum class Method { berm, lasso, enet, alasso, aenet };

std::string_view to_string(Method m) noexcept;
// Throws InvalidArgument for an unknown tag.
Method parse_method(std::string_view tag);

// Design matrix (rows = observations) plus response. Validated on
// construction: n >= 2, p >= 1, every value finite, names (if any) unique and
// exactly p of them.
class Dataset {
public:
    Dataset(Matrix X, Vector y, std::vector<std::string> feature_names = {});

    const Matrix& X() const noexcept { return X_; }
    const Vector& y() const noexcept { return y_; }
    const std::vector<std::string>& feature_names() const noexcept { return names_; }
    Eigen::Index n() const noexcept { return X_.rows(); }
    Eigen::Index p() const noexcept { return X_.cols(); }

    // Rows selected by index, repeats allowed (bootstrap resamples, CV folds).
    Dataset rows(const std::vector<Eigen::Index>& idx) const;

private:
    Matrix X_;
    Vector y_;
    std::vector<std::string> names_;
};

// Column-standardized design and mean-corrected response. Scales are
// population SDs, so every column of Xs satisfies x'x/n == 1.
struct StandardizedDesign {
    Matrix Xs;
    Vector yc;
    Vector col_means;
    Vector col_scales;
    double y_mean = 0.0;

    Eigen::Index n() const noexcept { return Xs.rows(); }
    Eigen::Index p() const noexcept { return Xs.cols(); }
};

struct FitResult {
    Vector beta;      // standardized scale
    Mask selected;    // selected[j] == (beta[j] != 0)
    double lambda = 0.0;
    double alpha = 1.0;
    Method method = Method::enet;
    Vector weights;   // penalty weights used by the final fit; +inf marks exclusion
    // Set when the fit is a fallback zero model (BERM with nothing relevant).
    std::optional<std::string> warning;

    static FitResult from_beta(Vector beta, double lambda, double alpha, Method method,
                               Vector weights);
    Eigen::Index n_selected() const noexcept;
};

// Throws ConstantColumn(j) for a zero-variance column.
StandardizedDesign standardize(const Dataset& d);

// Reconstruct the raw design from a standardized one.
Matrix destandardize(const StandardizedDesign& sd);

// Standardize new rows with training statistics.
Matrix apply_standardization(const StandardizedDesign& sd, const Matrix& X_new);

// y_mean + ((X_new - means) / scales) * beta. Throws DimensionMismatch.
Vector predict(const FitResult& fit, const StandardizedDesign& sd, const Matrix& X_new);

// beta_j / scale_j: the coefficient per unit of the raw predictor.
Vector raw_coefficients(const FitResult& fit, const StandardizedDesign& sd);

// 1 - SS_res / SS_tot. Throws ConstantResponse, DimensionMismatch.
double r_squared(const Vector& y_true, const Vector& y_pred);

}  // namespace berm
