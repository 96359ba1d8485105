#include "berm/model.hpp"

#include <cmath>
#include <unordered_set>

#include "berm/errors.hpp"

namespace berm {

std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::berm: return "berm";
        case Method::lasso: return "lasso";
        case Method::enet: return "enet";
        case Method::alasso: return "alasso";
        case Method::aenet: return "aenet";
    }
    return "?";
}

Method parse_method(std::string_view tag) {
    for (Method m : {Method::berm, Method::lasso, Method::enet, Method::alasso, Method::aenet}) {
        if (to_string(m) == tag) return m;
    }
    throw InvalidArgument("unknown method tag '" + std::string(tag) + "'");
}

Dataset::Dataset(Matrix X, Vector y, std::vector<std::string> feature_names)
    : X_(std::move(X)), y_(std::move(y)), names_(std::move(feature_names)) {
    if (X_.rows() < 2) throw InvalidArgument("dataset needs at least 2 rows");
    if (X_.cols() < 1) throw InvalidArgument("dataset needs at least 1 predictor");
    if (y_.size() != X_.rows())
        throw DimensionMismatch("y has " + std::to_string(y_.size()) + " entries, X has " +
                                std::to_string(X_.rows()) + " rows");
    if (!X_.allFinite()) throw NonFiniteValue("X contains non-finite values");
    if (!y_.allFinite()) throw NonFiniteValue("y contains non-finite values");
    if (!names_.empty()) {
        if (static_cast<Eigen::Index>(names_.size()) != X_.cols())
            throw DimensionMismatch("feature_names must have exactly p entries");
        std::unordered_set<std::string> seen(names_.begin(), names_.end());
        if (seen.size() != names_.size()) throw InvalidArgument("feature names are not unique");
    }
}

Dataset Dataset::rows(const std::vector<Eigen::Index>& idx) const {
    Matrix X(static_cast<Eigen::Index>(idx.size()), X_.cols());
    Vector y(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        X.row(static_cast<Eigen::Index>(i)) = X_.row(idx[i]);
        y[static_cast<Eigen::Index>(i)] = y_[idx[i]];
    }
    return Dataset(std::move(X), std::move(y), names_);
}

FitResult FitResult::from_beta(Vector beta, double lambda, double alpha, Method method,
                               Vector weights) {
    FitResult f;
    f.selected.resize(static_cast<std::size_t>(beta.size()));
    for (Eigen::Index j = 0; j < beta.size(); ++j)
        f.selected[static_cast<std::size_t>(j)] = beta[j] != 0.0;
    f.beta = std::move(beta);
    f.lambda = lambda;
    f.alpha = alpha;
    f.method = method;
    f.weights = std::move(weights);
    return f;
}

Eigen::Index FitResult::n_selected() const noexcept {
    Eigen::Index k = 0;
    for (bool s : selected) k += s;
    return k;
}

StandardizedDesign standardize(const Dataset& d) {
    const auto n = static_cast<double>(d.n());
    StandardizedDesign sd;
    sd.col_means = d.X().colwise().mean().transpose();
    sd.Xs = d.X().rowwise() - sd.col_means.transpose();
    sd.col_scales.resize(d.p());
    for (Eigen::Index j = 0; j < d.p(); ++j) {
        // Two-pass: recentre once more so the mean is zero to working precision.
        const double m = sd.Xs.col(j).mean();
        sd.Xs.col(j).array() -= m;
        sd.col_means[j] += m;
        const double scale = std::sqrt(sd.Xs.col(j).squaredNorm() / n);
        if (!(scale > 0.0) || scale <= 1e-12 * (1.0 + std::abs(sd.col_means[j])))
            throw ConstantColumn(static_cast<std::size_t>(j));
        sd.Xs.col(j) /= scale;
        sd.col_scales[j] = scale;
    }
    sd.y_mean = d.y().mean();
    sd.yc = d.y().array() - sd.y_mean;
    return sd;
}

Matrix destandardize(const StandardizedDesign& sd) {
    Matrix X = sd.Xs * sd.col_scales.asDiagonal();
    X.rowwise() += sd.col_means.transpose();
    return X;
}

Matrix apply_standardization(const StandardizedDesign& sd, const Matrix& X_new) {
    if (X_new.cols() != sd.p())
        throw DimensionMismatch("X_new has " + std::to_string(X_new.cols()) + " columns, expected " +
                                std::to_string(sd.p()));
    Matrix Z = X_new.rowwise() - sd.col_means.transpose();
    Z.array().rowwise() /= sd.col_scales.transpose().array();
    return Z;
}

Vector predict(const FitResult& fit, const StandardizedDesign& sd, const Matrix& X_new) {
    if (fit.beta.size() != sd.p()) throw DimensionMismatch("beta length does not match design");
    Vector out = apply_standardization(sd, X_new) * fit.beta;
    out.array() += sd.y_mean;
    return out;
}

Vector raw_coefficients(const FitResult& fit, const StandardizedDesign& sd) {
    if (fit.beta.size() != sd.p()) throw DimensionMismatch("beta length does not match design");
    return fit.beta.cwiseQuotient(sd.col_scales);
}

double r_squared(const Vector& y_true, const Vector& y_pred) {
    if (y_true.size() != y_pred.size()) throw DimensionMismatch("r_squared: length mismatch");
    if (y_true.size() < 2) throw InvalidArgument("r_squared needs at least 2 observations");
    const double mean = y_true.mean();
    const double ss_tot = (y_true.array() - mean).square().sum();
    if (!(ss_tot > 0.0)) throw ConstantResponse();
    const double ss_res = (y_true - y_pred).squaredNorm();
    return 1.0 - ss_res / ss_tot;
}

}  // namespace berm
