#pragma once

#include <optional>

#include "berm/model.hpp"

namespace berm::metrics {

struct SelectionConfusion {
    long tp = 0;
    long fp = 0;
    long tn = 0;
    long fn = 0;

    long total() const noexcept { return tp + fp + tn + fn; }
};

struct MetricsReport {
    SelectionConfusion confusion;
    double balanced_accuracy = 0.0;
    // True when one truth class was empty and balanced_accuracy holds plain
    // accuracy instead.
    bool accuracy_fallback = false;
    long selection_delta = 0;             // selected - truly nonzero
    std::optional<double> mse_selected;   // empty when tp == 0
    long n_selected = 0;
};

SelectionConfusion confusion(const Mask& selected, const Mask& support_true);

// 0.5 * (tp/(tp+fn) + tn/(tn+fp)). Throws UndefinedClass.
double balanced_accuracy(const SelectionConfusion& c);
double plain_accuracy(const SelectionConfusion& c);

// Mean squared coefficient error over the true positives A = {selected and
// truly nonzero}. The denominator is |A|, not p. With include_false_positives
// the falsely selected zeros are added to the averaged set.
std::optional<double> mse_selected(const Vector& beta_true, const Vector& beta_hat,
                                   const Mask& selected, bool include_false_positives = false);

MetricsReport score(const Vector& beta_true, const Mask& support_true, const Vector& beta_hat,
                    const Mask& selected);

// m3 / m2^{3/2} with population central moments. Throws ZeroVariance.
double univariate_skewness(const Vector& x);
// m4 / m2^2 (non-excess).
double univariate_kurtosis(const Vector& x);

// Mardia's b_{1,p} and b_{2,p} with the 1/n sample covariance.
// Throw SingularCovariance (also when n <= p).
double mardia_skewness(const Matrix& X);
double mardia_kurtosis(const Matrix& X);

struct MardiaStats {
    double skewness = 0.0;
    double kurtosis = 0.0;
};
MardiaStats mardia(const Matrix& X, int threads = 1);

}  // namespace berm::metrics
