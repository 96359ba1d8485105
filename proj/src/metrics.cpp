#include "berm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "berm/errors.hpp"
#include "berm/parallel.hpp"

namespace berm::metrics {

SelectionConfusion confusion(const Mask& selected, const Mask& support_true) {
    if (selected.size() != support_true.size()) throw DimensionMismatch("confusion: length mismatch");
    SelectionConfusion c;
    for (std::size_t j = 0; j < selected.size(); ++j) {
        if (support_true[j])
            (selected[j] ? c.tp : c.fn) += 1;
        else
            (selected[j] ? c.fp : c.tn) += 1;
    }
    return c;
}

double balanced_accuracy(const SelectionConfusion& c) {
    if (c.tp + c.fn == 0 || c.tn + c.fp == 0) throw UndefinedClass();
    const double sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    const double specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    return 0.5 * (sensitivity + specificity);
}

double plain_accuracy(const SelectionConfusion& c) {
    if (c.total() == 0) throw InvalidArgument("accuracy of an empty confusion table");
    return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

// The averaged set is the true positives. The printed formula divides by p,
// but the error is meant to be taken over the accurately selected variables
// only, so the denominator is |A|.
std::optional<double> mse_selected(const Vector& beta_true, const Vector& beta_hat,
                                   const Mask& selected, bool include_false_positives) {
    if (beta_true.size() != beta_hat.size() ||
        static_cast<Eigen::Index>(selected.size()) != beta_true.size())
        throw DimensionMismatch("mse_selected: length mismatch");
    double sum = 0.0;
    long tp = 0;
    long count = 0;
    for (Eigen::Index j = 0; j < beta_true.size(); ++j) {
        if (!selected[static_cast<std::size_t>(j)]) continue;
        const bool truly_nonzero = beta_true[j] != 0.0;
        if (!truly_nonzero && !include_false_positives) continue;
        const double d = beta_true[j] - beta_hat[j];
        sum += d * d;
        ++count;
        tp += truly_nonzero;
    }
    if (tp == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

MetricsReport score(const Vector& beta_true, const Mask& support_true, const Vector& beta_hat,
                    const Mask& selected) {
    MetricsReport r;
    r.confusion = confusion(selected, support_true);
    try {
        r.balanced_accuracy = balanced_accuracy(r.confusion);
    } catch (const UndefinedClass&) {
        r.balanced_accuracy = plain_accuracy(r.confusion);
        r.accuracy_fallback = true;
    }
    r.n_selected = r.confusion.tp + r.confusion.fp;
    r.selection_delta = r.n_selected - (r.confusion.tp + r.confusion.fn);
    r.mse_selected = mse_selected(beta_true, beta_hat, selected);
    return r;
}

namespace {

struct Moments {
    double m2, m3, m4;
};

Moments central_moments(const Vector& x) {
    if (x.size() < 3) throw InvalidArgument("moments need at least 3 observations");
    const Eigen::ArrayXd d = x.array() - x.mean();
    const Eigen::ArrayXd d2 = d.square();
    Moments m{d2.mean(), (d2 * d).mean(), d2.square().mean()};
    if (!(m.m2 > 0.0)) throw ZeroVariance();
    return m;
}

// Rows of the centred data mapped to identity sample covariance.
Matrix whiten(const Matrix& X) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    if (n <= p) throw SingularCovariance();
    const Matrix Xc = X.rowwise() - X.colwise().mean();
    Matrix S = Matrix::Zero(p, p);
    S.selfadjointView<Eigen::Lower>().rankUpdate(Xc.transpose(), 1.0 / static_cast<double>(n));
    const Eigen::LLT<Matrix> llt(S.selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success) throw SingularCovariance();
    const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
    // pivots below ~sqrt(eps) of the largest signal an exactly rank-deficient S
    if (diag.minCoeff() <= 1e-7 * diag.maxCoeff()) throw SingularCovariance();
    // Z' = L^{-1} Xc'
    return llt.matrixL().solve(Xc.transpose()).transpose();
}

// b1 = sum over ordered (r,s,t) of m_rst^2, m_rst = mean_i z_ir z_is z_it.
// Each r contributes the triples whose smallest index is r.
double skewness_by_tensor(const Matrix& Z, int threads) {
    const Eigen::Index n = Z.rows();
    const Eigen::Index p = Z.cols();
    std::vector<double> part(static_cast<std::size_t>(p));
    parallel_for(static_cast<std::size_t>(p), threads, [&](std::size_t ri) {
        const auto r = static_cast<Eigen::Index>(ri);
        const Eigen::Index rest = p - r;
        const auto tail = Z.rightCols(rest);
        const Matrix W = tail.array().colwise() * Z.col(r).array();
        const Matrix M = (W.transpose() * tail) / static_cast<double>(n);  // M(s,t) = m_{r,r+s,r+t}
        double s = M(0, 0) * M(0, 0);
        s += 3.0 * M.row(0).tail(rest - 1).squaredNorm();
        s += 3.0 * M.bottomRightCorner(rest - 1, rest - 1).squaredNorm();
        part[ri] = s;
    });
    double total = 0.0;
    for (double v : part) total += v;
    return total;
}

// b1 = n^-2 sum_ij (z_i . z_j)^3, accumulated in row blocks.
double skewness_by_gram(const Matrix& Z, int threads) {
    const Eigen::Index n = Z.rows();
    constexpr Eigen::Index kBlock = 256;
    const Eigen::Index blocks = (n + kBlock - 1) / kBlock;
    std::vector<double> part(static_cast<std::size_t>(blocks));
    parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t bi) {
        const Eigen::Index start = static_cast<Eigen::Index>(bi) * kBlock;
        const Eigen::Index rows = std::min(kBlock, n - start);
        const Matrix G = Z.middleRows(start, rows) * Z.transpose();
        part[bi] = G.array().cube().sum();
    });
    double total = 0.0;
    for (double v : part) total += v;
    const double nn = static_cast<double>(n);
    return total / (nn * nn);
}

}  // namespace

double univariate_skewness(const Vector& x) {
    const Moments m = central_moments(x);
    return m.m3 / std::pow(m.m2, 1.5);
}

double univariate_kurtosis(const Vector& x) {
    const Moments m = central_moments(x);
    return m.m4 / (m.m2 * m.m2);
}

MardiaStats mardia(const Matrix& X, int threads) {
    const Matrix Z = whiten(X);
    const double n = static_cast<double>(Z.rows());
    const double p = static_cast<double>(Z.cols());
    MardiaStats s;
    s.kurtosis = Z.rowwise().squaredNorm().array().square().sum() / n;
    s.skewness = (p * p < 1.5 * n) ? skewness_by_tensor(Z, threads) : skewness_by_gram(Z, threads);
    return s;
}

double mardia_skewness(const Matrix& X) { return mardia(X).skewness; }

double mardia_kurtosis(const Matrix& X) {
    const Matrix Z = whiten(X);
    return Z.rowwise().squaredNorm().array().square().sum() / static_cast<double>(Z.rows());
}

}  // namespace berm::metrics
