#include "berm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <string>

#include "berm/errors.hpp"

namespace berm::solver {

namespace {

bool excluded(double w) noexcept { return std::isinf(w); }

constexpr int kPolishAfter = 3;

double penalty(const PenaltyConfig& pen, const Vector& beta) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (beta[j] == 0.0) continue;
        const double w = pen.weights[j];
        total += w * (0.5 * (1.0 - pen.alpha) * beta[j] * beta[j] + pen.alpha * std::abs(beta[j]));
    }
    return pen.lambda * total;
}

}  // namespace

PenaltyConfig PenaltyConfig::uniform(Eigen::Index p, double alpha, double lambda) {
    return PenaltyConfig{alpha, lambda, Vector::Ones(p)};
}

void PenaltyConfig::validate(Eigen::Index p) const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
    if (!(lambda >= 0.0) || std::isinf(lambda))
        throw InvalidArgument("lambda must be finite and non-negative");
    if (weights.size() != p)
        throw DimensionMismatch("penalty weights have " + std::to_string(weights.size()) +
                                " entries, expected " + std::to_string(p));
    for (Eigen::Index j = 0; j < p; ++j) {
        const double w = weights[j];
        if (std::isnan(w) || w < 0.0) throw InvalidArgument("penalty weights must be >= 0");
    }
}

Gram::Gram(const StandardizedDesign& sd) : Gram(sd.Xs, sd.yc) {}

Gram::Gram(const Matrix& Xs, const Vector& yc) {
    if (Xs.rows() != yc.size()) throw DimensionMismatch("Gram: X and y disagree on n");
    const double n = static_cast<double>(Xs.rows());
    G_.resize(Xs.cols(), Xs.cols());
    G_.setZero();
    G_.selfadjointView<Eigen::Lower>().rankUpdate(Xs.transpose(), 1.0 / n);
    G_.triangularView<Eigen::StrictlyUpper>() = G_.transpose();
    c_ = Xs.transpose() * yc / n;
    yy_ = yc.squaredNorm() / n;
}

double objective(const Gram& gram, const PenaltyConfig& pen, const Vector& beta) {
    const double loss = 0.5 * (gram.yy() - 2.0 * gram.c().dot(beta) + beta.dot(gram.G() * beta));
    return loss + penalty(pen, beta);
}

double objective(const StandardizedDesign& sd, const PenaltyConfig& pen, const Vector& beta) {
    const Vector r = sd.yc - sd.Xs * beta;
    return 0.5 * r.squaredNorm() / static_cast<double>(sd.n()) + penalty(pen, beta);
}

Vector cd_solve(const Gram& gram, const PenaltyConfig& pen, const Vector& warm_start,
                const CdOptions& opts) {
    const Eigen::Index p = gram.p();
    pen.validate(p);
    if (!(opts.tol > 0.0)) throw InvalidArgument("tol must be positive");
    if (warm_start.size() != p) throw DimensionMismatch("warm start has wrong length");

    const Matrix& G = gram.G();
    Vector beta = warm_start;
    std::vector<Eigen::Index> free_cols;
    free_cols.reserve(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
        if (excluded(pen.weights[j]))
            beta[j] = 0.0;
        else
            free_cols.push_back(j);
    }

    // grad = c - G beta, i.e. X'(y - X beta)/n.
    Vector grad = gram.c() - G * beta;
    Vector l1(p), l2(p);
    for (Eigen::Index j : free_cols) {
        l1[j] = pen.lambda * pen.alpha * pen.weights[j];
        l2[j] = pen.lambda * (1.0 - pen.alpha) * pen.weights[j];
    }

    auto update = [&](Eigen::Index j) {
        const double old = beta[j];
        const double gjj = G(j, j);
        const double rho = grad[j] + gjj * old;
        const double updated = soft_threshold(rho, l1[j]) / (gjj + l2[j]);
        const double delta = updated - old;
        if (delta != 0.0) {
            beta[j] = updated;
            grad.noalias() -= G.col(j) * delta;
        }
        return std::abs(delta);
    };

    // Correlated columns make CD crawl. Once the active set has had a few
    // sweeps, solve the stationarity equations on it with the signs held
    // fixed. If a coefficient would change sign, step only as far as the
    // first zero crossing, drop that column and solve again. The objective
    // is a convex quadratic along each step, so every step descends; the
    // following sweeps still decide convergence.
    auto polish = [&](std::vector<Eigen::Index> act) {
        std::erase_if(act, [&](Eigen::Index j) { return beta[j] == 0.0; });
        bool moved = false;
        while (!act.empty()) {
            const auto m = static_cast<Eigen::Index>(act.size());
            Matrix H(m, m);
            Vector rhs(m), cur(m);
            for (Eigen::Index a = 0; a < m; ++a) {
                const Eigen::Index j = act[static_cast<std::size_t>(a)];
                cur[a] = beta[j];
                rhs[a] = gram.c()[j] - l1[j] * (beta[j] > 0.0 ? 1.0 : -1.0);
                for (Eigen::Index b = 0; b < m; ++b) H(a, b) = G(j, act[static_cast<std::size_t>(b)]);
                H(a, a) += l2[j];
            }
            const Eigen::LLT<Matrix> llt(H);
            if (llt.info() != Eigen::Success) break;
            const Vector x = llt.solve(rhs);
            double step = 1.0;
            Eigen::Index hit = -1;
            for (Eigen::Index a = 0; a < m; ++a) {
                if (x[a] * cur[a] > 0.0) continue;
                const double t = cur[a] / (cur[a] - x[a]);
                if (t < step) {
                    step = t;
                    hit = a;
                }
            }
            for (Eigen::Index a = 0; a < m; ++a)
                beta[act[static_cast<std::size_t>(a)]] = cur[a] + step * (x[a] - cur[a]);
            moved = true;
            if (hit < 0) break;
            beta[act[static_cast<std::size_t>(hit)]] = 0.0;
            act.erase(act.begin() + hit);
        }
        if (moved) grad = gram.c() - G * beta;
    };

    std::vector<Eigen::Index> active;
    int sweeps = 0;
    double max_change = std::numeric_limits<double>::infinity();
    auto notify = [&] {
        if (opts.on_sweep) opts.on_sweep(objective(gram, pen, beta));
    };

    while (true) {
        max_change = 0.0;
        for (Eigen::Index j : free_cols) max_change = std::max(max_change, update(j));
        ++sweeps;
        notify();
        if (max_change < opts.tol) break;
        if (sweeps >= opts.max_iter) throw NoConvergence(opts.max_iter, beta, max_change);

        active.clear();
        for (Eigen::Index j : free_cols)
            if (beta[j] != 0.0) active.push_back(j);
        int inner_sweeps = 0;
        while (true) {
            double inner = 0.0;
            for (Eigen::Index j : active) inner = std::max(inner, update(j));
            ++sweeps;
            notify();
            if (inner < opts.tol) break;
            if (sweeps >= opts.max_iter) throw NoConvergence(opts.max_iter, beta, inner);
            if (++inner_sweeps % kPolishAfter == 0) polish(active);
        }
    }
    return beta;
}

FitResult cd_fit(const StandardizedDesign& sd, const PenaltyConfig& pen,
                 const std::optional<Vector>& warm_start, const CdOptions& opts) {
    const Gram gram(sd);
    Vector start = warm_start ? *warm_start : Vector::Zero(sd.p());
    Vector beta = cd_solve(gram, pen, start, opts);
    FitResult fit = FitResult::from_beta(std::move(beta), pen.lambda, pen.alpha, Method::enet, pen.weights);
    notify_fit(sd, fit);
    return fit;
}

namespace {

std::mutex observer_mutex;
std::shared_ptr<const FitObserver> observer;

}  // namespace

void set_fit_observer(FitObserver obs) {
    std::lock_guard lock(observer_mutex);
    observer = obs ? std::make_shared<const FitObserver>(std::move(obs)) : nullptr;
}

void notify_fit(const StandardizedDesign& sd, const FitResult& fit) {
    std::shared_ptr<const FitObserver> current;
    {
        std::lock_guard lock(observer_mutex);
        current = observer;
    }
    if (current) (*current)(sd, fit);
}

double kkt_violation(const StandardizedDesign& sd, const PenaltyConfig& pen, const Vector& beta) {
    if (beta.size() != sd.p()) throw DimensionMismatch("kkt: beta has wrong length");
    const Vector grad = sd.Xs.transpose() * (sd.yc - sd.Xs * beta) / static_cast<double>(sd.n());
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double w = pen.weights[j];
        if (excluded(w)) {
            if (beta[j] != 0.0) return std::numeric_limits<double>::infinity();
            continue;
        }
        double v;
        if (beta[j] != 0.0) {
            const double sign = beta[j] > 0.0 ? 1.0 : -1.0;
            v = std::abs(grad[j] - pen.lambda * w * (pen.alpha * sign + (1.0 - pen.alpha) * beta[j]));
        } else {
            v = std::max(0.0, std::abs(grad[j]) - pen.lambda * w * pen.alpha);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

double kkt_violation(const StandardizedDesign& sd, const FitResult& fit) {
    PenaltyConfig pen{fit.alpha, fit.lambda,
                      fit.weights.size() == sd.p() ? fit.weights : Vector(Vector::Ones(sd.p()))};
    return kkt_violation(sd, pen, fit.beta);
}

bool check_kkt(const StandardizedDesign& sd, const FitResult& fit, double tol) {
    return kkt_violation(sd, fit) <= tol;
}

double lambda_max(const Gram& gram, double alpha, const Vector& weights) {
    if (alpha == 0.0) throw AlphaZero();
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");
    if (weights.size() != gram.p()) throw DimensionMismatch("weights have wrong length");
    bool any_finite = false;
    double best = 0.0;
    for (Eigen::Index j = 0; j < gram.p(); ++j) {
        const double w = weights[j];
        if (excluded(w)) continue;
        any_finite = true;
        if (w <= 0.0) continue;  // unpenalized columns never hit zero
        best = std::max(best, std::abs(gram.c()[j]) / (alpha * w));
    }
    if (!any_finite) throw AllWeightsInfinite();
    if (!(best > 0.0)) throw InvalidArgument("lambda_max is zero: response is orthogonal to X");
    // A few ulps up so that l1 = lambda_max * alpha * w_j rounds to >= |c_j|.
    return best * (1.0 + 8.0 * std::numeric_limits<double>::epsilon());
}

double default_lambda_ratio(Eigen::Index n, Eigen::Index p) noexcept {
    return n > p ? 1e-3 : 1e-2;
}

Vector lambda_grid(const StandardizedDesign& sd, double alpha, const Vector& weights, int n_lambda,
                   double ratio) {
    if (n_lambda < 2) throw InvalidArgument("n_lambda must be >= 2");
    if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidArgument("ratio must lie in (0, 1)");
    const double top = lambda_max(Gram(sd), alpha, weights);
    Vector grid(n_lambda);
    const double step = std::log(ratio) / (n_lambda - 1);
    const double log_top = std::log(top);
    for (int k = 0; k < n_lambda; ++k) grid[k] = std::exp(log_top + step * k);
    grid[0] = top;
    return grid;
}

Matrix fit_path(const Gram& gram, double alpha, const Vector& weights, const Vector& grid,
                const CdOptions& opts) {
    Matrix path(gram.p(), grid.size());
    Vector beta = Vector::Zero(gram.p());
    PenaltyConfig pen{alpha, 0.0, weights};
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
        pen.lambda = grid[k];
        beta = cd_solve(gram, pen, beta, opts);
        path.col(k) = beta;
    }
    return path;
}

}  // namespace berm::solver
