#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "berm/errors.hpp"
#include "berm/harness.hpp"

namespace berm::harness {

namespace {

struct Moments {
    double mean = 0.0;
    double var = 0.0;  // n - 1 denominator
};

Moments sample_moments(const std::vector<double>& x) {
    Moments m;
    const double n = static_cast<double>(x.size());
    m.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    for (double v : x) m.var += (v - m.mean) * (v - m.mean);
    m.var /= n - 1.0;
    return m;
}

double mean_of(const std::vector<double>& x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

}  // namespace

TestResult welch_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw InvalidArgument("Welch test needs >= 2 values per group");
    const Moments ma = sample_moments(a), mb = sample_moments(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double va = ma.var / na, vb = mb.var / nb;
    if (!(va + vb > 0.0)) throw InvalidArgument("Welch test: both groups have zero variance");
    TestResult r;
    r.difference = ma.mean - mb.mean;
    r.statistic = r.difference / std::sqrt(va + vb);
    r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    const boost::math::students_t dist(r.df);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic)));
    return r;
}

TestResult mann_whitney_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw InvalidArgument("Mann-Whitney test needs non-empty groups");
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::vector<double> ranks = midranks(pooled);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double n = na + nb;
    const double rank_sum_a = std::accumulate(ranks.begin(), ranks.begin() + static_cast<long>(a.size()), 0.0);
    const double u = rank_sum_a - na * (na + 1.0) / 2.0;

    // Tie correction: sum over tie groups of (t^3 - t).
    std::vector<double> sorted(pooled);
    std::sort(sorted.begin(), sorted.end());
    double ties = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        ties += t * t * t - t;
        i = j;
    }
    const double var = na * nb / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    TestResult r;
    r.difference = mean_of(a) - mean_of(b);
    const double centred = u - na * nb / 2.0;
    if (!(var > 0.0)) {
        r.statistic = 0.0;
        r.p_value = 1.0;
        return r;
    }
    const double corrected = std::max(std::abs(centred) - 0.5, 0.0);
    r.statistic = std::copysign(corrected / std::sqrt(var), centred);
    const boost::math::normal dist;
    r.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic))));
    return r;
}

std::vector<double> midranks(const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
    std::vector<double> ranks(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j) + 1.0) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
        i = j;
    }
    return ranks;
}

double pearson(const Vector& x, const Vector& y) {
    if (x.size() != y.size() || x.size() < 2) throw DimensionMismatch("pearson: need equal lengths >= 2");
    const Vector dx = x.array() - x.mean();
    const Vector dy = y.array() - y.mean();
    const double denom = std::sqrt(dx.squaredNorm() * dy.squaredNorm());
    if (!(denom > 0.0)) throw ZeroVariance();
    return dx.dot(dy) / denom;
}

double spearman(const Vector& x, const Vector& y) {
    auto rank = [](const Vector& v) {
        const std::vector<double> r = midranks(std::vector<double>(v.data(), v.data() + v.size()));
        return Vector(Eigen::Map<const Vector>(r.data(), static_cast<Eigen::Index>(r.size())));
    };
    return pearson(rank(x), rank(y));
}

}  // namespace berm::harness
