#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "berm/csv.hpp"
#include "berm/errors.hpp"
#include "berm/harness.hpp"
#include "berm/seed.hpp"

namespace berm::harness {

namespace {

constexpr std::size_t kMinFitRows = 20;

struct Columns {
    std::size_t response;
    std::optional<std::size_t> group;
    std::optional<std::size_t> id;
    std::vector<std::size_t> features;
    std::vector<std::string> names;
};

Columns resolve_columns(const config::CaseStudyConfig& cfg, const csv::Table& t) {
    Columns c;
    c.response = t.column(cfg.response_column);
    if (cfg.group_column) c.group = t.column(*cfg.group_column);
    if (cfg.id_column) c.id = t.column(*cfg.id_column);
    if (!cfg.features.empty()) {
        for (const auto& f : cfg.features) {
            const std::size_t j = t.column(f);
            if (j == c.response || j == c.group || j == c.id)
                throw SchemaViolation("feature '" + f + "' is also the response, group or id column");
            c.features.push_back(j);
        }
    } else {
        for (std::size_t j = 0; j < t.header.size(); ++j)
            if (j != c.response && j != c.group && j != c.id) c.features.push_back(j);
    }
    if (c.features.empty()) throw SchemaViolation("case study has no feature columns");
    for (std::size_t j : c.features) c.names.push_back(t.header[j]);
    return c;
}

Matrix numeric_block(const csv::Table& t, const std::vector<std::size_t>& rows,
                     const std::vector<std::size_t>& cols) {
    Matrix X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                csv::parse_number(t.rows[rows[i]][cols[j]], rows[i] + 1, t.header[cols[j]]);
    return X;
}

Vector numeric_column(const csv::Table& t, const std::vector<std::size_t>& rows, std::size_t col) {
    return numeric_block(t, rows, {col}).col(0);
}

std::vector<double> below(const std::vector<const Prediction*>& preds, const std::optional<double>& threshold) {
    std::vector<double> out;
    for (const Prediction* p : preds)
        if (!threshold || p->observed < *threshold) out.push_back(p->acceleration());
    return out;
}

double mean_or_nan(const std::vector<double>& v) {
    if (v.empty()) return std::nan("");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

CaseStudyReport run_case_study(const config::CaseStudyConfig& cfg, int threads) {
    cfg.validate();
    const csv::Table table = csv::read_file(cfg.data_path);
    const Columns cols = resolve_columns(cfg, table);

    auto group_of = [&](std::size_t r) { return cols.group ? table.rows[r][*cols.group] : cfg.fit_group; };
    std::vector<std::size_t> fit_rows;
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        if (group_of(r) == cfg.fit_group) fit_rows.push_back(r);
    const std::size_t need = std::max(kMinFitRows, static_cast<std::size_t>(cfg.fit.folds) + 2);
    if (fit_rows.size() < need) throw TooFewRows(fit_rows.size(), need);
    for (const auto& g : cfg.eval_groups)
        if (g == cfg.fit_group) throw SchemaViolation("eval group '" + g + "' is the fit group");

    // Parse everything used up front so a bad cell fails before any fitting.
    std::vector<std::size_t> used_rows = fit_rows;
    const std::set<std::string> eval_set(cfg.eval_groups.begin(), cfg.eval_groups.end());
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        if (eval_set.count(group_of(r))) used_rows.push_back(r);
    std::sort(used_rows.begin(), used_rows.end());
    numeric_block(table, used_rows, cols.features);
    numeric_column(table, used_rows, cols.response);

    // Seeded split of the fit group.
    std::vector<std::size_t> shuffled = fit_rows;
    Rng rng = make_rng(derive_seed(cfg.seed, "split"));
    shuffle(shuffled, rng);
    const auto n_fit = static_cast<double>(fit_rows.size());
    auto n_test = static_cast<std::size_t>(std::floor(cfg.test_fraction * n_fit + 0.5));
    n_test = std::clamp<std::size_t>(n_test, 2, fit_rows.size() - static_cast<std::size_t>(cfg.fit.folds));
    std::vector<std::size_t> test_rows(shuffled.begin(), shuffled.begin() + static_cast<long>(n_test));
    std::vector<std::size_t> train_rows(shuffled.begin() + static_cast<long>(n_test), shuffled.end());
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());

    const Dataset train(numeric_block(table, train_rows, cols.features),
                        numeric_column(table, train_rows, cols.response), cols.names);
    const StandardizedDesign sd = standardize(train);

    const std::uint64_t seed = derive_seed(cfg.seed, "fit");
    FitResult fit;
    std::optional<selection::BootstrapSummary> boot;
    if (cfg.method == Method::berm) {
        selection::BootstrapOptions bo = cfg.fit.bootstrap_options();
        bo.threads = threads;
        bo.cv.threads = 1;
        selection::BermResult res = selection::berm_fit(sd, cfg.fit.alpha, seed, bo);
        fit = std::move(res.fit);
        boot = std::move(res.bootstrap);
    } else {
        solver::CvOptions cv = cfg.fit.cv_options();
        cv.threads = threads;
        fit = selection::baseline_fit(sd, cfg.method, seed, cv, cfg.fit.adaptive);
    }

    CaseStudyReport rep;
    rep.method = cfg.method;
    rep.n_train = train_rows.size();
    rep.n_test = test_rows.size();
    rep.n_features = cols.features.size();
    rep.lambda = fit.lambda;
    if (fit.warning) rep.warning = *fit.warning;

    const Vector raw = raw_coefficients(fit, sd);
    for (Eigen::Index j = 0; j < sd.p(); ++j) {
        if (!fit.selected[static_cast<std::size_t>(j)]) continue;
        SelectedFeature f{cols.names[static_cast<std::size_t>(j)], fit.beta[j], raw[j], {}, {}};
        if (boot) {
            f.ci_lower = boot->ci_lower[j];
            f.ci_upper = boot->ci_upper[j];
        }
        rep.selected.push_back(std::move(f));
    }

    const Vector train_pred = predict(fit, sd, train.X());
    rep.train_r2 = r_squared(train.y(), train_pred);
    const Matrix X_test = numeric_block(table, test_rows, cols.features);
    const Vector y_test = numeric_column(table, test_rows, cols.response);
    const Vector test_pred = predict(fit, sd, X_test);
    rep.test_r2 = r_squared(y_test, test_pred);

    // Predictions for every fit-group and eval-group row, in file order.
    std::vector<char> split(table.rows.size(), 0);
    for (std::size_t r : train_rows) split[r] = 'r';
    for (std::size_t r : test_rows) split[r] = 't';
    const Matrix X_used = numeric_block(table, used_rows, cols.features);
    const Vector y_used = numeric_column(table, used_rows, cols.response);
    const Vector pred_used = predict(fit, sd, X_used);
    for (std::size_t i = 0; i < used_rows.size(); ++i) {
        const std::size_t r = used_rows[i];
        Prediction p;
        p.row = r + 1;
        if (cols.id) p.id = table.rows[r][*cols.id];
        p.group = group_of(r);
        p.split = split[r] == 'r' ? "train" : split[r] == 't' ? "test" : "eval";
        p.observed = y_used[static_cast<Eigen::Index>(i)];
        p.predicted = pred_used[static_cast<Eigen::Index>(i)];
        rep.predictions.push_back(std::move(p));
    }

    // The reference is the held-out part of the fit group, so both sides of
    // each comparison are out-of-sample predictions.
    std::vector<const Prediction*> reference;
    for (const auto& p : rep.predictions)
        if (p.split == "test") reference.push_back(&p);
    const std::vector<double> ref_acc = below(reference, cfg.age_threshold);
    for (const auto& g : cfg.eval_groups) {
        std::vector<const Prediction*> members;
        for (const auto& p : rep.predictions)
            if (p.split == "eval" && p.group == g) members.push_back(&p);
        const std::vector<double> acc = below(members, cfg.age_threshold);
        GroupComparison cmp;
        cmp.group = g;
        cmp.reference = cfg.fit_group + " (test split)";
        cmp.threshold = cfg.age_threshold;
        cmp.n_group = acc.size();
        cmp.n_reference = ref_acc.size();
        cmp.mean_group = mean_or_nan(acc);
        cmp.mean_reference = mean_or_nan(ref_acc);
        try {
            cmp.test = cfg.test == config::GroupTest::welch ? welch_test(acc, ref_acc)
                                                            : mann_whitney_test(acc, ref_acc);
        } catch (const InvalidArgument& e) {
            cmp.note = e.what();
        }
        rep.comparisons.push_back(std::move(cmp));
    }

    // Diagnostics over all fit-group rows.
    const Matrix X_fit = numeric_block(table, fit_rows, cols.features);
    const Vector y_fit = numeric_column(table, fit_rows, cols.response);
    std::vector<Eigen::Index> sel;
    for (Eigen::Index j = 0; j < sd.p(); ++j)
        if (fit.selected[static_cast<std::size_t>(j)]) sel.push_back(j);
    auto safe_corr = [](const Vector& a, const Vector& b) {
        try {
            return spearman(a, b);
        } catch (const ZeroVariance&) {
            return std::nan("");
        }
    };
    for (Eigen::Index j : sel) {
        FeatureDiagnostics d;
        d.name = cols.names[static_cast<std::size_t>(j)];
        d.skewness = metrics::univariate_skewness(X_fit.col(j));
        d.corr_with_response = safe_corr(X_fit.col(j), y_fit);
        for (Eigen::Index k : sel) {
            if (k == j) continue;
            const double c = std::abs(safe_corr(X_fit.col(j), X_fit.col(k)));
            if (!d.max_abs_corr_selected || c > *d.max_abs_corr_selected) d.max_abs_corr_selected = c;
        }
        d.coef_standardized = fit.beta[j];
        d.coef_raw = raw[j];
        rep.diagnostics.push_back(std::move(d));
    }
    return rep;
}

void write_case_outputs(const CaseStudyReport& rep, const std::filesystem::path& dir) {
    using csv::format_number;
    csv::Writer sel({"feature", "coef_standardized", "coef_raw", "ci_lower", "ci_upper"});
    for (const auto& f : rep.selected)
        sel.row({f.name, format_number(f.coef_standardized), format_number(f.coef_raw),
                 format_number(f.ci_lower), format_number(f.ci_upper)});

    csv::Writer pred({"row", "id", "group", "split", "observed", "predicted", "acceleration"});
    for (const auto& p : rep.predictions)
        pred.row({std::to_string(p.row), p.id, p.group, p.split, format_number(p.observed),
                  format_number(p.predicted), format_number(p.acceleration())});

    csv::Writer acc({"group", "reference", "threshold", "n_group", "n_reference", "mean_group",
                     "mean_reference", "difference", "statistic", "df", "p_value", "note"});
    for (const auto& c : rep.comparisons) {
        auto opt = [](double v) { return std::isfinite(v) ? format_number(v) : std::string(); };
        acc.row({c.group, c.reference, format_number(c.threshold), std::to_string(c.n_group),
                 std::to_string(c.n_reference), opt(c.mean_group), opt(c.mean_reference),
                 c.test ? format_number(c.test->difference) : "", c.test ? format_number(c.test->statistic) : "",
                 c.test && c.test->df > 0.0 ? format_number(c.test->df) : "",
                 c.test ? format_number(c.test->p_value) : "", c.note});
    }

    csv::Writer diag({"feature", "skewness", "max_abs_corr_selected", "corr_with_response",
                      "coef_standardized", "coef_raw"});
    for (const auto& d : rep.diagnostics)
        diag.row({d.name, format_number(d.skewness), format_number(d.max_abs_corr_selected),
                  std::isfinite(d.corr_with_response) ? format_number(d.corr_with_response) : "",
                  format_number(d.coef_standardized), format_number(d.coef_raw)});

    csv::Writer summary({"key", "value"});
    summary.row({"method", std::string(to_string(rep.method))});
    summary.row({"n_train", std::to_string(rep.n_train)});
    summary.row({"n_test", std::to_string(rep.n_test)});
    summary.row({"n_features", std::to_string(rep.n_features)});
    summary.row({"n_selected", std::to_string(rep.selected.size())});
    summary.row({"lambda", format_number(rep.lambda)});
    summary.row({"train_r2", format_number(rep.train_r2)});
    summary.row({"test_r2", format_number(rep.test_r2)});
    summary.row({"warning", rep.warning});

    csv::write_atomic(dir / "selected_features.csv", sel.str());
    csv::write_atomic(dir / "predictions.csv", pred.str());
    csv::write_atomic(dir / "acceleration.csv", acc.str());
    csv::write_atomic(dir / "diagnostics.csv", diag.str());
    csv::write_atomic(dir / "case_summary.csv", summary.str());
}

}  // namespace berm::harness
