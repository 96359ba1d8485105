#include "berm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "berm/errors.hpp"

namespace berm::config {

namespace fs = std::filesystem;

selection::BootstrapOptions FitSettings::bootstrap_options() const {
    selection::BootstrapOptions b;
    b.B = bootstrap;
    b.retune_per_replicate = retune_per_replicate;
    b.cv = cv_options();
    return b;
}

solver::CvOptions FitSettings::cv_options() const {
    solver::CvOptions cv;
    cv.k = folds;
    cv.n_lambda = n_lambda;
    cv.ratio = lambda_ratio;
    cv.one_se_rule = one_se_rule;
    return cv;
}

std::string_view to_string(GroupTest t) noexcept {
    return t == GroupTest::welch ? "welch" : "mann_whitney";
}

namespace {

[[noreturn]] void fail(const YAML::Node& node, const std::string& what) {
    const auto mark = node.Mark();
    if (mark.line >= 0) throw SchemaViolation(fmt::format("line {}: {}", mark.line + 1, what));
    throw SchemaViolation(what);
}

// Reads keys from one mapping and remembers which were consumed, so leftovers
// can be reported as unknown.
class Section {
public:
    Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.IsMap()) fail(node_, fmt::format("'{}' must be a mapping", path_));
    }

    bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

    YAML::Node node(const std::string& key) {
        used_.insert(key);
        const YAML::Node& n = node_;
        return n[key];
    }

    template <class T>
    void get(const std::string& key, T& out) {
        if (YAML::Node n = node(key)) out = convert<T>(n, key);
    }

    template <class T>
    void get(const std::string& key, std::optional<T>& out) {
        if (YAML::Node n = node(key)) out = convert<T>(n, key);
    }

    template <class T>
    T required(const std::string& key) {
        YAML::Node n = node(key);
        if (!n) fail(node_, fmt::format("'{}' is missing required key '{}'", path_, key));
        return convert<T>(n, key);
    }

    template <class T>
    T convert(const YAML::Node& n, const std::string& key) const {
        try {
            if (!n.IsScalar()) throw YAML::BadConversion(n.Mark());
            return n.as<T>();
        } catch (const YAML::BadConversion&) {
            fail(n, fmt::format("'{}' has the wrong type", qualified(key)));
        }
    }

    std::string qualified(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const auto key = it->first.as<std::string>();
            if (!used_.count(key)) fail(it->first, fmt::format("unknown key '{}'", qualified(key)));
        }
    }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

template <class T>
std::vector<T> scalar_list(const YAML::Node& n, const std::string& what) {
    std::vector<T> out;
    if (n.IsScalar()) {
        try {
            out.push_back(n.as<T>());
        } catch (const YAML::BadConversion&) {
            fail(n, fmt::format("'{}' has the wrong type", what));
        }
        return out;
    }
    if (!n.IsSequence() || n.size() == 0)
        fail(n, fmt::format("'{}' must be a value or a non-empty list", what));
    for (const auto& item : n) {
        try {
            if (!item.IsScalar()) throw YAML::BadConversion(item.Mark());
            out.push_back(item.as<T>());
        } catch (const YAML::BadConversion&) {
            fail(item, fmt::format("'{}' has an entry of the wrong type", what));
        }
    }
    return out;
}

void parse_adaptive(Section s, selection::AdaptiveOptions& a) {
    s.get("init_alpha", a.init_alpha);
    s.get("gamma", a.gamma);
    s.get("tau", a.tau);
    s.finish();
}

void parse_fit(Section s, FitSettings& f) {
    s.get("bootstrap", f.bootstrap);
    s.get("alpha", f.alpha);
    s.get("retune_per_replicate", f.retune_per_replicate);
    s.get("folds", f.folds);
    s.get("n_lambda", f.n_lambda);
    s.get("lambda_ratio", f.lambda_ratio);
    s.get("one_se_rule", f.one_se_rule);
    if (YAML::Node a = s.node("adaptive")) parse_adaptive(Section(a, s.qualified("adaptive")), f.adaptive);
    s.finish();

    auto check = [&](bool ok, const std::string& key, const char* rule) {
        if (!ok) fail(s.node(key), fmt::format("'{}' {}", s.qualified(key), rule));
    };
    check(f.bootstrap >= 2, "bootstrap", "must be >= 2");
    check(f.alpha > 0.0 && f.alpha <= 1.0, "alpha", "must lie in (0, 1]");
    check(f.folds >= 2, "folds", "must be >= 2");
    check(f.n_lambda >= 2, "n_lambda", "must be >= 2");
    check(!f.lambda_ratio || (*f.lambda_ratio > 0.0 && *f.lambda_ratio < 1.0), "lambda_ratio",
          "must lie in (0, 1)");
    check(f.adaptive.init_alpha > 0.0 && f.adaptive.init_alpha <= 1.0, "adaptive",
          "init_alpha must lie in (0, 1]");
    check(f.adaptive.gamma > 0.0 && f.adaptive.tau > 0.0, "adaptive", "gamma and tau must be > 0");
}

void parse_transform(Section s, simgen::TransformFitOptions& t) {
    s.get("fit_sample", t.fit_sample);
    s.get("fit_replicates", t.fit_replicates);
    s.get("max_evals", t.max_evals);
    s.get("fit_seed", t.fit_seed);
    s.get("per_dataset", t.fit_per_dataset);
    s.finish();
    if (t.fit_sample < 0 || t.fit_replicates < 1 || t.max_evals < 1)
        fail(s.node("fit_replicates"), "transform: fit_sample >= 0, fit_replicates >= 1 and "
                                       "max_evals >= 1 are required");
}

simgen::Block parse_block(Section s) {
    const auto type = s.required<std::string>("type");
    const int size = s.required<int>("size");
    simgen::Block b;
    if (type == "uniform") {
        b = simgen::UniformBlock{size, s.required<double>("low"), s.required<double>("high")};
    } else if (type == "constant") {
        b = simgen::ConstantBlock{size, s.required<double>("value")};
    } else if (type == "identity") {
        b = simgen::IdentityBlock{size};
    } else {
        fail(s.node("type"), fmt::format("unknown block type '{}' (uniform, constant, identity)", type));
    }
    s.finish();
    return b;
}

simgen::CovarianceSpec parse_covariance(Section s) {
    simgen::CovarianceSpec spec;
    const YAML::Node blocks = s.node("blocks");
    if (!blocks || !blocks.IsSequence() || blocks.size() == 0)
        fail(blocks ? blocks : s.node("blocks"), fmt::format("'{}' needs a non-empty list", s.qualified("blocks")));
    for (std::size_t i = 0; i < blocks.size(); ++i)
        spec.blocks.push_back(parse_block(Section(blocks[i], fmt::format("{}[{}]", s.qualified("blocks"), i))));
    if (YAML::Node couplings = s.node("couplings")) {
        if (!couplings.IsSequence()) fail(couplings, "'couplings' must be a list");
        for (std::size_t i = 0; i < couplings.size(); ++i) {
            Section c(couplings[i], fmt::format("{}[{}]", s.qualified("couplings"), i));
            spec.couplings.push_back(
                {c.required<int>("first"), c.required<int>("second"), c.required<double>("value")});
            c.finish();
        }
    }
    s.finish();
    return spec;
}

std::string grid_id(const std::string& base, bool sp_list, double sp, bool sd_list, double sd) {
    std::string id = base;
    if (sp_list) id += fmt::format("_sp{}", sp);
    if (sd_list) id += fmt::format("_sd{}", sd);
    return id;
}

void parse_scenario(Section s, std::vector<simgen::Scenario>& out, std::set<std::string>& ids) {
    simgen::Scenario base;
    base.id = s.required<std::string>("id");
    const YAML::Node id_node = s.node("id");
    if (auto preset = s.node("preset")) {
        const auto name = s.convert<std::string>(preset, "preset");
        if (name == "moderate") {
            base.n = 300;
            base.cov_spec = simgen::CovarianceSpec::moderate();
            base.target_skewness = 5000.0;
            base.target_kurtosis = 25000.0;
        } else if (name == "high_dimensional") {
            base.n = 300;
            base.cov_spec = simgen::CovarianceSpec::high_dimensional();
            base.target_skewness = 10000.0;
            base.target_kurtosis = 300000.0;
        } else {
            fail(preset, fmt::format("unknown preset '{}' (moderate, high_dimensional)", name));
        }
        base.p = base.cov_spec.dimension();
    }
    s.get("n", base.n);
    s.get("simple", base.simple);
    s.get("skewness", base.target_skewness);
    s.get("kurtosis", base.target_kurtosis);
    if (YAML::Node cov = s.node("covariance")) {
        base.cov_spec = parse_covariance(Section(cov, s.qualified("covariance")));
        base.p = base.cov_spec.dimension();
    }
    if (YAML::Node pn = s.node("p")) {
        const int p = s.convert<int>(pn, "p");
        if (s.has("covariance") || s.has("preset")) {
            if (p != base.p)
                fail(pn, fmt::format("'{}' is {} but the covariance has dimension {}",
                                     s.qualified("p"), p, base.p));
        } else {
            base.p = p;
            if (!base.simple) base.cov_spec = simgen::CovarianceSpec{{simgen::IdentityBlock{p}}, {}};
        }
    }

    std::vector<double> sparsities{base.sparsity}, sigmas{base.sigma};
    bool sp_list = false, sd_list = false;
    if (YAML::Node n = s.node("sparsity")) {
        sparsities = scalar_list<double>(n, s.qualified("sparsity"));
        sp_list = n.IsSequence();
        for (double v : sparsities)
            if (!(v >= 0.0 && v <= 1.0)) fail(n, fmt::format("'{}' must lie in [0, 1]", s.qualified("sparsity")));
    }
    if (YAML::Node n = s.node("sigma")) {
        sigmas = scalar_list<double>(n, s.qualified("sigma"));
        sd_list = n.IsSequence();
        for (double v : sigmas)
            if (!(v > 0.0) || !std::isfinite(v)) fail(n, fmt::format("'{}' must be > 0", s.qualified("sigma")));
    }
    s.finish();

    for (double sp : sparsities) {
        for (double sd : sigmas) {
            simgen::Scenario sc = base;
            sc.sparsity = sp;
            sc.sigma = sd;
            sc.id = grid_id(base.id, sp_list, sp, sd_list, sd);
            try {
                sc.validate();
            } catch (const Error& e) {
                fail(id_node, fmt::format("scenario '{}': {}", sc.id, e.what()));
            }
            if (!ids.insert(sc.id).second) fail(id_node, fmt::format("duplicate scenario id '{}'", sc.id));
            out.push_back(std::move(sc));
        }
    }
}

std::vector<Method> parse_methods(const YAML::Node& n, const std::string& what) {
    std::vector<Method> out;
    for (const auto& tag : scalar_list<std::string>(n, what)) {
        try {
            const Method m = parse_method(tag);
            for (Method seen : out)
                if (seen == m) fail(n, fmt::format("'{}' lists '{}' twice", what, tag));
            out.push_back(m);
        } catch (const InvalidArgument&) {
            fail(n, fmt::format("'{}': unknown method '{}'", what, tag));
        }
    }
    return out;
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    if (path.is_relative() && !base.empty()) path = base / path;
    return path.lexically_normal();
}

SuiteConfig parse_suite(Section s, const fs::path& base_dir) {
    SuiteConfig c;
    const YAML::Node scenarios = s.node("scenarios");
    if (!scenarios) fail(s.node("scenarios"), "'suite' is missing required key 'scenarios'");
    if (!scenarios.IsSequence() || scenarios.size() == 0) fail(scenarios, "'suite.scenarios' must be a non-empty list");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < scenarios.size(); ++i)
        parse_scenario(Section(scenarios[i], fmt::format("suite.scenarios[{}]", i)), c.scenarios, ids);
    if (YAML::Node m = s.node("methods")) c.methods = parse_methods(m, "suite.methods");
    s.get("replicates", c.replicates);
    s.get("base_seed", c.base_seed);
    std::string out_dir = c.output_dir.string();
    s.get("output_dir", out_dir);
    c.output_dir = resolve(base_dir, out_dir);
    s.get("threads", c.threads);
    s.get("fixed_beta", c.fixed_beta);
    s.get("mse_include_false_positives", c.mse_include_false_positives);
    if (YAML::Node f = s.node("fit")) parse_fit(Section(f, "suite.fit"), c.fit);
    if (YAML::Node t = s.node("transform")) parse_transform(Section(t, "suite.transform"), c.transform);
    s.finish();
    if (c.replicates < 1) fail(s.node("replicates"), "'suite.replicates' must be >= 1");
    if (c.threads && *c.threads < 1) fail(s.node("threads"), "'suite.threads' must be >= 1");
    return c;
}

CaseStudyConfig parse_case(Section s, const fs::path& base_dir) {
    CaseStudyConfig c;
    c.data_path = resolve(base_dir, s.required<std::string>("data_path"));
    c.response_column = s.required<std::string>("response_column");
    s.get("group_column", c.group_column);
    s.get("id_column", c.id_column);
    s.get("fit_group", c.fit_group);
    if (YAML::Node n = s.node("eval_groups")) c.eval_groups = scalar_list<std::string>(n, "case_study.eval_groups");
    if (YAML::Node n = s.node("features")) c.features = scalar_list<std::string>(n, "case_study.features");
    s.get("test_fraction", c.test_fraction);
    s.get("age_threshold", c.age_threshold);
    if (YAML::Node n = s.node("method")) c.method = parse_methods(n, "case_study.method").at(0);
    s.get("seed", c.seed);
    if (YAML::Node n = s.node("test")) {
        const auto t = s.convert<std::string>(n, "test");
        if (t == "welch")
            c.test = GroupTest::welch;
        else if (t == "mann_whitney")
            c.test = GroupTest::mann_whitney;
        else
            fail(n, fmt::format("unknown test '{}' (welch, mann_whitney)", t));
    }
    std::string out_dir = c.output_dir.string();
    s.get("output_dir", out_dir);
    c.output_dir = resolve(base_dir, out_dir);
    s.get("threads", c.threads);
    if (YAML::Node f = s.node("fit")) parse_fit(Section(f, "case_study.fit"), c.fit);
    s.finish();
    try {
        c.validate();
    } catch (const SchemaViolation& e) {
        fail(s.node("data_path"), e.what());
    }
    return c;
}

// Numbers go out as shortest round-trip strings.
std::string num(double v) { return fmt::format("{}", v); }

void emit_fit(YAML::Emitter& e, const FitSettings& f) {
    e << YAML::Key << "fit" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "bootstrap" << YAML::Value << f.bootstrap;
    e << YAML::Key << "alpha" << YAML::Value << num(f.alpha);
    e << YAML::Key << "retune_per_replicate" << YAML::Value << f.retune_per_replicate;
    e << YAML::Key << "folds" << YAML::Value << f.folds;
    e << YAML::Key << "n_lambda" << YAML::Value << f.n_lambda;
    if (f.lambda_ratio) e << YAML::Key << "lambda_ratio" << YAML::Value << num(*f.lambda_ratio);
    e << YAML::Key << "one_se_rule" << YAML::Value << f.one_se_rule;
    e << YAML::Key << "adaptive" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "init_alpha" << YAML::Value << num(f.adaptive.init_alpha);
    e << YAML::Key << "gamma" << YAML::Value << num(f.adaptive.gamma);
    e << YAML::Key << "tau" << YAML::Value << num(f.adaptive.tau);
    e << YAML::EndMap << YAML::EndMap;
}

void emit_block(YAML::Emitter& e, const simgen::Block& b) {
    e << YAML::Flow << YAML::BeginMap;
    if (const auto* u = std::get_if<simgen::UniformBlock>(&b)) {
        e << YAML::Key << "type" << YAML::Value << "uniform" << YAML::Key << "size" << YAML::Value
          << u->size << YAML::Key << "low" << YAML::Value << num(u->low) << YAML::Key << "high"
          << YAML::Value << num(u->high);
    } else if (const auto* c = std::get_if<simgen::ConstantBlock>(&b)) {
        e << YAML::Key << "type" << YAML::Value << "constant" << YAML::Key << "size" << YAML::Value
          << c->size << YAML::Key << "value" << YAML::Value << num(c->value);
    } else {
        e << YAML::Key << "type" << YAML::Value << "identity" << YAML::Key << "size" << YAML::Value
          << simgen::block_size(b);
    }
    e << YAML::EndMap;
}

void emit_scenario(YAML::Emitter& e, const simgen::Scenario& s) {
    e << YAML::BeginMap;
    e << YAML::Key << "id" << YAML::Value << s.id;
    e << YAML::Key << "n" << YAML::Value << s.n;
    e << YAML::Key << "p" << YAML::Value << s.p;
    e << YAML::Key << "sparsity" << YAML::Value << num(s.sparsity);
    e << YAML::Key << "sigma" << YAML::Value << num(s.sigma);
    e << YAML::Key << "simple" << YAML::Value << s.simple;
    e << YAML::Key << "skewness" << YAML::Value << num(s.target_skewness);
    e << YAML::Key << "kurtosis" << YAML::Value << num(s.target_kurtosis);
    if (!s.simple) {
        e << YAML::Key << "covariance" << YAML::Value << YAML::BeginMap;
        e << YAML::Key << "blocks" << YAML::Value << YAML::BeginSeq;
        for (const auto& b : s.cov_spec.blocks) emit_block(e, b);
        e << YAML::EndSeq;
        if (!s.cov_spec.couplings.empty()) {
            e << YAML::Key << "couplings" << YAML::Value << YAML::BeginSeq;
            for (const auto& c : s.cov_spec.couplings)
                e << YAML::Flow << YAML::BeginMap << YAML::Key << "first" << YAML::Value << c.first
                  << YAML::Key << "second" << YAML::Value << c.second << YAML::Key << "value"
                  << YAML::Value << num(c.value) << YAML::EndMap;
            e << YAML::EndSeq;
        }
        e << YAML::EndMap;
    }
    e << YAML::EndMap;
}

void emit(YAML::Emitter& e, const SuiteConfig& c) {
    e << YAML::Key << "suite" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "replicates" << YAML::Value << c.replicates;
    e << YAML::Key << "base_seed" << YAML::Value << c.base_seed;
    e << YAML::Key << "output_dir" << YAML::Value << c.output_dir.string();
    if (c.threads) e << YAML::Key << "threads" << YAML::Value << *c.threads;
    e << YAML::Key << "fixed_beta" << YAML::Value << c.fixed_beta;
    e << YAML::Key << "mse_include_false_positives" << YAML::Value << c.mse_include_false_positives;
    e << YAML::Key << "methods" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (Method m : c.methods) e << std::string(to_string(m));
    e << YAML::EndSeq;
    emit_fit(e, c.fit);
    e << YAML::Key << "transform" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "fit_sample" << YAML::Value << c.transform.fit_sample;
    e << YAML::Key << "fit_replicates" << YAML::Value << c.transform.fit_replicates;
    e << YAML::Key << "max_evals" << YAML::Value << c.transform.max_evals;
    e << YAML::Key << "fit_seed" << YAML::Value << c.transform.fit_seed;
    e << YAML::Key << "per_dataset" << YAML::Value << c.transform.fit_per_dataset;
    e << YAML::EndMap;
    e << YAML::Key << "scenarios" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : c.scenarios) emit_scenario(e, s);
    e << YAML::EndSeq << YAML::EndMap;
}

void emit(YAML::Emitter& e, const CaseStudyConfig& c) {
    e << YAML::Key << "case_study" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "data_path" << YAML::Value << c.data_path.string();
    e << YAML::Key << "response_column" << YAML::Value << c.response_column;
    if (c.group_column) e << YAML::Key << "group_column" << YAML::Value << *c.group_column;
    if (c.id_column) e << YAML::Key << "id_column" << YAML::Value << *c.id_column;
    e << YAML::Key << "fit_group" << YAML::Value << c.fit_group;
    if (!c.eval_groups.empty()) {
        e << YAML::Key << "eval_groups" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const auto& g : c.eval_groups) e << g;
        e << YAML::EndSeq;
    }
    if (!c.features.empty()) {
        e << YAML::Key << "features" << YAML::Value << YAML::Flow << YAML::BeginSeq;
        for (const auto& f : c.features) e << f;
        e << YAML::EndSeq;
    }
    e << YAML::Key << "test_fraction" << YAML::Value << num(c.test_fraction);
    if (c.age_threshold) e << YAML::Key << "age_threshold" << YAML::Value << num(*c.age_threshold);
    e << YAML::Key << "method" << YAML::Value << std::string(to_string(c.method));
    e << YAML::Key << "seed" << YAML::Value << c.seed;
    e << YAML::Key << "test" << YAML::Value << std::string(to_string(c.test));
    e << YAML::Key << "output_dir" << YAML::Value << c.output_dir.string();
    if (c.threads) e << YAML::Key << "threads" << YAML::Value << *c.threads;
    emit_fit(e, c.fit);
    e << YAML::EndMap;
}

}  // namespace

void SuiteConfig::validate() const {
    if (scenarios.empty()) throw SchemaViolation("suite needs at least one scenario");
    if (methods.empty()) throw SchemaViolation("suite needs at least one method");
    if (replicates < 1) throw SchemaViolation("replicates must be >= 1");
    if (threads && *threads < 1) throw SchemaViolation("threads must be >= 1");
    std::set<std::string> ids;
    for (const auto& s : scenarios) {
        try {
            s.validate();
        } catch (const Error& e) {
            throw SchemaViolation(fmt::format("scenario '{}': {}", s.id, e.what()));
        }
        if (!ids.insert(s.id).second) throw SchemaViolation("duplicate scenario id '" + s.id + "'");
    }
}

void CaseStudyConfig::validate() const {
    if (data_path.empty()) throw SchemaViolation("case_study.data_path is required");
    if (response_column.empty()) throw SchemaViolation("case_study.response_column is required");
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw SchemaViolation("case_study.test_fraction must lie in (0, 1)");
    if (!eval_groups.empty() && !group_column)
        throw SchemaViolation("case_study.eval_groups needs group_column");
    if (threads && *threads < 1) throw SchemaViolation("case_study.threads must be >= 1");
    for (const auto& f : features)
        if (f == response_column || (group_column && f == *group_column) || (id_column && f == *id_column))
            throw SchemaViolation("feature '" + f + "' is also the response, group or id column");
}

Config parse_config_string(const std::string& text, const fs::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw SchemaViolation(fmt::format("line {}: {}", e.mark.line + 1, e.msg));
    }
    if (!root.IsMap() || root.size() != 1)
        throw SchemaViolation("config must have exactly one top-level key: 'suite' or 'case_study'");
    Section top(root, "");
    if (YAML::Node s = top.node("suite")) return parse_suite(Section(s, "suite"), base_dir);
    if (YAML::Node c = top.node("case_study")) return parse_case(Section(c, "case_study"), base_dir);
    top.finish();
    throw SchemaViolation("config must have a top-level 'suite' or 'case_study' key");
}

Config parse_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config_string(ss.str(), path.parent_path());
    } catch (const SchemaViolation& e) {
        throw SchemaViolation(path.string() + ": " + e.what());
    }
}

std::string serialize(const Config& cfg) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    std::visit([&](const auto& c) { emit(e, c); }, cfg);
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

}  // namespace berm::config
