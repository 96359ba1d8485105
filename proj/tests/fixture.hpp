#pragma once

// Synthetic case-study CSV: ten features, age exactly linear in x1, x2, x3,
// a fit group CTR and an eval group T1D drawn from the same distribution.

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace fixture {

inline const char* kTrueFeatures[] = {"x1", "x2", "x3"};

inline void write_case_csv(const std::filesystem::path& path, unsigned seed, int n_fit = 200,
                           int n_eval = 80) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    std::ofstream out(path);
    out << "id,group,age";
    for (int j = 1; j <= 10; ++j) out << ",x" << j;
    out << "\n";
    out.precision(17);
    for (int i = 0; i < n_fit + n_eval; ++i) {
        double x[10];
        for (double& v : x) v = nd(gen);
        const double age = 40.0 + 6.0 * x[0] - 4.0 * x[1] + 3.0 * x[2];
        out << "s" << i << "," << (i < n_fit ? "CTR" : "T1D") << "," << age;
        for (double v : x) out << "," << v;
        out << "\n";
    }
}

inline std::string case_yaml(const std::filesystem::path& data, const std::filesystem::path& out,
                             unsigned seed) {
    return "case_study:\n"
           "  data_path: " + data.string() + "\n"
           "  response_column: age\n"
           "  group_column: group\n"
           "  id_column: id\n"
           "  fit_group: CTR\n"
           "  eval_groups: [T1D]\n"
           "  age_threshold: 45\n"
           "  seed: " + std::to_string(seed) + "\n"
           "  output_dir: " + out.string() + "\n";
}

}  // namespace fixture
