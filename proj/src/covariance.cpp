#include <algorithm>
#include <cmath>
#include <string>

#include "berm/errors.hpp"
#include "berm/seed.hpp"
#include "berm/simgen.hpp"

namespace berm::simgen {

int block_size(const Block& b) noexcept {
    return std::visit([](const auto& blk) { return blk.size; }, b);
}

int CovarianceSpec::dimension() const noexcept {
    int p = 0;
    for (const auto& b : blocks) p += block_size(b);
    return p;
}

void CovarianceSpec::validate() const {
    if (blocks.empty()) throw InvalidArgument("covariance spec has no blocks");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const std::string where = "block " + std::to_string(i) + ": ";
        if (block_size(blocks[i]) < 1) throw InvalidArgument(where + "size must be >= 1");
        if (const auto* u = std::get_if<UniformBlock>(&blocks[i])) {
            if (!(0.0 <= u->low && u->low <= u->high && u->high <= 1.0))
                throw InvalidArgument(where + "need 0 <= low <= high <= 1");
        } else if (const auto* c = std::get_if<ConstantBlock>(&blocks[i])) {
            if (!(std::abs(c->value) < 1.0)) throw InvalidArgument(where + "need |value| < 1");
        }
    }
    for (const auto& c : couplings) {
        const int nb = static_cast<int>(blocks.size());
        if (c.first < 0 || c.first >= nb || c.second < 0 || c.second >= nb || c.first == c.second)
            throw InvalidArgument("coupling must join two distinct existing blocks");
        if (!(std::abs(c.value) < 1.0)) throw InvalidArgument("coupling needs |value| < 1");
    }
}

CovarianceSpec CovarianceSpec::moderate() {
    return CovarianceSpec{
        {UniformBlock{20, 0.6, 1.0}, UniformBlock{20, 0.3, 0.5}, ConstantBlock{20, 0.05}},
        {Coupling{1, 2, 0.2}}};
}

CovarianceSpec CovarianceSpec::high_dimensional() {
    return CovarianceSpec{{UniformBlock{100, 0.6, 1.0}, UniformBlock{100, 0.3, 0.5},
                           ConstantBlock{100, 0.1}, IdentityBlock{200}},
                          {Coupling{1, 2, 0.1}}};
}

Matrix nearest_correlation_pd(const Matrix& S, double floor) {
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
    if (eig.info() != Eigen::Success) throw Error("eigendecomposition failed");
    if (eig.eigenvalues().minCoeff() >= floor) return S;

    const Vector clipped = eig.eigenvalues().cwiseMax(floor);
    Matrix A = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    const Vector inv_sd = A.diagonal().cwiseSqrt().cwiseInverse();
    A = inv_sd.asDiagonal() * A * inv_sd.asDiagonal();
    A = (0.5 * (A + A.transpose())).eval();
    A.diagonal().setOnes();

    // Renormalization can pull the smallest eigenvalue a little under the
    // floor; a tiny shrink toward I restores it without touching the diagonal.
    const double low = Eigen::SelfAdjointEigenSolver<Matrix>(A, Eigen::EigenvaluesOnly)
                           .eigenvalues()
                           .minCoeff();
    if (low < floor) {
        const double target = floor * (1.0 + 1e-6);
        const double t = (target - low) / (1.0 - low);
        A = (1.0 - t) * A + t * Matrix::Identity(A.rows(), A.cols());
        A.diagonal().setOnes();
    }
    return A;
}

Matrix build_covariance(const CovarianceSpec& spec, std::uint64_t seed) {
    spec.validate();
    const int p = spec.dimension();
    Matrix M = Matrix::Identity(p, p);
    std::vector<int> offset(spec.blocks.size() + 1, 0);
    for (std::size_t b = 0; b < spec.blocks.size(); ++b)
        offset[b + 1] = offset[b] + block_size(spec.blocks[b]);

    Rng rng = make_rng(seed);
    for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
        const int o = offset[b];
        const int k = block_size(spec.blocks[b]);
        if (const auto* u = std::get_if<UniformBlock>(&spec.blocks[b])) {
            for (int i = 0; i < k; ++i)
                for (int j = i + 1; j < k; ++j)
                    M(o + i, o + j) = M(o + j, o + i) = uniform(rng, u->low, u->high);
        } else if (const auto* c = std::get_if<ConstantBlock>(&spec.blocks[b])) {
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    if (i != j) M(o + i, o + j) = c->value;
        }
    }
    for (const auto& c : spec.couplings) {
        const auto r0 = static_cast<std::size_t>(c.first);
        const auto c0 = static_cast<std::size_t>(c.second);
        M.block(offset[r0], offset[c0], offset[r0 + 1] - offset[r0], offset[c0 + 1] - offset[c0])
            .setConstant(c.value);
        M.block(offset[c0], offset[r0], offset[c0 + 1] - offset[c0], offset[r0 + 1] - offset[r0])
            .setConstant(c.value);
    }
    return nearest_correlation_pd(M);
}

}  // namespace berm::simgen
