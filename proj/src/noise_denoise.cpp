#include "uvt/noise_denoise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace uvt {

double noise_sigma(const Sinogram& clean, double relative_sigma) {
    return relative_sigma * clean.samples.cwiseAbs().mean();
}

Sinogram add_noise(const Sinogram& sinogram, const NoiseConfig& cfg) {
    validate(sinogram);
    if (!(cfg.relative_sigma >= 0) || !std::isfinite(cfg.relative_sigma))
        throw InvalidInput("relative_sigma must be a finite value >= 0");
    Sinogram out = sinogram;
    const double sigma = noise_sigma(sinogram, cfg.relative_sigma);
    if (sigma == 0)
        return out;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (Index i = 0; i < out.count(); ++i)
        for (Index j = 0; j < out.detector_count(); ++j)
            out.samples(i, j) += gauss(rng);
    return out;
}

PcaBasis pca_basis(const Sinogram& sinogram) {
    validate(sinogram);
    const Eigen::MatrixXd y = sinogram.samples;
    PcaBasis basis;
    basis.mean = y.colwise().mean().transpose();
    const Eigen::MatrixXd centred = y.rowwise() - basis.mean.transpose();
    const Eigen::MatrixXd cov = centred.transpose() * centred / double(std::max<Index>(1, y.rows() - 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw NumericalError("PCA eigen-decomposition failed");
    // solver returns ascending order
    basis.variances = solver.eigenvalues().reverse().cwiseMax(0.0);
    basis.components = solver.eigenvectors().rowwise().reverse();
    return basis;
}

namespace {

// Median of the Marchenko-Pastur law with unit variance and ratio 0 < gamma <= 1.
double marchenko_pastur_median(double gamma) {
    const double a = std::pow(1.0 - std::sqrt(gamma), 2), b = std::pow(1.0 + std::sqrt(gamma), 2);
    auto density = [&](double x) {
        const double v = (b - x) * (x - a);
        return v > 0 ? std::sqrt(v) / (2.0 * std::numbers::pi * gamma * x) : 0.0;
    };
    // cumulative mass on a fine midpoint grid, then linear interpolation
    constexpr int steps = 20000;
    const double h = (b - a) / steps;
    double mass = 0;
    for (int i = 0; i < steps; ++i) {
        const double piece = density(a + (i + 0.5) * h) * h;
        if (mass + piece >= 0.5)
            return a + (i + (0.5 - mass) / piece) * h;
        mass += piece;
    }
    return b;
}

} // namespace

int auto_component_count(const PcaBasis& basis, Index projection_count) {
    const Index s = basis.variances.size();
    const Index rank = std::min<Index>(s, projection_count - 1);
    if (rank < 1)
        return 1;
    const double gamma = double(s) / double(projection_count);
    // the bulk of a pure-noise spectrum: sigma^2 MP(gamma), or sigma^2 gamma MP(1/gamma) on the nonzero part
    const double bulk_median = gamma <= 1 ? marchenko_pastur_median(gamma) : gamma * marchenko_pastur_median(1.0 / gamma);
    std::vector<double> nonzero(basis.variances.data(), basis.variances.data() + rank);
    auto mid = nonzero.begin() + static_cast<std::ptrdiff_t>(rank / 2);
    std::nth_element(nonzero.begin(), mid, nonzero.end());
    const double noise_var = *mid / bulk_median;
    const double edge = noise_var * std::pow(1.0 + std::sqrt(gamma), 2);
    int count = 0;
    for (Index j = 0; j < s; ++j)
        if (basis.variances(j) > edge)
            ++count;
    return std::max(1, count);
}

Sinogram pca_denoise(const Sinogram& sinogram, std::optional<int> component_count) {
    validate(sinogram);
    const Index n = sinogram.count();
    if (component_count) {
        if (*component_count < 1)
            throw InvalidInput("component_count must be >= 1");
        if (*component_count >= n)
            throw InvalidInput("component_count must be smaller than the projection count");
    }
    const PcaBasis basis = pca_basis(sinogram);
    const int c = component_count ? std::min<int>(*component_count, static_cast<int>(basis.variances.size()))
                                  : auto_component_count(basis, n);
    const Eigen::MatrixXd top = basis.components.leftCols(c);
    const Eigen::MatrixXd centred = sinogram.samples.rowwise() - basis.mean.transpose();
    Sinogram out = sinogram;
    out.samples = (centred * top) * top.transpose();
    out.samples.rowwise() += basis.mean.transpose();
    return out;
}

} // namespace uvt
