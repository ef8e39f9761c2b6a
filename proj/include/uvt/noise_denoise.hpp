#pragma once

#include <cstdint>
#include <optional>

#include "uvt/tomo_core.hpp"

namespace uvt {

struct NoiseConfig {
    double relative_sigma = 0.15;
    std::uint64_t seed = 0;
};

/// sigma = relative_sigma * mean(|clean samples|).
[[nodiscard]] double noise_sigma(const Sinogram& clean, double relative_sigma);

/// Adds i.i.d. N(0, sigma^2) noise per sample; angles are kept.
[[nodiscard]] Sinogram add_noise(const Sinogram& sinogram, const NoiseConfig& cfg);

struct PcaBasis {
    Eigen::VectorXd mean;          ///< S
    Eigen::VectorXd variances;     ///< eigenvalues, nonincreasing
    Eigen::MatrixXd components;    ///< S x S, column j pairs with variances(j)
};

/// Eigen-decomposition of the S x S covariance of the mean-centred projections.
[[nodiscard]] PcaBasis pca_basis(const Sinogram& sinogram);

/// Number of eigenvalues above the Marchenko-Pastur bulk edge
/// sigma^2 (1 + sqrt(S/N))^2, with sigma^2 estimated by matching the
/// spectrum's median to the Marchenko-Pastur median. At least 1.
[[nodiscard]] int auto_component_count(const PcaBasis& basis, Index projection_count);

/// Replaces each projection by mean + its projection onto the top
/// `component_count` principal directions (auto when empty).
[[nodiscard]] Sinogram pca_denoise(const Sinogram& sinogram, std::optional<int> component_count = std::nullopt);

} // namespace uvt
