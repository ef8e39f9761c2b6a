#pragma once

#include <optional>
#include <vector>

#include "uvt/tomo_core.hpp"

namespace uvt {

/// Angular order recovered from a Laplacian eigenmap.
struct OrderingResult {
    std::vector<Index> permutation;          ///< permutation[k] = projection holding rank k
    std::vector<double> placeholder_angles;  ///< beta_i in [0, 2pi), per input projection
    Eigen::MatrixX2d eigen_coords;           ///< psi_i, one row per input projection
    Eigen::VectorXd eigenvalues;             ///< smallest three Laplacian eigenvalues
};

/// Graph construction for the eigenmap. With `neighbors` > 0 the affinity is
/// restricted to the symmetrized k-nearest-neighbour graph with self-tuning
/// scales eps_ij = sigma_i sigma_j (sigma_i: distance to the k-th neighbour),
/// unless `scale` fixes a global eps. `neighbors` = 0 uses the dense kernel.
struct OrderingConfig {
    std::optional<double> scale;
    int neighbors = 8;
};

/// Median of the squared pairwise distances between projections.
[[nodiscard]] double median_squared_distance(const Sinogram& sinogram);

/// W_ij = exp(-||y_i - y_j||^2 / scale); scale defaults to the median squared
/// distance.
[[nodiscard]] Eigen::MatrixXd build_affinity(const Sinogram& sinogram, std::optional<double> scale = std::nullopt);

/// Sparse variant: nonzero only between k-nearest neighbours (either direction).
[[nodiscard]] Eigen::MatrixXd build_knn_affinity(const Sinogram& sinogram, int neighbors,
                                                 std::optional<double> scale = std::nullopt);

/// L = I - D^{-1/2} W D^{-1/2}.
[[nodiscard]] Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& affinity);

/// Embeds the projections with the two eigenvectors of the smallest nontrivial
/// Laplacian eigenvalues, takes beta = atan2(psi_1, psi_2) in [0, 2pi) and
/// sorts by it (ties by input index).
[[nodiscard]] OrderingResult laplacian_eigenmap_order(const Sinogram& sinogram, const OrderingConfig& cfg = {});

} // namespace uvt
