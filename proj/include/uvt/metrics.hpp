#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uvt/directional_dist.hpp"
#include "uvt/tomo_core.hpp"

namespace uvt {

/// Global rotation/reflection relating estimated angles to ground truth:
/// truth = est - rotation, or truth = rotation - est when reflected.
struct AngleAlignment {
    double rotation = 0.0;
    bool reflected = false;
};

struct MadResult {
    double mad_degrees = 0.0;          ///< minimized over rotation and reflection
    double anchored_mad_degrees = 0.0; ///< rotation fixed by the first sorted projection
    AngleAlignment alignment;
};

struct MetricsReport {
    double rrmse = 0.0;
    double cc = 0.0;
    double ssim = 0.0;
    std::optional<double> mad_degrees;
    AngleAlignment alignment;

    /// "RRMSE/CC/SSIM" with two decimals.
    [[nodiscard]] std::string triplet() const;
};

[[nodiscard]] double rrmse(const ImageGrid& est, const ImageGrid& gt);
[[nodiscard]] double correlation(const ImageGrid& est, const ImageGrid& gt);

/// Mean local SSIM: 7x7 Gaussian window (sigma 1.5) over fully interior
/// positions, C1 = 0.01^2, C2 = 0.03^2 for unit dynamic range.
[[nodiscard]] double ssim(const ImageGrid& est, const ImageGrid& gt);

/// Wraps into (-pi, pi].
[[nodiscard]] double wrap_signed(double angle);

/// Mean circular absolute difference in degrees after the best global
/// rotation and reflection. `sorted_order[0]` names the anchor projection for
/// the anchored variant.
[[nodiscard]] MadResult mad_angles(std::span<const double> est, std::span<const double> gt,
                                   std::span<const Index> sorted_order);

/// Maps estimated angles into the ground-truth frame.
[[nodiscard]] std::vector<double> align_angles(std::span<const double> est, const AngleAlignment& alignment);

/// Moves a reconstruction made at estimated angles into the ground-truth frame.
[[nodiscard]] ImageGrid align_image(const ImageGrid& est, const AngleAlignment& alignment);

/// Exhaustive search over rotations (step in degrees) and reflection that
/// maximizes the correlation with `gt`.
[[nodiscard]] AngleAlignment align_by_correlation(const ImageGrid& est, const ImageGrid& gt, double step_degrees = 1.0);

/// Density of the estimated distribution expressed in the ground-truth frame.
[[nodiscard]] double aligned_pdf(const AngleDistribution& est, double theta, const AngleAlignment& alignment);

/// 1/2 integral |f_est - f_truth| on the truth's grid, est mapped through `alignment`.
[[nodiscard]] double total_variation(const AngleDistribution& est, const AngleDistribution& truth,
                                     const AngleAlignment& alignment = {});

/// Fraction of circularly adjacent pairs in `permutation` that are also
/// adjacent in the true circular order, counted in the better of the two
/// directions (rotation does not affect adjacency).
[[nodiscard]] double ordering_concordance(std::span<const Index> permutation, std::span<const double> true_angles);

/// RRMSE / CC on the raw images, SSIM on both clipped to [0, 1]. When an
/// alignment is given, `est` is moved into the ground-truth frame first.
[[nodiscard]] MetricsReport compare_images(const ImageGrid& est, const ImageGrid& gt,
                                           std::optional<AngleAlignment> alignment = std::nullopt);

} // namespace uvt
