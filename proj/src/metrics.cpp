#include "uvt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>

namespace uvt {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double rad_to_deg = 180.0 / std::numbers::pi;

void require_same_shape(const ImageGrid& a, const ImageGrid& b) {
    if (a.pixels.rows() != b.pixels.rows() || a.pixels.cols() != b.pixels.cols())
        throw InvalidInput("image dimensions differ");
}

Eigen::MatrixXd gaussian_window() {
    constexpr int radius = 3;
    constexpr double sigma = 1.5;
    Eigen::MatrixXd w(2 * radius + 1, 2 * radius + 1);
    for (int i = -radius; i <= radius; ++i)
        for (int j = -radius; j <= radius; ++j)
            w(i + radius, j + radius) = std::exp(-(i * i + j * j) / (2 * sigma * sigma));
    return w / w.sum();
}

double mean_abs_residual(std::span<const double> est, std::span<const double> gt, const AngleAlignment& a) {
    double total = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        const double mapped = a.reflected ? a.rotation - est[i] : est[i] - a.rotation;
        total += std::abs(wrap_signed(mapped - gt[i]));
    }
    return total / double(est.size());
}

} // namespace

std::string MetricsReport::triplet() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f/%.2f/%.2f", rrmse, cc, ssim);
    return buf;
}

double rrmse(const ImageGrid& est, const ImageGrid& gt) {
    require_same_shape(est, gt);
    const double denom = gt.pixels.norm();
    if (denom == 0)
        throw InvalidInput("rrmse: ground truth has zero norm");
    return (est.pixels - gt.pixels).norm() / denom;
}

double correlation(const ImageGrid& est, const ImageGrid& gt) {
    require_same_shape(est, gt);
    const Eigen::ArrayXXd a = est.pixels.array() - est.pixels.mean();
    const Eigen::ArrayXXd b = gt.pixels.array() - gt.pixels.mean();
    const double saa = (a * a).sum(), sbb = (b * b).sum();
    if (saa == 0 || sbb == 0)
        throw InvalidInput("correlation undefined for a constant image");
    return (a * b).sum() / std::sqrt(saa * sbb);
}

double ssim(const ImageGrid& est, const ImageGrid& gt) {
    require_same_shape(est, gt);
    static const Eigen::MatrixXd window = gaussian_window();
    constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    const Index k = window.rows();
    const Index rows = est.pixels.rows() - k + 1, cols = est.pixels.cols() - k + 1;
    if (rows < 1 || cols < 1)
        throw InvalidInput("ssim: image smaller than the 7x7 window");
    double total = 0;
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) {
            const auto x = est.pixels.block(r, c, k, k).array();
            const auto y = gt.pixels.block(r, c, k, k).array();
            const auto w = window.array();
            const double mx = (w * x).sum(), my = (w * y).sum();
            const double vx = (w * x * x).sum() - mx * mx;
            const double vy = (w * y * y).sum() - my * my;
            const double cxy = (w * x * y).sum() - mx * my;
            total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    return total / double(rows * cols);
}

double wrap_signed(double angle) {
    double w = std::fmod(angle + std::numbers::pi, two_pi);
    if (w <= 0)
        w += two_pi;
    return w - std::numbers::pi;
}

MadResult mad_angles(std::span<const double> est, std::span<const double> gt, std::span<const Index> sorted_order) {
    if (est.size() != gt.size())
        throw InvalidInput("mad_angles: angle counts differ");
    if (est.empty())
        throw InvalidInput("mad_angles: no angles");
    const std::size_t n = est.size();
    // the L1-optimal circular offset coincides with one of the per-sample offsets
    const std::size_t stride = std::max<std::size_t>(1, n / 4000);

    MadResult best;
    best.mad_degrees = std::numeric_limits<double>::infinity();
    best.anchored_mad_degrees = std::numeric_limits<double>::infinity();
    const std::size_t anchor =
        sorted_order.empty() ? 0 : static_cast<std::size_t>(sorted_order[0]);
    if (anchor >= n)
        throw InvalidInput("mad_angles: anchor index out of range");

    for (bool reflected : {false, true}) {
        for (std::size_t i = 0; i < n; i += stride) {
            const AngleAlignment a{wrap_angle(reflected ? est[i] + gt[i] : est[i] - gt[i]), reflected};
            const double mad = mean_abs_residual(est, gt, a) * rad_to_deg;
            if (mad < best.mad_degrees) {
                best.mad_degrees = mad;
                best.alignment = a;
            }
        }
        const AngleAlignment anchored{wrap_angle(reflected ? est[anchor] + gt[anchor] : est[anchor] - gt[anchor]),
                                      reflected};
        best.anchored_mad_degrees =
            std::min(best.anchored_mad_degrees, mean_abs_residual(est, gt, anchored) * rad_to_deg);
    }
    return best;
}

std::vector<double> align_angles(std::span<const double> est, const AngleAlignment& alignment) {
    std::vector<double> out(est.size());
    for (std::size_t i = 0; i < est.size(); ++i)
        out[i] = wrap_angle(alignment.reflected ? alignment.rotation - est[i] : est[i] - alignment.rotation);
    return out;
}

ImageGrid align_image(const ImageGrid& est, const AngleAlignment& alignment) {
    ImageGrid rotated = rotate_image(est, alignment.rotation);
    return alignment.reflected ? mirror_image(rotated) : rotated;
}

AngleAlignment align_by_correlation(const ImageGrid& est, const ImageGrid& gt, double step_degrees) {
    require_same_shape(est, gt);
    if (!(step_degrees > 0))
        throw InvalidInput("rotation search step must be positive");
    AngleAlignment best;
    double best_cc = -std::numeric_limits<double>::infinity();
    const int steps = static_cast<int>(std::ceil(360.0 / step_degrees));
    for (bool reflected : {false, true})
        for (int s = 0; s < steps; ++s) {
            const AngleAlignment a{double(s) * step_degrees / rad_to_deg, reflected};
            const double cc = correlation(align_image(est, a), gt);
            if (cc > best_cc) {
                best_cc = cc;
                best = a;
            }
        }
    return best;
}

double aligned_pdf(const AngleDistribution& est, double theta, const AngleAlignment& alignment) {
    const double source = alignment.reflected ? alignment.rotation - theta : theta + alignment.rotation;
    return pdf(est, source);
}

double total_variation(const AngleDistribution& est, const AngleDistribution& truth, const AngleAlignment& alignment) {
    const int g = truth.grid_size();
    const double step = two_pi / double(g);
    // midpoint rule: PMF edges fall between samples
    double total = 0;
    for (int i = 0; i < g; ++i) {
        const double theta = (double(i) + 0.5) * step;
        total += std::abs(aligned_pdf(est, theta, alignment) - pdf(truth, theta));
    }
    return 0.5 * total * step;
}

double ordering_concordance(std::span<const Index> permutation, std::span<const double> true_angles) {
    const std::size_t n = permutation.size();
    if (n != true_angles.size())
        throw InvalidInput("ordering_concordance: size mismatch");
    if (n < 2)
        return 1.0;
    std::vector<std::size_t> by_angle(n);
    std::iota(by_angle.begin(), by_angle.end(), std::size_t{0});
    std::stable_sort(by_angle.begin(), by_angle.end(),
                     [&](std::size_t a, std::size_t b) { return true_angles[a] < true_angles[b]; });
    std::vector<std::size_t> rank(n);
    for (std::size_t r = 0; r < n; ++r)
        rank[by_angle[r]] = r;
    std::size_t forward = 0, backward = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto a = rank[static_cast<std::size_t>(permutation[k])];
        const auto b = rank[static_cast<std::size_t>(permutation[(k + 1) % n])];
        if (b == (a + 1) % n)
            ++forward;
        if (a == (b + 1) % n)
            ++backward;
    }
    return double(std::max(forward, backward)) / double(n);
}

MetricsReport compare_images(const ImageGrid& est, const ImageGrid& gt, std::optional<AngleAlignment> alignment) {
    const ImageGrid moved = alignment ? align_image(est, *alignment) : est;
    MetricsReport report;
    report.rrmse = rrmse(moved, gt);
    report.cc = correlation(moved, gt);
    ImageGrid a = moved, b = gt;
    a.pixels = a.pixels.cwiseMax(0.0).cwiseMin(1.0);
    b.pixels = b.pixels.cwiseMax(0.0).cwiseMin(1.0);
    report.ssim = ssim(a, b);
    if (alignment)
        report.alignment = *alignment;
    return report;
}

} // namespace uvt
