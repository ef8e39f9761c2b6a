#pragma once

// Parallel-beam 2D tomography on a square raster: image/sinogram types,
// bilinear ray-sampled Radon transform and filtered back projection.
//
// Geometry. Pixel (r, c) of an S x S grid sits at x = c - (S-1)/2,
// y = r - (S-1)/2 (pixel units). A projection at angle theta integrates along
// the lines x cos(theta) + y sin(theta) = rho. Detectors are uniformly spaced
// across the inscribed-circle diameter (S pixels), and everything outside the
// inscribed circle is zeroed before projection, so every view sees the same
// support.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "uvt/errors.hpp"

namespace uvt {

using Eigen::Index;

template <typename Scalar>
using Raster = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct BasicImageGrid {
    Raster<Scalar> pixels;
    Scalar pixel_spacing{1};

    BasicImageGrid() = default;
    explicit BasicImageGrid(Index size, Scalar spacing = Scalar(1))
        : pixels(Raster<Scalar>::Zero(size, size)), pixel_spacing(spacing) {}
    explicit BasicImageGrid(Raster<Scalar> values, Scalar spacing = Scalar(1))
        : pixels(std::move(values)), pixel_spacing(spacing) {}

    [[nodiscard]] Index size() const { return pixels.rows(); }
};

using ImageGrid = BasicImageGrid<double>;

/// N projections stored as the rows of an N x S matrix. Angles (radians,
/// [0, 2pi)) are optional per projection: simulated data keeps ground truth,
/// unknown-view data has none.
template <typename Scalar>
struct BasicSinogram {
    Raster<Scalar> samples;
    std::vector<std::optional<Scalar>> angles;

    BasicSinogram() = default;
    BasicSinogram(Index count, Index detector_count)
        : samples(Raster<Scalar>::Zero(count, detector_count)), angles(static_cast<std::size_t>(count)) {}

    [[nodiscard]] Index count() const { return samples.rows(); }
    [[nodiscard]] Index detector_count() const { return samples.cols(); }

    [[nodiscard]] bool has_all_angles() const {
        return std::all_of(angles.begin(), angles.end(), [](const auto& a) { return a.has_value(); });
    }

    [[nodiscard]] std::vector<Scalar> angle_values() const {
        std::vector<Scalar> out;
        out.reserve(angles.size());
        for (std::size_t i = 0; i < angles.size(); ++i) {
            if (!angles[i])
                throw InvalidInput("projection " + std::to_string(i) + " carries no angle");
            out.push_back(*angles[i]);
        }
        return out;
    }

    void clear_angles() { std::fill(angles.begin(), angles.end(), std::nullopt); }
};

using Sinogram = BasicSinogram<double>;

enum class RampFilter { RamLak, Hann };

/// How each view is weighted in the back projection sum. `Gap` uses half the
/// circular angular gap to the neighbouring views (a quadrature rule for
/// non-uniform angle sets); for uniform angles both reduce to pi / N.
enum class AngleWeighting { Uniform, Gap };

template <typename Scalar>
[[nodiscard]] Scalar wrap_angle(Scalar theta) {
    constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    Scalar w = std::fmod(theta, two_pi);
    if (w < 0)
        w += two_pi;
    if (w >= two_pi)
        w = 0;
    return w;
}

template <typename Scalar>
void validate(const BasicImageGrid<Scalar>& image) {
    if (image.pixels.rows() != image.pixels.cols())
        throw InvalidInput("image must be square");
    if (image.size() < 2)
        throw InvalidInput("image size must be at least 2");
    if (!image.pixels.allFinite())
        throw InvalidInput("image contains non-finite values");
    if (!(image.pixel_spacing > 0))
        throw InvalidInput("pixel spacing must be positive");
}

template <typename Scalar>
void validate(const BasicSinogram<Scalar>& sinogram) {
    if (sinogram.count() < 1)
        throw InvalidInput("sinogram holds no projections");
    if (sinogram.detector_count() < 2)
        throw InvalidInput("sinogram needs at least 2 detectors");
    if (static_cast<Index>(sinogram.angles.size()) != sinogram.count())
        throw InvalidInput("sinogram angle list does not match projection count");
    if (!sinogram.samples.allFinite())
        throw InvalidInput("sinogram contains non-finite samples");
}

/// Copy of `image` with every pixel whose centre lies outside the inscribed
/// circle set to zero.
template <typename Scalar>
[[nodiscard]] BasicImageGrid<Scalar> apply_circle_mask(BasicImageGrid<Scalar> image) {
    const Index s = image.size();
    const Scalar centre = Scalar(s - 1) / 2;
    const Scalar radius2 = Scalar(s * s) / 4;
    for (Index r = 0; r < s; ++r)
        for (Index c = 0; c < s; ++c) {
            const Scalar x = Scalar(c) - centre, y = Scalar(r) - centre;
            if (x * x + y * y > radius2)
                image.pixels(r, c) = 0;
        }
    return image;
}

namespace detail {

template <typename Scalar>
[[nodiscard]] inline Scalar bilinear(const Raster<Scalar>& img, Scalar row, Scalar col) {
    const Index n_rows = img.rows(), n_cols = img.cols();
    const Scalar rf = std::floor(row), cf = std::floor(col);
    const Index r0 = static_cast<Index>(rf), c0 = static_cast<Index>(cf);
    if (r0 < -1 || c0 < -1 || r0 >= n_rows || c0 >= n_cols)
        return 0;
    const Scalar fr = row - rf, fc = col - cf;
    auto at = [&](Index r, Index c) -> Scalar {
        return (r < 0 || c < 0 || r >= n_rows || c >= n_cols) ? Scalar(0) : img(r, c);
    };
    return (1 - fr) * ((1 - fc) * at(r0, c0) + fc * at(r0, c0 + 1)) +
           fr * ((1 - fc) * at(r0 + 1, c0) + fc * at(r0 + 1, c0 + 1));
}

// Line integrals of an already-masked raster at one angle, into `out`.
template <typename Scalar>
void project_masked(const Raster<Scalar>& masked, Scalar spacing, Scalar theta,
                    Eigen::Ref<Vector<Scalar>> out) {
    const Index s = masked.rows();
    const Index detectors = out.size();
    const Scalar centre = Scalar(s - 1) / 2;
    const Scalar det_centre = Scalar(detectors - 1) / 2;
    const Scalar det_step = Scalar(s) / Scalar(detectors);
    const Scalar ct = std::cos(theta), st = std::sin(theta);
    for (Index j = 0; j < detectors; ++j) {
        const Scalar rho = (Scalar(j) - det_centre) * det_step;
        Scalar acc = 0;
        for (Index k = 0; k < s; ++k) {
            const Scalar t = Scalar(k) - centre;
            // point = rho * (cos, sin) + t * (-sin, cos)
            const Scalar x = rho * ct - t * st;
            const Scalar y = rho * st + t * ct;
            acc += bilinear(masked, y + centre, x + centre);
        }
        out(j) = acc * spacing;
    }
}

} // namespace detail

/// Discrete Radon transform: one projection per angle, ground-truth angle
/// stored on each projection (wrapped into [0, 2pi)).
template <typename Scalar>
[[nodiscard]] BasicSinogram<Scalar> radon_forward(const BasicImageGrid<Scalar>& image,
                                                  std::span<const Scalar> angles, Index detector_count) {
    validate(image);
    if (detector_count < 2)
        throw InvalidInput("detector_count must be at least 2");
    for (std::size_t i = 0; i < angles.size(); ++i)
        if (!std::isfinite(angles[i]))
            throw InvalidInput("angle " + std::to_string(i) + " is not finite");

    const auto masked = apply_circle_mask(image);
    BasicSinogram<Scalar> sino(static_cast<Index>(angles.size()), detector_count);
    Vector<Scalar> row(detector_count);
    for (std::size_t i = 0; i < angles.size(); ++i) {
        detail::project_masked<Scalar>(masked.pixels, image.pixel_spacing, angles[i], row);
        sino.samples.row(static_cast<Index>(i)) = row.transpose();
        sino.angles[i] = wrap_angle(angles[i]);
    }
    return sino;
}

template <typename Scalar>
[[nodiscard]] BasicSinogram<Scalar> radon_forward(const BasicImageGrid<Scalar>& image,
                                                  const std::vector<Scalar>& angles) {
    return radon_forward(image, std::span<const Scalar>(angles), image.size());
}

/// Ramp filter as a spatial convolution kernel on detector pixels.
/// Ram-Lak uses the band-limited discrete ramp (h0 = 1/4, odd taps
/// -1/(pi n)^2); Hann multiplies its spectrum by a raised cosine.
template <typename Scalar>
class ProjectionFilter {
public:
    ProjectionFilter(Index detector_count, RampFilter kind) : detectors_(detector_count), kind_(kind) {
        if (detector_count < 2)
            throw InvalidInput("filter needs at least 2 detectors");
        const Index taps = 2 * detector_count;
        std::vector<double> ramp(static_cast<std::size_t>(taps), 0.0);
        for (Index n = -(detector_count - 1); n <= detector_count - 1; ++n) {
            double h = 0;
            if (n == 0)
                h = 0.25;
            else if (n % 2 != 0)
                h = -1.0 / (std::numbers::pi * std::numbers::pi * double(n) * double(n));
            ramp[static_cast<std::size_t>((n + taps) % taps)] = h;
        }
        if (kind == RampFilter::Hann) {
            Eigen::FFT<double> fft;
            std::vector<std::complex<double>> spectrum;
            fft.fwd(spectrum, ramp);
            for (Index k = 0; k < taps; ++k) {
                const double f = double(k <= taps / 2 ? k : k - taps) / double(taps);
                spectrum[static_cast<std::size_t>(k)] *= 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * f));
            }
            std::vector<std::complex<double>> back;
            fft.inv(back, spectrum);
            for (Index k = 0; k < taps; ++k)
                ramp[static_cast<std::size_t>(k)] = back[static_cast<std::size_t>(k)].real();
        }
        // kernel_(d + S - 1) holds the tap for offset d in [-(S-1), S-1]
        kernel_.resize(2 * detector_count - 1);
        for (Index d = -(detector_count - 1); d <= detector_count - 1; ++d)
            kernel_(d + detector_count - 1) = Scalar(ramp[static_cast<std::size_t>((d + taps) % taps)]);
    }

    [[nodiscard]] Index detector_count() const { return detectors_; }
    [[nodiscard]] RampFilter kind() const { return kind_; }
    [[nodiscard]] const Vector<Scalar>& kernel() const { return kernel_; }

    /// Filters every row of `rows` (N x S).
    [[nodiscard]] Raster<Scalar> apply(const Raster<Scalar>& rows) const {
        if (rows.cols() != detectors_)
            throw InvalidInput("filter detector count mismatch");
        Raster<Scalar> out(rows.rows(), rows.cols());
        const Index s = detectors_;
        for (Index i = 0; i < rows.rows(); ++i)
            for (Index j = 0; j < s; ++j) {
                Scalar acc = 0;
                for (Index m = 0; m < s; ++m)
                    acc += rows(i, m) * kernel_(j - m + s - 1);
                out(i, j) = acc;
            }
        return out;
    }

private:
    Index detectors_;
    RampFilter kind_;
    Vector<Scalar> kernel_;
};

/// Back projection weights for a set of view angles.
template <typename Scalar>
[[nodiscard]] std::vector<Scalar> angle_weights(std::span<const Scalar> angles, AngleWeighting weighting) {
    const std::size_t n = angles.size();
    std::vector<Scalar> w(n, n ? std::numbers::pi_v<Scalar> / Scalar(n) : Scalar(0));
    if (weighting == AngleWeighting::Uniform || n < 2)
        return w;
    constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<Scalar> wrapped(n);
    for (std::size_t i = 0; i < n; ++i)
        wrapped[i] = wrap_angle(angles[i]);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return wrapped[a] < wrapped[b]; });
    for (std::size_t k = 0; k < n; ++k) {
        const Scalar prev = wrapped[order[(k + n - 1) % n]] - (k == 0 ? two_pi : Scalar(0));
        const Scalar next = wrapped[order[(k + 1) % n]] + (k + 1 == n ? two_pi : Scalar(0));
        // half of the circular gap, halved again because [0, 2pi) covers each line twice
        w[order[k]] = (next - prev) / Scalar(4);
    }
    return w;
}

/// Back projection of pre-filtered rows. `rows[i]` selects the filtered row
/// that is smeared at `angles[i]` with weight `weights[i]`. The output grid
/// covers the same inscribed circle as the detector array.
template <typename Scalar>
[[nodiscard]] BasicImageGrid<Scalar> backproject(const Raster<Scalar>& filtered, std::span<const Index> rows,
                                                 std::span<const Scalar> angles, std::span<const Scalar> weights,
                                                 Index output_size, Scalar pixel_spacing = Scalar(1)) {
    if (rows.size() != angles.size() || rows.size() != weights.size())
        throw InvalidInput("backproject: rows, angles and weights differ in length");
    if (output_size < 2)
        throw InvalidInput("output_size must be at least 2");
    const Index detectors = filtered.cols();
    BasicImageGrid<Scalar> out(output_size, pixel_spacing);
    const Scalar centre = Scalar(output_size - 1) / 2;
    const Scalar det_centre = Scalar(detectors - 1) / 2;
    // output pixel pitch measured in detector pitches
    const Scalar pitch = Scalar(detectors) / Scalar(output_size);
    const Scalar radius2 = Scalar(output_size * output_size) / 4;

    std::vector<Index> c_lo(static_cast<std::size_t>(output_size)), c_hi(static_cast<std::size_t>(output_size));
    for (Index r = 0; r < output_size; ++r) {
        const Scalar y = Scalar(r) - centre;
        const Scalar half = radius2 >= y * y ? std::sqrt(radius2 - y * y) : Scalar(-1);
        c_lo[static_cast<std::size_t>(r)] = half < 0 ? 1 : static_cast<Index>(std::ceil(centre - half));
        c_hi[static_cast<std::size_t>(r)] = half < 0 ? 0 : static_cast<Index>(std::floor(centre + half));
    }

    for (std::size_t v = 0; v < rows.size(); ++v) {
        const Index row = rows[v];
        if (row < 0 || row >= filtered.rows())
            throw InvalidInput("backproject: row index out of range");
        const Scalar* q = filtered.row(row).data();
        const Scalar ct = std::cos(angles[v]) * pitch, st = std::sin(angles[v]) * pitch;
        const Scalar w = weights[v];
        for (Index r = 0; r < output_size; ++r) {
            const Scalar y = Scalar(r) - centre;
            Scalar* dst = out.pixels.row(r).data();
            const Scalar base = y * st + det_centre - centre * ct;
            for (Index c = c_lo[static_cast<std::size_t>(r)]; c <= c_hi[static_cast<std::size_t>(r)]; ++c) {
                const Scalar u = base + Scalar(c) * ct;
                const Scalar uf = std::floor(u);
                const Index i0 = static_cast<Index>(uf);
                const Scalar f = u - uf;
                Scalar val = 0;
                if (i0 >= 0 && i0 < detectors)
                    val += (1 - f) * q[i0];
                if (i0 + 1 >= 0 && i0 + 1 < detectors)
                    val += f * q[i0 + 1];
                dst[c] += w * val;
            }
        }
    }
    // ramp taps are per detector pitch; one pitch is pixel_spacing / pitch world units
    out.pixels *= pitch / pixel_spacing;
    return out;
}

/// Filtered back projection of a fully labelled sinogram. `output_size` of 0
/// reconstructs on an S x S grid.
template <typename Scalar>
[[nodiscard]] BasicImageGrid<Scalar> fbp_reconstruct(const BasicSinogram<Scalar>& sinogram,
                                                     RampFilter filter = RampFilter::RamLak, Index output_size = 0,
                                                     AngleWeighting weighting = AngleWeighting::Gap,
                                                     Scalar pixel_spacing = Scalar(1)) {
    validate(sinogram);
    const auto angles = sinogram.angle_values();
    const Index size = output_size > 0 ? output_size : sinogram.detector_count();
    const ProjectionFilter<Scalar> ramp(sinogram.detector_count(), filter);
    const Raster<Scalar> filtered = ramp.apply(sinogram.samples);
    std::vector<Index> rows(angles.size());
    std::iota(rows.begin(), rows.end(), Index{0});
    const auto weights = angle_weights<Scalar>(angles, weighting);
    return backproject<Scalar>(filtered, rows, angles, weights, size, pixel_spacing);
}

/// Resamples `image` so that its projection at theta equals the projection of
/// the original at theta + phi (bilinear; g'(x) = g(R_phi x)).
template <typename Scalar>
[[nodiscard]] BasicImageGrid<Scalar> rotate_image(const BasicImageGrid<Scalar>& image, Scalar phi) {
    const Index s = image.size();
    BasicImageGrid<Scalar> out(s, image.pixel_spacing);
    const Scalar centre = Scalar(s - 1) / 2;
    const Scalar cp = std::cos(phi), sp = std::sin(phi);
    for (Index r = 0; r < s; ++r)
        for (Index c = 0; c < s; ++c) {
            const Scalar x = Scalar(c) - centre, y = Scalar(r) - centre;
            const Scalar xs = cp * x - sp * y, ys = sp * x + cp * y;
            out.pixels(r, c) = detail::bilinear(image.pixels, ys + centre, xs + centre);
        }
    return out;
}

/// Mirror y -> -y; projection at theta becomes the original's at -theta.
template <typename Scalar>
[[nodiscard]] BasicImageGrid<Scalar> mirror_image(const BasicImageGrid<Scalar>& image) {
    BasicImageGrid<Scalar> out = image;
    out.pixels = image.pixels.colwise().reverse();
    return out;
}

enum class PhantomKind { Disk, SheppLogan, SheppLoganAsymmetric, Ellipses };

/// Disk: radius S/4 centred, values in {0, 1}. Shepp-Logan: the modified
/// (high-contrast) ellipse phantom, nonnegative with max 1. The asymmetric
/// variant adds one off-axis lobe. Ellipses: 14 overlapping ellipses from a
/// fixed mt19937_64 stream (raw bits, so identical on every platform),
/// normalized to max 1.
template <typename Scalar = double>
[[nodiscard]] BasicImageGrid<Scalar> make_phantom(PhantomKind kind, Index size) {
    if (size < 2)
        throw InvalidInput("phantom size must be at least 2");
    BasicImageGrid<Scalar> img(size);
    const double centre = double(size - 1) / 2;
    if (kind == PhantomKind::Disk) {
        const double radius2 = double(size * size) / 16.0;
        for (Index r = 0; r < size; ++r)
            for (Index c = 0; c < size; ++c) {
                const double x = double(c) - centre, y = double(r) - centre;
                img.pixels(r, c) = x * x + y * y <= radius2 ? Scalar(1) : Scalar(0);
            }
        return img;
    }
    if (size < 16)
        throw InvalidInput("ellipse phantoms need size >= 16");
    struct Ellipse { double value, a, b, x0, y0, phi_deg; };
    std::vector<Ellipse> random_set;
    if (kind == PhantomKind::Ellipses) {
        std::mt19937_64 bits(12345);
        auto unit = [&] { return double(bits() >> 11) * 0x1.0p-53; };
        for (int i = 0; i < 14; ++i) {
            const double r = 0.6 * std::sqrt(unit()), t = 2 * std::numbers::pi * unit();
            const double value = 0.2 + 0.8 * unit(), a = 0.05 + 0.2 * unit(), b = 0.05 + 0.2 * unit();
            random_set.push_back({value, a, b, r * std::cos(t), r * std::sin(t), 180.0 * unit()});
        }
    }
    // the extra lobe breaks the near mirror symmetry y(theta) ~ y(pi - theta)
    static constexpr Ellipse lobe{0.5, 0.1, 0.2, 0.3, 0.35, 0.0};
    static constexpr Ellipse ellipses[] = {
        {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},       {-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0},
        {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},   {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
        {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},      {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
        {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},    {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
        {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},  {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
    };
    const double half = double(size) / 2;
    for (Index r = 0; r < size; ++r)
        for (Index c = 0; c < size; ++c) {
            // unit square coordinates, y up
            const double x = (double(c) - centre) / half, y = -(double(r) - centre) / half;
            double v = 0;
            auto add = [&](const Ellipse& e) {
                const double phi = e.phi_deg * std::numbers::pi / 180.0;
                const double dx = x - e.x0, dy = y - e.y0;
                const double u = dx * std::cos(phi) + dy * std::sin(phi);
                const double w = -dx * std::sin(phi) + dy * std::cos(phi);
                if ((u * u) / (e.a * e.a) + (w * w) / (e.b * e.b) <= 1.0)
                    v += e.value;
            };
            if (kind == PhantomKind::Ellipses) {
                for (const auto& e : random_set)
                    add(e);
            } else {
                for (const auto& e : ellipses)
                    add(e);
                if (kind == PhantomKind::SheppLoganAsymmetric)
                    add(lobe);
            }
            img.pixels(r, c) = Scalar(std::max(v, 0.0));
        }
    const Scalar peak = img.pixels.maxCoeff();
    if (peak > 0)
        img.pixels /= peak;
    return img;
}

} // namespace uvt
