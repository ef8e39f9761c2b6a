#pragma once

// Circular angle distributions on [0, 2pi): a mixture of von Mises densities
// (MVF) or a piecewise-constant PMF over equal bins, tabulated on a uniform
// grid, plus the order statistics of N i.i.d. draws from them.
//
// Order statistics are taken on the linear interval [0, 2pi): the k-th
// smallest angle, not a circular quantity.

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace uvt {

struct VonMisesComponent {
    double weight = 1.0;
    double mean = 0.0;          ///< radians, wrapped into [0, 2pi)
    double concentration = 0.0; ///< kappa >= 0
};

struct MvfParams {
    std::vector<VonMisesComponent> components;
};

/// Bin l covers [l w, (l+1) w) with w = 2pi / L.
struct PmfParams {
    std::vector<double> probabilities;
};

class AngleDistribution {
public:
    using Model = std::variant<MvfParams, PmfParams>;
    static constexpr int default_grid_size = 4096;

    /// Validates the parameters. Weights / probabilities must lie in [0, 1] and
    /// sum to 1 within 1e-9; concentrations must be finite and >= 0; the grid
    /// size must be even and >= 256.
    explicit AngleDistribution(Model model, int grid_size = default_grid_size);

    [[nodiscard]] static AngleDistribution uniform(int grid_size = default_grid_size);

    [[nodiscard]] const Model& model() const { return model_; }
    [[nodiscard]] bool is_mvf() const { return std::holds_alternative<MvfParams>(model_); }
    [[nodiscard]] const MvfParams& mvf() const { return std::get<MvfParams>(model_); }
    [[nodiscard]] const PmfParams& pmf() const { return std::get<PmfParams>(model_); }
    [[nodiscard]] int grid_size() const { return grid_size_; }

private:
    Model model_;
    int grid_size_;
};

/// log I0(kappa): power series below 20, large-argument expansion above.
[[nodiscard]] double log_bessel_i0(double kappa);

[[nodiscard]] double pdf(const AngleDistribution& dist, double theta);
[[nodiscard]] double cdf(const AngleDistribution& dist, double theta);

/// The distribution sampled at the grid nodes theta_i = i 2pi / G, i = 0..G.
/// `cumulative` is the normalized cumulative trapezoid integral for MVF and
/// the exact piecewise-linear CDF for PMF; `survival` = 1 - cumulative,
/// accumulated from the right so it keeps relative precision near 1.
struct DistributionGrid {
    Eigen::VectorXd theta;
    Eigen::VectorXd density;
    Eigen::VectorXd cumulative;
    Eigen::VectorXd survival;
};

[[nodiscard]] DistributionGrid tabulate(const AngleDistribution& dist);

/// Trapezoid integral over a function sampled on the full grid.
[[nodiscard]] double grid_integral(const Eigen::VectorXd& values, double step);

/// Density of the k-th of N order statistics on the grid nodes, evaluated in
/// the log domain and renormalized to unit grid integral.
[[nodiscard]] Eigen::VectorXd order_stat_pdf(const AngleDistribution& dist, int k, int n);

/// E[theta_(k)] by grid quadrature of the renormalized order-statistic density.
[[nodiscard]] double order_stat_mean(const AngleDistribution& dist, int k, int n);

/// E[theta_(k)] for k = 1..N from a single tabulation.
[[nodiscard]] std::vector<double> order_stat_means(const AngleDistribution& dist, int n);
[[nodiscard]] std::vector<double> order_stat_means(const DistributionGrid& grid, int n);

/// N i.i.d. inverse-CDF draws.
[[nodiscard]] std::vector<double> sample_angles(const AngleDistribution& dist, int n, std::uint64_t seed);

/// Key-value text: model, grid size, component count and per-component
/// parameters in shortest round-trip decimal form.
[[nodiscard]] std::string serialize(const AngleDistribution& dist);
[[nodiscard]] AngleDistribution parse_distribution(const std::string& text);
void save_distribution(const std::filesystem::path& path, const AngleDistribution& dist);
[[nodiscard]] AngleDistribution load_distribution(const std::filesystem::path& path);

/// Sums adjacent bin pairs (a 2L-bin PMF becomes an L-bin one).
[[nodiscard]] PmfParams aggregate_pairs(const PmfParams& pmf);

} // namespace uvt
