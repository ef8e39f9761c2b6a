#pragma once

// Joint estimation of the view-angle distribution and the image by
// minimizing a cross-validation error. Projections are ordered once with a
// Laplacian eigenmap; each iteration assigns every sorted projection the
// expected value of its order statistic under the current distribution,
// draws a fresh 80/20 reconstruction/validation split, reconstructs with FBP
// from the reconstruction part and scores the validation part. Mixture
// weights and PMF bins move by exponentiated gradient; von Mises means and
// concentrations by projected gradient steps. Gradients are central finite
// differences on a split held fixed within the iteration.
//
// Cost per iteration is one FBP + CVE evaluation per finite-difference probe
// (2 per free parameter, plus one): O(d) back projection and O(|D_v| d)
// reprojection for d pixels, with order-statistic means for all N ranks from
// one shared tabulation.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "uvt/directional_dist.hpp"
#include "uvt/ordering.hpp"
#include "uvt/tomo_core.hpp"

namespace uvt {

enum class DistributionModel { Mvf, Pmf };
/// Uniform: equal weights / bins, evenly spread means. Random: one draw from
/// the Init stream. Search: mode positions are scanned over `init_grid`
/// points on the first iteration's split and the lowest J starts (the
/// uniform start included).
enum class InitMode { Uniform, Random, Search };

struct FiniteDifferenceSteps {
    double mean = 1e-2;
    double concentration = 1e-1;
    double weight = 1e-3; ///< MVF weights and PMF bins
};

struct ConcentrationBounds {
    double min = 0.0;
    double max = 50.0;
};

struct FitConfig {
    DistributionModel model = DistributionModel::Mvf;
    int components = 2;
    double step_size = 0.05;
    /// Step halvings allowed per iteration until J on that iteration's split
    /// decreases; an accepted step doubles the next one. 0 takes every step as is.
    int max_backtracks = 8;
    int max_iters = 200;
    /// Stop when the moving average of J changes by less than this (relative)
    /// across one smoothing window.
    double convergence_tol = 1e-4;
    int smoothing_window = 10;
    FiniteDifferenceSteps fd_steps;
    ConcentrationBounds kappa_bounds;
    std::uint64_t seed = 0;
    double reconstruction_fraction = 0.8;
    InitMode init = InitMode::Uniform;
    double init_concentration = 0.5;
    int init_grid = 24;
    RampFilter filter = RampFilter::RamLak;
    AngleWeighting weighting = AngleWeighting::Gap;
    int grid_size = AngleDistribution::default_grid_size;
    OrderingConfig ordering;
    /// Descend on J / sum_{D_v} ||y|| instead of J; only rescales the step.
    bool relative_objective = true;
    /// Starting point; overrides `init` when set. Must match `model` and `components`.
    std::optional<AngleDistribution> warm_start;

    void validate() const;
};

struct DataSplit {
    std::vector<Index> reconstruction; ///< projection indices, ascending
    std::vector<Index> validation;     ///< projection indices, ascending
};

/// Uniformly random partition with round(fraction * N) reconstruction entries.
[[nodiscard]] DataSplit split_data(Index n, double fraction, std::mt19937_64& rng);

/// Angle for every input projection: the projection of rank k (1-based) in
/// `order.permutation` gets E[theta_(k)] under `dist`.
[[nodiscard]] std::vector<double> assign_angles(const OrderingResult& order, const AngleDistribution& dist);

/// Sum over the validation projections of ||y - R(image, theta)||_2.
[[nodiscard]] double cross_validation_error(const ImageGrid& image, const Sinogram& validation);

/// Flat parameter layout. MVF: w_0..w_{L-1}, mu_0..mu_{L-1}, kappa_0..kappa_{L-1};
/// PMF: p_0..p_{L-1}.
[[nodiscard]] Eigen::VectorXd flatten(const AngleDistribution& dist);

/// Inverse of `flatten` for a distribution shaped like `like`. Simplex
/// coordinates are renormalized, means wrapped; concentrations must be >= 0.
[[nodiscard]] AngleDistribution unflatten(const AngleDistribution& like, const Eigen::VectorXd& params);

/// Central differences, one-sided where a probe would leave [lower, upper].
/// Coordinates with step <= 0 are held fixed (zero gradient).
[[nodiscard]] Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& objective,
                                               const Eigen::VectorXd& x, const Eigen::VectorXd& steps,
                                               const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

/// w'_k = w_k exp(-alpha g_k) / sum_l w_l exp(-alpha g_l).
[[nodiscard]] Eigen::VectorXd mirror_step(const Eigen::VectorXd& weights, const Eigen::VectorXd& gradient, double alpha);

/// Wraps means into [0, 2pi), clamps concentrations, renormalizes simplex parts.
[[nodiscard]] AngleDistribution project_params(AngleDistribution::Model updated, const ConcentrationBounds& bounds,
                                               int grid_size = AngleDistribution::default_grid_size);

[[nodiscard]] AngleDistribution initial_distribution(const FitConfig& cfg);

struct FitIteration {
    int iteration = 0;
    double cve = 0.0;          ///< J on this iteration's split, at `parameters`
    double smoothed_cve = 0.0; ///< moving average over the smoothing window
    Eigen::VectorXd parameters;
    std::uint64_t split_seed = 0;
};

struct FitTrace {
    std::vector<FitIteration> iterations;
    std::vector<double> assigned_angles; ///< final, per input projection
    ImageGrid image;                     ///< final reconstruction from all projections
    bool converged = false;
    std::optional<std::string> abort_reason;
};

struct FitResult {
    ImageGrid image;
    AngleDistribution distribution;
    AngleDistribution initial;
    FitTrace trace;
    OrderingResult ordering;
};

/// Runs the alternating estimator on unlabeled projections (any angles on the
/// input are ignored). N >= 20.
[[nodiscard]] FitResult fit(const Sinogram& projections, const FitConfig& cfg);
[[nodiscard]] FitResult fit(const Sinogram& projections, const OrderingResult& ordering, const FitConfig& cfg);

/// Laplacian-eigenmap order + uniform order-statistic angles + FBP.
[[nodiscard]] ImageGrid baseline_gltu(const Sinogram& projections, const FitConfig& cfg);
[[nodiscard]] ImageGrid baseline_gltu(const Sinogram& projections, const OrderingResult& ordering, const FitConfig& cfg);

/// FBP with the ground-truth angles carried by the sinogram.
[[nodiscard]] ImageGrid baseline_orp(const Sinogram& projections, RampFilter filter = RampFilter::RamLak,
                                     AngleWeighting weighting = AngleWeighting::Gap);

/// `iter,J,param_0,...,param_{P-1}`.
void write_trace_csv(const std::string& path, const FitTrace& trace);
struct TraceRow {
    int iteration;
    double cve;
    std::vector<double> parameters;
};
[[nodiscard]] std::vector<TraceRow> read_trace_csv(const std::string& path);

/// Trailing moving averages of `values` over `window` entries.
[[nodiscard]] std::vector<double> moving_average(std::span<const double> values, int window);

} // namespace uvt
