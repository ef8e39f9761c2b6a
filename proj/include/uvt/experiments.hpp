#pragma once

// Experiment orchestration behind the command-line tool: dataset simulation,
// the fit, the two baselines, metric tables and plot data. Every command
// reads and writes plain files under one directory so runs can be resumed
// and compared; all randomness derives from the master seed.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uvt/cve_estimator.hpp"
#include "uvt/directional_dist.hpp"
#include "uvt/keyvalue.hpp"
#include "uvt/metrics.hpp"
#include "uvt/tomo_core.hpp"

namespace uvt {

namespace files {
inline constexpr const char* phantom_pgm = "phantom.pgm";
inline constexpr const char* phantom_raw = "phantom.csv";
inline constexpr const char* clean_sinogram = "clean_sinogram.csv";
inline constexpr const char* noisy_sinogram = "noisy_sinogram.csv";
inline constexpr const char* true_angles = "true_angles.csv";
inline constexpr const char* true_distribution = "true_distribution.txt";
inline constexpr const char* simulate_manifest = "manifest.txt";
inline constexpr const char* reconstruction_pgm = "reconstruction.pgm";
inline constexpr const char* reconstruction_raw = "reconstruction.csv";
inline constexpr const char* estimated_distribution = "estimated_distribution.txt";
inline constexpr const char* initial_distribution = "initial_distribution.txt";
inline constexpr const char* fit_trace = "fit_trace.csv";
inline constexpr const char* assigned_angles = "assigned_angles.csv";
inline constexpr const char* ordering = "ordering.csv";
inline constexpr const char* fit_manifest = "fit_manifest.txt";
inline constexpr const char* gltu_pgm = "gltu.pgm";
inline constexpr const char* gltu_raw = "gltu.csv";
inline constexpr const char* orp_pgm = "orp.pgm";
inline constexpr const char* orp_raw = "orp.csv";
inline constexpr const char* metrics = "metrics.csv";
inline constexpr const char* convergence = "convergence.csv";
inline constexpr const char* distribution_overlay = "distribution_overlay.csv";
inline constexpr const char* pmf_overlay = "pmf_overlay.csv";
inline constexpr const char* angle_error_histogram = "angle_error_histogram.csv";
} // namespace files

enum class TrueModel { Uniform, Mvf, Pmf };
enum class ImageAlignment { None, Correlation, Angles };
enum class BaselineKind { Gltu, Orp };

struct ExperimentConfig {
    /// disk, shepp_logan, shepp_logan_asym, ellipses, or a path to a square PGM.
    std::string image = "ellipses";
    Index image_size = 512; ///< built-in phantoms only
    Index projections = 5000;
    TrueModel true_model = TrueModel::Mvf;
    int true_components = 5; ///< mixture components or PMF bins
    /// Explicit generating distribution; drawn from the master seed when empty.
    std::optional<AngleDistribution> true_distribution;
    double noise_relative_sigma = 0.15;
    bool denoise = true;
    std::optional<int> denoise_components; ///< Marchenko-Pastur rule when empty
    FitConfig fit;
    ImageAlignment alignment = ImageAlignment::Correlation;
    double alignment_step_degrees = 0.5;
    int histogram_bins = 36; ///< over [0, 180] degrees
    int overlay_points = 720;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = ".";

    void validate() const;
};

/// Unknown keys are rejected so typos do not silently fall back to defaults.
[[nodiscard]] ExperimentConfig parse_experiment_config(const KeyValues& kv);

/// Every effective setting, including derived seeds, in key-value form.
[[nodiscard]] KeyValues describe(const ExperimentConfig& cfg);

struct Dataset {
    ImageGrid phantom;
    AngleDistribution distribution;
    std::vector<double> angles;
    Sinogram clean;
    Sinogram noisy;
    double noise_sigma = 0.0;
    double mean_abs_clean = 0.0;
};

[[nodiscard]] ImageGrid load_ground_truth(const ExperimentConfig& cfg);
[[nodiscard]] AngleDistribution generating_distribution(const ExperimentConfig& cfg);
[[nodiscard]] Dataset simulate(const ExperimentConfig& cfg);

/// PCA denoising when enabled; angles are carried through.
[[nodiscard]] Sinogram prepare_projections(const Sinogram& noisy, const ExperimentConfig& cfg);

/// The fit configuration with its seed derived from the master seed.
[[nodiscard]] FitConfig effective_fit_config(const ExperimentConfig& cfg);

/// How an image made at estimated angles is moved into the ground-truth
/// frame before comparison. `estimated`/`truth` angles are used by the
/// angle mode and ignored otherwise.
[[nodiscard]] std::optional<AngleAlignment> image_alignment(const ExperimentConfig& cfg, const ImageGrid& est,
                                                            const ImageGrid& gt,
                                                            const std::vector<double>* estimated_angles,
                                                            const std::vector<double>* true_angles,
                                                            std::span<const Index> sorted_order = {});

/// A reconstruction made at `estimated_angles`, re-expressed in the
/// ground-truth frame by reconstructing the same projections at the aligned
/// angles. Equivalent to rotating/mirroring the image, without the blur of
/// resampling it.
[[nodiscard]] ImageGrid reconstruct_in_frame(const Sinogram& projections, std::span<const double> estimated_angles,
                                             const AngleAlignment& alignment, const FitConfig& fit);

struct MetricsRow {
    std::string name;
    std::optional<MetricsReport> report; ///< empty when an input is missing
    std::string missing;
};

void cmd_simulate(const ExperimentConfig& cfg);
void cmd_fit(const ExperimentConfig& cfg);
void cmd_baseline(const ExperimentConfig& cfg, BaselineKind kind);
std::vector<MetricsRow> cmd_evaluate(const ExperimentConfig& cfg);
void cmd_plotdata(const ExperimentConfig& cfg);

/// Angle-error histogram over [0, 180] degrees; counts sum to the number of
/// angles.
[[nodiscard]] std::vector<int> angle_error_histogram(std::span<const double> aligned_est,
                                                     std::span<const double> truth, int bins);

} // namespace uvt
