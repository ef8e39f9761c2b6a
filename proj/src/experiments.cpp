#include "uvt/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "uvt/errors.hpp"
#include "uvt/io.hpp"
#include "uvt/noise_denoise.hpp"
#include "uvt/ordering.hpp"
#include "uvt/seeds.hpp"

namespace uvt {

namespace fs = std::filesystem;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr const char* gltu_angles_file = "gltu_angles.csv";

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "image", "image_size", "projections", "true_model", "true_components", "true_weights", "true_means",
        "true_concentrations", "true_probabilities", "noise_relative_sigma", "denoise", "denoise_components",
        "fit_model", "fit_components", "step_size", "max_backtracks", "max_iters", "convergence_tol",
        "smoothing_window", "fd_step_mean", "fd_step_concentration", "fd_step_weight", "kappa_min", "kappa_max",
        "reconstruction_fraction", "init", "init_concentration", "init_grid", "filter", "weighting", "grid_size",
        "ordering_neighbors", "ordering_scale", "relative_objective", "alignment", "alignment_step_degrees",
        "histogram_bins", "overlay_points", "seed", "out_dir"};
    return keys;
}

template <typename Enum>
Enum pick(const std::string& key, const std::string& value,
          std::initializer_list<std::pair<const char*, Enum>> choices) {
    std::string names;
    for (const auto& [name, e] : choices) {
        if (value == name)
            return e;
        names += names.empty() ? name : std::string("|") + name;
    }
    throw InvalidInput("key '" + key + "': expected " + names + ", got '" + value + "'");
}

template <typename Enum>
std::string name_of(Enum e, std::initializer_list<std::pair<const char*, Enum>> choices) {
    for (const auto& [name, v] : choices)
        if (v == e)
            return name;
    return "?";
}

const std::initializer_list<std::pair<const char*, TrueModel>> true_models = {
    {"uniform", TrueModel::Uniform}, {"mvf", TrueModel::Mvf}, {"pmf", TrueModel::Pmf}};
const std::initializer_list<std::pair<const char*, DistributionModel>> fit_models = {
    {"mvf", DistributionModel::Mvf}, {"pmf", DistributionModel::Pmf}};
const std::initializer_list<std::pair<const char*, InitMode>> init_modes = {{"uniform", InitMode::Uniform},
                                                                           {"random", InitMode::Random},
                                                                           {"search", InitMode::Search}};
const std::initializer_list<std::pair<const char*, RampFilter>> filters = {{"ramlak", RampFilter::RamLak},
                                                                          {"hann", RampFilter::Hann}};
const std::initializer_list<std::pair<const char*, AngleWeighting>> weightings = {
    {"gap", AngleWeighting::Gap}, {"uniform", AngleWeighting::Uniform}};
const std::initializer_list<std::pair<const char*, ImageAlignment>> alignments = {
    {"none", ImageAlignment::None}, {"correlation", ImageAlignment::Correlation}, {"angles", ImageAlignment::Angles}};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text))
        throw IoError("cannot write " + path.string());
}

void require_file(const fs::path& path) {
    if (!fs::exists(path))
        throw IoError("missing input " + path.string());
}

std::optional<AngleDistribution> explicit_distribution(const KeyValues& kv, TrueModel model) {
    if (model == TrueModel::Mvf && kv.contains("true_weights")) {
        const auto w = kv.get_list("true_weights");
        const auto mu = kv.get_list("true_means");
        const auto kappa = kv.get_list("true_concentrations");
        if (w.size() != mu.size() || w.size() != kappa.size())
            throw InvalidInput("true_weights, true_means and true_concentrations differ in length");
        MvfParams mvf;
        for (std::size_t i = 0; i < w.size(); ++i)
            mvf.components.push_back({w[i], mu[i], kappa[i]});
        return AngleDistribution(std::move(mvf));
    }
    if (model == TrueModel::Pmf && kv.contains("true_probabilities"))
        return AngleDistribution(PmfParams{kv.get_list("true_probabilities")});
    for (const char* key : {"true_weights", "true_means", "true_concentrations", "true_probabilities"})
        if (kv.contains(key))
            throw InvalidInput(std::string("key '") + key + "' does not apply to this true_model");
    return std::nullopt;
}

Sinogram load_unlabeled(const ExperimentConfig& cfg) {
    const fs::path path = cfg.out_dir / files::noisy_sinogram;
    require_file(path);
    Sinogram s = io::read_sinogram_csv(path);
    s.clear_angles();
    return s;
}

std::vector<double> load_angles(const fs::path& path) {
    require_file(path);
    return io::read_indexed_csv(path);
}

void write_image(const ExperimentConfig& cfg, const ImageGrid& image, const char* pgm, const char* raw) {
    io::write_pgm(cfg.out_dir / pgm, image);
    io::write_raster_csv(cfg.out_dir / raw, image);
}

std::optional<ImageGrid> try_image(const fs::path& path) {
    if (!fs::exists(path))
        return std::nullopt;
    return io::read_raster_csv(path);
}

std::optional<std::vector<double>> try_angles(const fs::path& path) {
    if (!fs::exists(path))
        return std::nullopt;
    return io::read_indexed_csv(path);
}

std::vector<Index> load_ordering(const fs::path& path) {
    std::vector<Index> order;
    if (!fs::exists(path))
        return order;
    for (double v : io::read_indexed_csv(path))
        order.push_back(static_cast<Index>(std::llround(v)));
    return order;
}

// Bin masses of a distribution in the truth frame, by midpoint sums.
std::vector<double> bin_masses(const AngleDistribution& dist, int bins, const AngleAlignment& alignment) {
    constexpr int sub = 64;
    const double width = two_pi / bins;
    std::vector<double> mass(static_cast<std::size_t>(bins), 0.0);
    for (int b = 0; b < bins; ++b)
        for (int q = 0; q < sub; ++q)
            mass[static_cast<std::size_t>(b)] +=
                aligned_pdf(dist, (b + (q + 0.5) / sub) * width, alignment) * width / sub;
    return mass;
}

} // namespace

void ExperimentConfig::validate() const {
    if (image_size < 16)
        throw InvalidInput("image_size must be >= 16");
    if (projections < 20)
        throw InvalidInput("projections must be >= 20");
    if (true_model != TrueModel::Uniform && true_components < 1)
        throw InvalidInput("true_components must be >= 1");
    if (true_model == TrueModel::Pmf && true_components < 2)
        throw InvalidInput("a PMF needs at least 2 bins");
    if (!(noise_relative_sigma >= 0) || !std::isfinite(noise_relative_sigma))
        throw InvalidInput("noise_relative_sigma must be finite and >= 0");
    if (denoise_components && *denoise_components < 1)
        throw InvalidInput("denoise_components must be >= 1");
    if (!(alignment_step_degrees > 0))
        throw InvalidInput("alignment_step_degrees must be positive");
    if (histogram_bins < 1 || overlay_points < 2)
        throw InvalidInput("histogram_bins must be >= 1 and overlay_points >= 2");
    fit.validate();
}

ExperimentConfig parse_experiment_config(const KeyValues& kv) {
    for (const auto& [key, value] : kv.entries())
        if (!known_keys().count(key))
            throw InvalidInput("unknown config key '" + key + "'");
    ExperimentConfig cfg;
    cfg.image = kv.get_or("image", cfg.image);
    cfg.image_size = kv.get_int_or("image_size", cfg.image_size);
    cfg.projections = kv.get_int_or("projections", cfg.projections);
    cfg.true_model = pick("true_model", kv.get_or("true_model", "mvf"), true_models);
    cfg.true_components = static_cast<int>(
        kv.get_int_or("true_components", cfg.true_model == TrueModel::Pmf ? 50 : cfg.true_components));
    cfg.true_distribution = explicit_distribution(kv, cfg.true_model);
    if (cfg.true_distribution)
        cfg.true_components = static_cast<int>(cfg.true_distribution->is_mvf()
                                                   ? cfg.true_distribution->mvf().components.size()
                                                   : cfg.true_distribution->pmf().probabilities.size());
    cfg.noise_relative_sigma = kv.get_double_or("noise_relative_sigma", cfg.noise_relative_sigma);
    cfg.denoise = kv.get_bool_or("denoise", cfg.denoise);
    if (const auto c = kv.find("denoise_components"); c && *c != "auto")
        cfg.denoise_components = static_cast<int>(kv.get_int("denoise_components"));

    FitConfig& fit = cfg.fit;
    fit.model = pick("fit_model", kv.get_or("fit_model", "mvf"), fit_models);
    fit.components =
        static_cast<int>(kv.get_int_or("fit_components", fit.model == DistributionModel::Pmf ? 25 : 5));
    fit.step_size = kv.get_double_or("step_size", fit.step_size);
    fit.max_backtracks = static_cast<int>(kv.get_int_or("max_backtracks", fit.max_backtracks));
    fit.max_iters = static_cast<int>(kv.get_int_or("max_iters", fit.max_iters));
    fit.convergence_tol = kv.get_double_or("convergence_tol", fit.convergence_tol);
    fit.smoothing_window = static_cast<int>(kv.get_int_or("smoothing_window", fit.smoothing_window));
    fit.fd_steps.mean = kv.get_double_or("fd_step_mean", fit.fd_steps.mean);
    fit.fd_steps.concentration = kv.get_double_or("fd_step_concentration", fit.fd_steps.concentration);
    fit.fd_steps.weight = kv.get_double_or("fd_step_weight", fit.fd_steps.weight);
    fit.kappa_bounds.min = kv.get_double_or("kappa_min", fit.kappa_bounds.min);
    fit.kappa_bounds.max = kv.get_double_or("kappa_max", fit.kappa_bounds.max);
    fit.reconstruction_fraction = kv.get_double_or("reconstruction_fraction", fit.reconstruction_fraction);
    fit.init = pick("init", kv.get_or("init", "uniform"), init_modes);
    fit.init_concentration = kv.get_double_or("init_concentration", fit.init_concentration);
    fit.init_grid = static_cast<int>(kv.get_int_or("init_grid", fit.init_grid));
    fit.filter = pick("filter", kv.get_or("filter", "ramlak"), filters);
    fit.weighting = pick("weighting", kv.get_or("weighting", "gap"), weightings);
    fit.grid_size = static_cast<int>(kv.get_int_or("grid_size", fit.grid_size));
    fit.ordering.neighbors = static_cast<int>(kv.get_int_or("ordering_neighbors", fit.ordering.neighbors));
    if (const auto s = kv.find("ordering_scale"); s && *s != "auto")
        fit.ordering.scale = kv.get_double("ordering_scale");
    fit.relative_objective = kv.get_bool_or("relative_objective", fit.relative_objective);

    cfg.alignment = pick("alignment", kv.get_or("alignment", "correlation"), alignments);
    cfg.alignment_step_degrees = kv.get_double_or("alignment_step_degrees", cfg.alignment_step_degrees);
    cfg.histogram_bins = static_cast<int>(kv.get_int_or("histogram_bins", cfg.histogram_bins));
    cfg.overlay_points = static_cast<int>(kv.get_int_or("overlay_points", cfg.overlay_points));
    cfg.seed = kv.get_u64_or("seed", cfg.seed);
    cfg.out_dir = kv.get_or("out_dir", cfg.out_dir.string());
    cfg.validate();
    return cfg;
}

FitConfig effective_fit_config(const ExperimentConfig& cfg) {
    FitConfig fit = cfg.fit;
    fit.seed = derive_seed(cfg.seed, SeedStream::Fit);
    return fit;
}

KeyValues describe(const ExperimentConfig& cfg) {
    const FitConfig fit = effective_fit_config(cfg);
    KeyValues kv;
    kv.set("format_version", "1");
    kv.set("image", cfg.image);
    kv.set("image_size", std::to_string(cfg.image_size));
    kv.set("projections", std::to_string(cfg.projections));
    kv.set("true_model", name_of(cfg.true_model, true_models));
    kv.set("true_components", std::to_string(cfg.true_components));
    kv.set("noise_relative_sigma", io::format_double(cfg.noise_relative_sigma));
    kv.set("denoise", cfg.denoise ? "true" : "false");
    kv.set("denoise_components", cfg.denoise_components ? std::to_string(*cfg.denoise_components) : "auto");
    kv.set("fit_model", name_of(fit.model, fit_models));
    kv.set("fit_components", std::to_string(fit.components));
    kv.set("step_size", io::format_double(fit.step_size));
    kv.set("max_backtracks", std::to_string(fit.max_backtracks));
    kv.set("max_iters", std::to_string(fit.max_iters));
    kv.set("convergence_tol", io::format_double(fit.convergence_tol));
    kv.set("smoothing_window", std::to_string(fit.smoothing_window));
    kv.set("fd_step_mean", io::format_double(fit.fd_steps.mean));
    kv.set("fd_step_concentration", io::format_double(fit.fd_steps.concentration));
    kv.set("fd_step_weight", io::format_double(fit.fd_steps.weight));
    kv.set("kappa_min", io::format_double(fit.kappa_bounds.min));
    kv.set("kappa_max", io::format_double(fit.kappa_bounds.max));
    kv.set("reconstruction_fraction", io::format_double(fit.reconstruction_fraction));
    kv.set("init", name_of(fit.init, init_modes));
    kv.set("init_concentration", io::format_double(fit.init_concentration));
    kv.set("init_grid", std::to_string(fit.init_grid));
    kv.set("filter", name_of(fit.filter, filters));
    kv.set("weighting", name_of(fit.weighting, weightings));
    kv.set("grid_size", std::to_string(fit.grid_size));
    kv.set("ordering_neighbors", std::to_string(fit.ordering.neighbors));
    kv.set("ordering_scale", fit.ordering.scale ? io::format_double(*fit.ordering.scale) : "auto");
    kv.set("relative_objective", fit.relative_objective ? "true" : "false");
    kv.set("alignment", name_of(cfg.alignment, alignments));
    kv.set("alignment_step_degrees", io::format_double(cfg.alignment_step_degrees));
    kv.set("histogram_bins", std::to_string(cfg.histogram_bins));
    kv.set("overlay_points", std::to_string(cfg.overlay_points));
    kv.set("seed", std::to_string(cfg.seed));
    kv.set("seed.angles", std::to_string(derive_seed(cfg.seed, SeedStream::Angles)));
    kv.set("seed.noise", std::to_string(derive_seed(cfg.seed, SeedStream::Noise)));
    kv.set("seed.distribution", std::to_string(derive_seed(cfg.seed, SeedStream::Distribution)));
    kv.set("seed.fit", std::to_string(fit.seed));
    kv.set("seed.init", std::to_string(derive_seed(fit.seed, SeedStream::Init)));
    kv.set("seed.split_0", std::to_string(derive_seed(fit.seed, SeedStream::Split, 0)));
    // fixed defaults of the numeric modules
    kv.set("defaults.order_stat_grid", std::to_string(AngleDistribution::default_grid_size));
    kv.set("defaults.ssim", "window=7 sigma=1.5 c1=1e-4 c2=9e-4");
    kv.set("defaults.bessel", "series below 20, asymptotic above");
    kv.set("defaults.detectors", "image size, inscribed circle");
    return kv;
}

ImageGrid load_ground_truth(const ExperimentConfig& cfg) {
    if (cfg.image == "disk")
        return make_phantom(PhantomKind::Disk, cfg.image_size);
    if (cfg.image == "shepp_logan")
        return make_phantom(PhantomKind::SheppLogan, cfg.image_size);
    if (cfg.image == "shepp_logan_asym")
        return make_phantom(PhantomKind::SheppLoganAsymmetric, cfg.image_size);
    if (cfg.image == "ellipses")
        return make_phantom(PhantomKind::Ellipses, cfg.image_size);
    require_file(cfg.image);
    return io::read_pgm(cfg.image);
}

AngleDistribution generating_distribution(const ExperimentConfig& cfg) {
    if (cfg.true_distribution)
        return *cfg.true_distribution;
    if (cfg.true_model == TrueModel::Uniform)
        return AngleDistribution::uniform();
    std::mt19937_64 rng(derive_seed(cfg.seed, SeedStream::Distribution));
    std::exponential_distribution<double> gamma1(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto l = static_cast<std::size_t>(cfg.true_components);
    std::vector<double> w(l);
    for (auto& x : w)
        x = gamma1(rng) + 0.05;
    double total = 0;
    for (double x : w)
        total += x;
    for (auto& x : w)
        x /= total;
    if (cfg.true_model == TrueModel::Pmf)
        return AngleDistribution(PmfParams{w});
    MvfParams mvf;
    for (std::size_t i = 0; i < l; ++i)
        mvf.components.push_back({w[i], two_pi * unit(rng), 1.0 + 9.0 * unit(rng)});
    return AngleDistribution(std::move(mvf));
}

Dataset simulate(const ExperimentConfig& cfg) {
    cfg.validate();
    Dataset d{load_ground_truth(cfg), generating_distribution(cfg), {}, {}, {}, 0.0, 0.0};
    d.angles = sample_angles(d.distribution, static_cast<int>(cfg.projections), derive_seed(cfg.seed, SeedStream::Angles));
    d.clean = radon_forward(d.phantom, d.angles);
    d.mean_abs_clean = d.clean.samples.cwiseAbs().mean();
    d.noise_sigma = noise_sigma(d.clean, cfg.noise_relative_sigma);
    d.noisy = add_noise(d.clean, {cfg.noise_relative_sigma, derive_seed(cfg.seed, SeedStream::Noise)});
    return d;
}

Sinogram prepare_projections(const Sinogram& noisy, const ExperimentConfig& cfg) {
    if (!cfg.denoise)
        return noisy;
    std::optional<int> c = cfg.denoise_components;
    if (c && *c >= noisy.count())
        throw InvalidInput("denoise_components must be smaller than the projection count");
    return pca_denoise(noisy, c);
}

std::optional<AngleAlignment> image_alignment(const ExperimentConfig& cfg, const ImageGrid& est, const ImageGrid& gt,
                                              const std::vector<double>* estimated_angles,
                                              const std::vector<double>* true_angles,
                                              std::span<const Index> sorted_order) {
    switch (cfg.alignment) {
    case ImageAlignment::None:
        return std::nullopt;
    case ImageAlignment::Correlation:
        return align_by_correlation(est, gt, cfg.alignment_step_degrees);
    case ImageAlignment::Angles:
        if (!estimated_angles || !true_angles)
            throw InvalidInput("angle alignment needs estimated and true angles");
        return mad_angles(*estimated_angles, *true_angles, sorted_order).alignment;
    }
    return std::nullopt;
}

ImageGrid reconstruct_in_frame(const Sinogram& projections, std::span<const double> estimated_angles,
                               const AngleAlignment& alignment, const FitConfig& fit) {
    if (static_cast<Index>(estimated_angles.size()) != projections.count())
        throw InvalidInput("reconstruct_in_frame: angle count does not match the projections");
    Sinogram labelled = projections;
    const auto aligned = align_angles(estimated_angles, alignment);
    for (std::size_t i = 0; i < aligned.size(); ++i)
        labelled.angles[i] = aligned[i];
    return fbp_reconstruct(labelled, fit.filter, 0, fit.weighting);
}

void cmd_simulate(const ExperimentConfig& cfg) {
    const Dataset d = simulate(cfg);
    fs::create_directories(cfg.out_dir);
    write_image(cfg, d.phantom, files::phantom_pgm, files::phantom_raw);
    Sinogram clean = d.clean, noisy = d.noisy;
    clean.clear_angles();
    noisy.clear_angles();
    io::write_sinogram_csv(cfg.out_dir / files::clean_sinogram, clean);
    io::write_sinogram_csv(cfg.out_dir / files::noisy_sinogram, noisy);
    io::write_indexed_csv(cfg.out_dir / files::true_angles, "angle", d.angles);
    save_distribution(cfg.out_dir / files::true_distribution, d.distribution);
    KeyValues manifest = describe(cfg);
    manifest.set("measured.mean_abs_clean", io::format_double(d.mean_abs_clean));
    manifest.set("measured.noise_sigma", io::format_double(d.noise_sigma));
    manifest.set("measured.detectors", std::to_string(d.clean.detector_count()));
    manifest.save(cfg.out_dir / files::simulate_manifest);
}

void cmd_fit(const ExperimentConfig& cfg) {
    const Sinogram raw = load_unlabeled(cfg);
    const Sinogram projections = prepare_projections(raw, cfg);
    const FitConfig fit_cfg = effective_fit_config(cfg);
    const FitResult result = fit(projections, fit_cfg);
    fs::create_directories(cfg.out_dir);
    write_image(cfg, result.image, files::reconstruction_pgm, files::reconstruction_raw);
    save_distribution(cfg.out_dir / files::estimated_distribution, result.distribution);
    save_distribution(cfg.out_dir / files::initial_distribution, result.initial);
    write_trace_csv((cfg.out_dir / files::fit_trace).string(), result.trace);
    io::write_indexed_csv(cfg.out_dir / files::assigned_angles, "assigned_angle", result.trace.assigned_angles);
    std::vector<double> order(result.ordering.permutation.begin(), result.ordering.permutation.end());
    io::write_indexed_csv(cfg.out_dir / files::ordering, "projection", order);
    KeyValues manifest = describe(cfg);
    manifest.set("result.iterations", std::to_string(result.trace.iterations.size()));
    manifest.set("result.converged", result.trace.converged ? "true" : "false");
    manifest.set("result.abort_reason", result.trace.abort_reason.value_or("none"));
    manifest.set("result.denoise_components",
                 cfg.denoise ? std::to_string(cfg.denoise_components.value_or(
                                   auto_component_count(pca_basis(raw), raw.count())))
                             : "off");
    manifest.save(cfg.out_dir / files::fit_manifest);
    if (result.trace.abort_reason)
        throw NumericalError("fit aborted: " + *result.trace.abort_reason + " (partial outputs written)");
}

void cmd_baseline(const ExperimentConfig& cfg, BaselineKind kind) {
    Sinogram projections = prepare_projections(load_unlabeled(cfg), cfg);
    const FitConfig fit_cfg = effective_fit_config(cfg);
    fs::create_directories(cfg.out_dir);
    if (kind == BaselineKind::Gltu) {
        const OrderingResult order = laplacian_eigenmap_order(projections, fit_cfg.ordering);
        write_image(cfg, baseline_gltu(projections, order, fit_cfg), files::gltu_pgm, files::gltu_raw);
        io::write_indexed_csv(cfg.out_dir / gltu_angles_file, "assigned_angle",
                              assign_angles(order, AngleDistribution::uniform(fit_cfg.grid_size)));
        return;
    }
    const auto angles = load_angles(cfg.out_dir / files::true_angles);
    if (static_cast<Index>(angles.size()) != projections.count())
        throw InvalidInput("true angle count does not match the sinogram");
    for (std::size_t i = 0; i < angles.size(); ++i)
        projections.angles[i] = angles[i];
    write_image(cfg, baseline_orp(projections, fit_cfg.filter, fit_cfg.weighting), files::orp_pgm, files::orp_raw);
}

std::vector<MetricsRow> cmd_evaluate(const ExperimentConfig& cfg) {
    const auto gt = try_image(cfg.out_dir / files::phantom_raw);
    const auto ours = try_image(cfg.out_dir / files::reconstruction_raw);
    const auto gltu = try_image(cfg.out_dir / files::gltu_raw);
    const auto orp = try_image(cfg.out_dir / files::orp_raw);
    const auto truth_angles = try_angles(cfg.out_dir / files::true_angles);
    const auto our_angles = try_angles(cfg.out_dir / files::assigned_angles);
    const auto gltu_angles = try_angles(cfg.out_dir / gltu_angles_file);
    const auto order = load_ordering(cfg.out_dir / files::ordering);

    struct Estimate {
        const char* name;
        const std::optional<ImageGrid>& image;
        const char* file;
        const std::optional<std::vector<double>>& angles;
    };
    const Estimate estimates[] = {{"Our", ours, files::reconstruction_raw, our_angles},
                                  {"GLTU", gltu, files::gltu_raw, gltu_angles}};

    // the same projections the estimates were made from, for exact re-expression in the truth frame
    std::optional<Sinogram> prepared;
    if (fs::exists(cfg.out_dir / files::noisy_sinogram))
        prepared = prepare_projections(load_unlabeled(cfg), cfg);

    std::vector<MetricsRow> rows;
    auto add_missing = [&](const std::string& name, const std::string& what) { rows.push_back({name, {}, what}); };
    for (const auto& e : estimates) {
        std::optional<ImageGrid> in_frame;
        std::optional<AngleAlignment> alignment;
        std::optional<double> mad;
        if (e.image && gt) {
            const bool have_angles = e.angles && truth_angles && e.angles->size() == truth_angles->size();
            alignment = image_alignment(cfg, *e.image, *gt, have_angles ? &*e.angles : nullptr,
                                        have_angles ? &*truth_angles : nullptr, order);
            if (have_angles)
                mad = mad_angles(*e.angles, *truth_angles, order).mad_degrees;
            if (!alignment)
                in_frame = *e.image;
            else if (prepared && e.angles && static_cast<Index>(e.angles->size()) == prepared->count())
                in_frame = reconstruct_in_frame(*prepared, *e.angles, *alignment, cfg.fit);
            else
                in_frame = align_image(*e.image, *alignment);
        }
        const std::string vs_gt = std::string(e.name) + "-vs-GT";
        if (!in_frame) {
            add_missing(vs_gt, !e.image ? e.file : files::phantom_raw);
        } else {
            MetricsReport r = compare_images(*in_frame, *gt);
            r.mad_degrees = mad;
            if (alignment)
                r.alignment = *alignment;
            rows.push_back({vs_gt, r, ""});
        }
        const std::string vs_orp = std::string(e.name) + "-vs-ORP";
        if (!in_frame || !orp)
            add_missing(vs_orp, !e.image ? e.file : !orp ? files::orp_raw : files::phantom_raw);
        else
            rows.push_back({vs_orp, compare_images(*in_frame, *orp), ""});
    }
    // Table order: Our-vs-GT, Our-vs-ORP, GLTU-vs-GT, GLTU-vs-ORP, ORP-vs-GT
    if (!orp || !gt)
        add_missing("ORP-vs-GT", !orp ? files::orp_raw : files::phantom_raw);
    else
        rows.push_back({"ORP-vs-GT", compare_images(*orp, *gt), ""});

    fs::create_directories(cfg.out_dir);
    std::string csv = "comparison,rrmse,cc,ssim,table,mad_degrees,status\n";
    for (const auto& row : rows) {
        if (!row.report) {
            csv += row.name + ",,,,,,missing " + row.missing + "\n";
            continue;
        }
        const auto& r = *row.report;
        csv += row.name + "," + io::format_double(r.rrmse) + "," + io::format_double(r.cc) + "," +
               io::format_double(r.ssim) + "," + r.triplet() + "," +
               (r.mad_degrees ? io::format_double(*r.mad_degrees) : "") + ",ok\n";
    }
    write_text(cfg.out_dir / files::metrics, csv);
    return rows;
}

std::vector<int> angle_error_histogram(std::span<const double> aligned_est, std::span<const double> truth, int bins) {
    if (aligned_est.size() != truth.size())
        throw InvalidInput("angle_error_histogram: size mismatch");
    if (bins < 1)
        throw InvalidInput("angle_error_histogram: bins must be >= 1");
    std::vector<int> counts(static_cast<std::size_t>(bins), 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double deg = std::abs(wrap_signed(aligned_est[i] - truth[i])) * 180.0 / std::numbers::pi;
        const auto b = std::min(bins - 1, static_cast<int>(deg / 180.0 * bins));
        ++counts[static_cast<std::size_t>(b)];
    }
    return counts;
}

void cmd_plotdata(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const fs::path trace_path = cfg.out_dir / files::fit_trace;
    require_file(trace_path);
    const auto trace = read_trace_csv(trace_path.string());
    std::vector<double> j;
    for (const auto& row : trace)
        j.push_back(row.cve);
    const auto smoothed = moving_average(j, cfg.fit.smoothing_window);
    std::string csv = "iter,J,J_smoothed\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        csv += std::to_string(trace[i].iteration) + "," + io::format_double(j[i]) + "," +
               io::format_double(smoothed[i]) + "\n";
    write_text(cfg.out_dir / files::convergence, csv);

    require_file(cfg.out_dir / files::true_distribution);
    require_file(cfg.out_dir / files::estimated_distribution);
    const auto truth = load_distribution(cfg.out_dir / files::true_distribution);
    const auto est = load_distribution(cfg.out_dir / files::estimated_distribution);
    const auto true_angles = try_angles(cfg.out_dir / files::true_angles);
    const auto our_angles = try_angles(cfg.out_dir / files::assigned_angles);
    AngleAlignment alignment;
    const bool have_angles = true_angles && our_angles && true_angles->size() == our_angles->size();
    if (have_angles)
        alignment = mad_angles(*our_angles, *true_angles, load_ordering(cfg.out_dir / files::ordering)).alignment;

    csv = "theta,true_pdf,estimated_pdf\n";
    for (int i = 0; i < cfg.overlay_points; ++i) {
        const double theta = two_pi * (i + 0.5) / cfg.overlay_points;
        csv += io::format_double(theta) + "," + io::format_double(pdf(truth, theta)) + "," +
               io::format_double(aligned_pdf(est, theta, alignment)) + "\n";
    }
    write_text(cfg.out_dir / files::distribution_overlay, csv);

    if (!truth.is_mvf() || !est.is_mvf()) {
        // bins of the estimated PMF when there is one; 2L-bin truths are paired down to L
        const int bins = !est.is_mvf() ? static_cast<int>(est.pmf().probabilities.size())
                                       : static_cast<int>(truth.pmf().probabilities.size());
        std::vector<double> true_mass;
        if (!truth.is_mvf() && static_cast<int>(truth.pmf().probabilities.size()) == 2 * bins)
            true_mass = aggregate_pairs(truth.pmf()).probabilities;
        else if (!truth.is_mvf() && static_cast<int>(truth.pmf().probabilities.size()) == bins)
            true_mass = truth.pmf().probabilities;
        else
            true_mass = bin_masses(truth, bins, {});
        const auto est_mass = bin_masses(est, bins, alignment);
        csv = "bin,lower,upper,true_mass,estimated_mass\n";
        for (int b = 0; b < bins; ++b)
            csv += std::to_string(b) + "," + io::format_double(two_pi * b / bins) + "," +
                   io::format_double(two_pi * (b + 1) / bins) + "," +
                   io::format_double(true_mass[static_cast<std::size_t>(b)]) + "," +
                   io::format_double(est_mass[static_cast<std::size_t>(b)]) + "\n";
        write_text(cfg.out_dir / files::pmf_overlay, csv);
    }

    if (have_angles) {
        const auto counts =
            angle_error_histogram(align_angles(*our_angles, alignment), *true_angles, cfg.histogram_bins);
        csv = "lower_degrees,upper_degrees,count\n";
        for (int b = 0; b < cfg.histogram_bins; ++b)
            csv += io::format_double(180.0 * b / cfg.histogram_bins) + "," +
                   io::format_double(180.0 * (b + 1) / cfg.histogram_bins) + "," +
                   std::to_string(counts[static_cast<std::size_t>(b)]) + "\n";
        write_text(cfg.out_dir / files::angle_error_histogram, csv);
    }
}

} // namespace uvt
