#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <doctest.h>

#include "uvt/errors.hpp"
#include "uvt/experiments.hpp"
#include "uvt/io.hpp"

using namespace uvt;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig tiny(const std::string& dir, const std::string& extra = "") {
    auto entries = KeyValues::parse("image = ellipses\nimage_size = 32\nprojections = 80\n"
                                    "true_model = mvf\ntrue_weights = 0.6, 0.4\ntrue_means = 1.0, 4.0\n"
                                    "true_concentrations = 2, 4\nfit_components = 2\nmax_iters = 3\n"
                                    "alignment_step_degrees = 5\nseed = 4\n")
                       .entries();
    const auto overrides = KeyValues::parse(extra);
    for (const auto& [key, value] : overrides.entries())
        entries[key] = value;
    if (entries["true_model"] != "mvf")
        for (const char* key : {"true_weights", "true_means", "true_concentrations"})
            entries.erase(key);
    KeyValues kv;
    for (const auto& [key, value] : entries)
        kv.set(key, value);
    kv.set("out_dir", (fs::temp_directory_path() / dir).string());
    return parse_experiment_config(kv);
}

void run_all(const ExperimentConfig& cfg) {
    fs::remove_all(cfg.out_dir);
    cmd_simulate(cfg);
    cmd_fit(cfg);
    cmd_baseline(cfg, BaselineKind::Gltu);
    cmd_baseline(cfg, BaselineKind::Orp);
    (void)cmd_evaluate(cfg);
    cmd_plotdata(cfg);
}

} // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse_experiment_config(KeyValues{});
    CHECK(cfg.image_size == 512);
    CHECK(cfg.projections == 5000);
    CHECK(cfg.fit.components == 5);
    CHECK(parse_experiment_config(KeyValues::parse("fit_model = pmf\n")).fit.components == 25);
    CHECK(parse_experiment_config(KeyValues::parse("true_model = pmf\n")).true_components == 50);
    CHECK_THROWS_AS((void)parse_experiment_config(KeyValues::parse("stepsize = 1\n")), InvalidInput);
    CHECK_THROWS_AS((void)parse_experiment_config(KeyValues::parse("filter = shepp\n")), InvalidInput);
    CHECK_THROWS_AS((void)parse_experiment_config(KeyValues::parse("projections = 5\n")), InvalidInput);
    const auto explicit_pmf = parse_experiment_config(KeyValues::parse("true_model = pmf\ntrue_probabilities = 0.25, 0.75\n"));
    CHECK(explicit_pmf.true_components == 2);
    // the settings part of the description parses back to the same settings
    KeyValues settings;
    const auto described = describe(cfg);
    for (const auto& [key, value] : described.entries())
        if (key.find('.') == std::string::npos && key != "format_version")
            settings.set(key, value);
    const auto again = parse_experiment_config(settings);
    CHECK(describe(again).to_string() == describe(cfg).to_string());
}

TEST_CASE("noise-free disk data gives identical projections") {
    const auto cfg = tiny("uvt_exp_disk", "image = disk\nimage_size = 256\nprojections = 100\ntrue_model = uniform\nnoise_relative_sigma = 0\n");
    fs::remove_all(cfg.out_dir);
    cmd_simulate(cfg);
    const auto sino = io::read_sinogram_csv(cfg.out_dir / files::noisy_sinogram);
    CHECK(sino.count() == 100);
    for (Index i = 1; i < sino.count(); ++i)
        CHECK((sino.samples.row(i) - sino.samples.row(0)).norm() < 0.01 * sino.samples.row(0).norm());
    CHECK_FALSE(sino.angles[0]);
}

TEST_CASE("the manifest records the measured noise level") {
    const auto cfg = tiny("uvt_exp_noise");
    fs::remove_all(cfg.out_dir);
    cmd_simulate(cfg);
    const auto m = KeyValues::load(cfg.out_dir / files::simulate_manifest);
    CHECK(m.get_double("measured.noise_sigma") == doctest::Approx(0.15 * m.get_double("measured.mean_abs_clean")));
    const auto d = simulate(cfg);
    CHECK(d.noise_sigma == m.get_double("measured.noise_sigma"));
}

TEST_CASE("full pipeline outputs") {
    const auto cfg = tiny("uvt_exp_full");
    run_all(cfg);
    const auto trace = read_trace_csv((cfg.out_dir / files::fit_trace).string());
    CHECK(trace.size() == 3);
    for (const auto& row : trace)
        CHECK(std::isfinite(row.cve));
    const auto est = load_distribution(cfg.out_dir / files::estimated_distribution);
    CHECK(serialize(parse_distribution(serialize(est))) == serialize(est));

    const auto rows = cmd_evaluate(cfg);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].name == "Our-vs-GT");
    CHECK(rows[4].name == "ORP-vs-GT");
    for (const auto& r : rows)
        CHECK(r.report);
    CHECK(rows[0].report->mad_degrees);
    const auto csv = slurp(cfg.out_dir / files::metrics);
    CHECK(csv.rfind("comparison,rrmse,cc,ssim,table,mad_degrees,status\n", 0) == 0);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line))
        CHECK(std::count(line.begin(), line.end(), ',') == 6);

    // histogram counts sum to N
    std::ifstream hist(cfg.out_dir / files::angle_error_histogram);
    std::getline(hist, line);
    int total = 0;
    while (std::getline(hist, line))
        total += std::stoi(line.substr(line.rfind(',') + 1));
    CHECK(total == 80);
    CHECK(fs::exists(cfg.out_dir / files::convergence));
    CHECK(fs::exists(cfg.out_dir / files::distribution_overlay));
    CHECK_FALSE(fs::exists(cfg.out_dir / files::pmf_overlay));
}

TEST_CASE("reruns are byte-identical") {
    const auto a = tiny("uvt_exp_det_a");
    const auto b = tiny("uvt_exp_det_b");
    run_all(a);
    run_all(b);
    for (const char* f : {files::noisy_sinogram, files::fit_trace, files::reconstruction_raw, files::gltu_raw,
                          files::metrics, files::estimated_distribution, files::distribution_overlay})
        CHECK_MESSAGE(slurp(a.out_dir / f) == slurp(b.out_dir / f), f);
}

TEST_CASE("evaluate against itself and with missing inputs") {
    const auto cfg = tiny("uvt_exp_self");
    fs::remove_all(cfg.out_dir);
    cmd_simulate(cfg);
    auto rows = cmd_evaluate(cfg);
    CHECK_FALSE(rows[0].report);
    CHECK(rows[0].missing == files::reconstruction_raw);
    fs::copy_file(cfg.out_dir / files::phantom_raw, cfg.out_dir / files::reconstruction_raw);
    auto none = cfg;
    none.alignment = ImageAlignment::None;
    rows = cmd_evaluate(none);
    REQUIRE(rows[0].report);
    CHECK(rows[0].report->triplet() == "0.00/1.00/1.00");
}

TEST_CASE("plot data for identical and uniform distributions") {
    const auto cfg = tiny("uvt_exp_plot", "max_iters = 0\nfit_components = 1\ninit_concentration = 0\ntrue_model = uniform\n");
    fs::remove_all(cfg.out_dir);
    cmd_simulate(cfg);
    cmd_fit(cfg);
    fs::remove(cfg.out_dir / files::true_angles);
    cmd_plotdata(cfg);
    std::ifstream overlay(cfg.out_dir / files::distribution_overlay);
    std::string line;
    std::getline(overlay, line);
    int rows = 0;
    while (std::getline(overlay, line)) {
        std::istringstream fields(line);
        std::string theta, truth, est;
        std::getline(fields, theta, ',');
        std::getline(fields, truth, ',');
        std::getline(fields, est, ',');
        CHECK(std::abs(std::stod(truth) - 1.0 / (2.0 * std::numbers::pi)) < 1e-9);
        CHECK(std::abs(std::stod(truth) - std::stod(est)) < 1e-9);
        ++rows;
    }
    CHECK(rows == cfg.overlay_points);
}

TEST_CASE("PMF overlays aggregate a doubled truth") {
    const auto cfg = tiny("uvt_exp_pmf", "true_model = pmf\ntrue_components = 8\nfit_model = pmf\nfit_components = 4\n"
                                         "max_iters = 1\n");
    CHECK_FALSE(cfg.true_distribution);
    fs::remove_all(cfg.out_dir);
    cmd_simulate(cfg);
    cmd_fit(cfg);
    cmd_plotdata(cfg);
    const auto truth = load_distribution(cfg.out_dir / files::true_distribution);
    const auto paired = aggregate_pairs(truth.pmf()).probabilities;
    std::ifstream in(cfg.out_dir / files::pmf_overlay);
    std::string line;
    std::getline(in, line);
    CHECK(line == "bin,lower,upper,true_mass,estimated_mass");
    for (std::size_t b = 0; b < 4; ++b) {
        REQUIRE(std::getline(in, line));
        std::istringstream fields(line);
        std::string f;
        for (int k = 0; k < 4; ++k)
            std::getline(fields, f, ',');
        CHECK(std::stod(f) == doctest::Approx(paired[b]));
    }
}

TEST_CASE("angle-error histogram") {
    const std::vector<double> truth{0.0, 1.0, 2.0, 3.0};
    const std::vector<double> est{0.0, 1.0 + std::numbers::pi / 3, 2.0 - 3.0, 3.0 + std::numbers::pi};
    const auto h = angle_error_histogram(est, truth, 4);
    CHECK(h == std::vector<int>{1, 1, 0, 2});
}

TEST_CASE("re-expressing in the truth frame inverts rotation and reflection exactly") {
    const auto gt = make_phantom(PhantomKind::SheppLoganAsymmetric, 48);
    const auto truth = sample_angles(AngleDistribution::uniform(), 120, 6);
    const auto sino = radon_forward(gt, std::span<const double>(truth), 48);
    FitConfig fit;
    const auto direct = fbp_reconstruct(sino, fit.filter, 0, fit.weighting);
    for (const AngleAlignment a : {AngleAlignment{0.7, false}, AngleAlignment{2.2, true}}) {
        // estimated angles that map back onto the truth under `a`
        std::vector<double> est;
        for (double t : truth)
            est.push_back(a.reflected ? std::fmod(a.rotation - t + 4.0 * std::numbers::pi, 2.0 * std::numbers::pi)
                                      : std::fmod(t + a.rotation, 2.0 * std::numbers::pi));
        Sinogram unlabeled = sino;
        unlabeled.clear_angles();
        const auto back = reconstruct_in_frame(unlabeled, est, a, fit);
        CHECK((back.pixels - direct.pixels).cwiseAbs().maxCoeff() < 1e-9);
    }
}
