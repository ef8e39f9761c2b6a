// uvt: simulate datasets, fit the angle distribution and image, run the
// baselines and write metric tables / plot data.
//
//   uvt simulate --config run.cfg --out runs/a --seed 7
//   uvt fit      --out runs/a
//   uvt baseline gltu --out runs/a
//   uvt evaluate --out runs/a

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "uvt/experiments.hpp"
#include "uvt/keyvalue.hpp"

namespace {

struct CommonOptions {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config, "flat key = value config file")->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out, "output (and input) directory");
    cmd->add_option("--seed", opts.seed, "master seed, overrides the config");
}

uvt::ExperimentConfig resolve(const CommonOptions& opts) {
    uvt::KeyValues kv = opts.config.empty() ? uvt::KeyValues{} : uvt::KeyValues::load(opts.config);
    if (!opts.out.empty())
        kv.set("out_dir", opts.out);
    if (opts.seed)
        kv.set("seed", std::to_string(*opts.seed));
    return uvt::parse_experiment_config(kv);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tomographic reconstruction under unknown view angles"};
    app.require_subcommand(1);

    CommonOptions opts;
    auto* simulate = app.add_subcommand("simulate", "phantom, sampled angles, clean and noisy sinograms");
    auto* fit = app.add_subcommand("fit", "denoise, order and fit the angle distribution");
    auto* baseline = app.add_subcommand("baseline", "reference reconstructions");
    auto* gltu = baseline->add_subcommand("gltu", "eigenmap order with uniform angles");
    auto* orp = baseline->add_subcommand("orp", "filtered back projection at the true angles");
    baseline->require_subcommand(1);
    auto* evaluate = app.add_subcommand("evaluate", "RRMSE / CC / SSIM table against ground truth and ORP");
    auto* plotdata = app.add_subcommand("plotdata", "convergence, distribution overlay and angle-error CSVs");
    for (auto* cmd : {simulate, fit, gltu, orp, evaluate, plotdata})
        add_common(cmd, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const uvt::ExperimentConfig cfg = resolve(opts);
        if (simulate->parsed()) {
            uvt::cmd_simulate(cfg);
        } else if (fit->parsed()) {
            uvt::cmd_fit(cfg);
        } else if (gltu->parsed()) {
            uvt::cmd_baseline(cfg, uvt::BaselineKind::Gltu);
        } else if (orp->parsed()) {
            uvt::cmd_baseline(cfg, uvt::BaselineKind::Orp);
        } else if (evaluate->parsed()) {
            for (const auto& row : uvt::cmd_evaluate(cfg))
                std::printf("%-12s %s\n", row.name.c_str(),
                            row.report ? row.report->triplet().c_str() : ("missing " + row.missing).c_str());
        } else if (plotdata->parsed()) {
            uvt::cmd_plotdata(cfg);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "uvt: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
