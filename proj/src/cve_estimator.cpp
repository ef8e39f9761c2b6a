#include "uvt/cve_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "uvt/io.hpp"
#include "uvt/seeds.hpp"

namespace uvt {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

// Parameter layout helpers -------------------------------------------------

struct ParameterBox {
    Eigen::VectorXd steps, lower, upper;
};

ParameterBox parameter_box(const AngleDistribution& like, const FitConfig& cfg) {
    const Index p = flatten(like).size();
    ParameterBox box{Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(p)};
    if (like.is_mvf()) {
        const Index l = static_cast<Index>(like.mvf().components.size());
        const bool shape_free = cfg.kappa_bounds.max > cfg.kappa_bounds.min;
        const bool any_concentration =
            shape_free || cfg.kappa_bounds.max > 0; // means matter only when some kappa can be positive
        for (Index i = 0; i < l; ++i) {
            box.steps(i) = l > 1 ? cfg.fd_steps.weight : 0.0;
            box.lower(i) = 0.0;
            box.upper(i) = 1.0;
            box.steps(l + i) = any_concentration ? cfg.fd_steps.mean : 0.0;
            box.lower(l + i) = -inf;
            box.upper(l + i) = inf;
            box.steps(2 * l + i) = shape_free ? cfg.fd_steps.concentration : 0.0;
            box.lower(2 * l + i) = cfg.kappa_bounds.min;
            box.upper(2 * l + i) = cfg.kappa_bounds.max;
        }
    } else {
        box.steps.setConstant(cfg.fd_steps.weight);
        box.upper.setOnes();
    }
    return box;
}

// The objective of one iteration: the split is frozen, only the
// distribution parameters vary.
class SplitObjective {
public:
    SplitObjective(const Sinogram& projections, const Raster<double>& filtered, const OrderingResult& ordering,
                   const DataSplit& split, const AngleDistribution& like, const FitConfig& cfg)
        : projections_(projections), filtered_(filtered), ordering_(ordering), split_(split), like_(like),
          cfg_(cfg) {
        scale_ = 0;
        for (Index v : split_.validation)
            scale_ += projections_.samples.row(v).norm();
        if (!(scale_ > 0))
            scale_ = 1;
    }

    [[nodiscard]] double scale() const { return scale_; }

    [[nodiscard]] double cve(const Eigen::VectorXd& params) const {
        const AngleDistribution dist = unflatten(like_, params);
        const auto angles = assign_angles(ordering_, dist);
        std::vector<double> sub_angles;
        sub_angles.reserve(split_.reconstruction.size());
        for (Index r : split_.reconstruction)
            sub_angles.push_back(angles[static_cast<std::size_t>(r)]);
        const auto weights = angle_weights<double>(sub_angles, cfg_.weighting);
        const ImageGrid image = backproject<double>(filtered_, split_.reconstruction, sub_angles, weights,
                                                    projections_.detector_count());
        const Index detectors = projections_.detector_count();
        Eigen::VectorXd simulated(detectors);
        double total = 0;
        for (Index v : split_.validation) {
            detail::project_masked<double>(image.pixels, image.pixel_spacing, angles[static_cast<std::size_t>(v)],
                                           simulated);
            total += (projections_.samples.row(v).transpose() - simulated).norm();
        }
        return total;
    }

private:
    const Sinogram& projections_;
    const Raster<double>& filtered_;
    const OrderingResult& ordering_;
    const DataSplit& split_;
    const AngleDistribution& like_;
    const FitConfig& cfg_;
    double scale_;
};

ImageGrid reconstruct_all(const Raster<double>& filtered, const std::vector<double>& angles, const FitConfig& cfg) {
    std::vector<Index> rows(angles.size());
    std::iota(rows.begin(), rows.end(), Index{0});
    const auto weights = angle_weights<double>(angles, cfg.weighting);
    return backproject<double>(filtered, rows, angles, weights, filtered.cols());
}

void check_projections(const Sinogram& projections, Index minimum) {
    validate(projections);
    if (projections.count() < minimum)
        throw InvalidInput("need at least " + std::to_string(minimum) + " projections, got " +
                           std::to_string(projections.count()));
}

} // namespace

void FitConfig::validate() const {
    if (!(step_size > 0) || !std::isfinite(step_size))
        throw InvalidInput("step size must be positive");
    if (!(fd_steps.mean > 0) || !(fd_steps.concentration > 0) || !(fd_steps.weight > 0))
        throw InvalidInput("finite-difference steps must be positive");
    if (model == DistributionModel::Mvf && components < 1)
        throw InvalidInput("MVF needs at least 1 component");
    if (model == DistributionModel::Pmf && components < 2)
        throw InvalidInput("PMF needs at least 2 bins");
    if (max_backtracks < 0)
        throw InvalidInput("max_backtracks must be >= 0");
    if (max_iters < 0)
        throw InvalidInput("max_iters must be >= 0");
    if (smoothing_window < 1)
        throw InvalidInput("smoothing window must be >= 1");
    if (!(reconstruction_fraction > 0 && reconstruction_fraction < 1))
        throw InvalidInput("reconstruction fraction must lie in (0, 1)");
    if (!(kappa_bounds.min >= 0) || !(kappa_bounds.max >= kappa_bounds.min) || !std::isfinite(kappa_bounds.max))
        throw InvalidInput("concentration bounds must satisfy 0 <= min <= max < inf");
    if (init_grid < 1)
        throw InvalidInput("init_grid must be >= 1");
    if (!(convergence_tol >= 0))
        throw InvalidInput("convergence tolerance must be >= 0");
    if (warm_start) {
        const bool mvf = warm_start->is_mvf();
        const auto count = mvf ? warm_start->mvf().components.size() : warm_start->pmf().probabilities.size();
        if (mvf != (model == DistributionModel::Mvf) || count != static_cast<std::size_t>(components))
            throw InvalidInput("warm start does not match the model and component count");
        if (mvf)
            for (const auto& c : warm_start->mvf().components)
                if (c.concentration < kappa_bounds.min || c.concentration > kappa_bounds.max)
                    throw InvalidInput("warm start concentration lies outside the bounds");
    }
}

DataSplit split_data(Index n, double fraction, std::mt19937_64& rng) {
    if (!(fraction > 0 && fraction < 1))
        throw InvalidInput("split fraction must lie in (0, 1)");
    if (n < 5)
        throw InvalidInput("split needs at least 5 entries");
    const auto n_r = static_cast<Index>(std::llround(fraction * double(n)));
    if (n_r < 1 || n_r >= n)
        throw InvalidInput("split leaves an empty reconstruction or validation set");
    std::vector<Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    DataSplit split;
    split.reconstruction.assign(idx.begin(), idx.begin() + n_r);
    split.validation.assign(idx.begin() + n_r, idx.end());
    std::sort(split.reconstruction.begin(), split.reconstruction.end());
    std::sort(split.validation.begin(), split.validation.end());
    return split;
}

std::vector<double> assign_angles(const OrderingResult& order, const AngleDistribution& dist) {
    const int n = static_cast<int>(order.permutation.size());
    const auto means = order_stat_means(dist, n);
    std::vector<double> angles(order.permutation.size());
    for (std::size_t k = 0; k < order.permutation.size(); ++k)
        angles[static_cast<std::size_t>(order.permutation[k])] = means[k];
    return angles;
}

double cross_validation_error(const ImageGrid& image, const Sinogram& validation) {
    validate(image);
    validate(validation);
    const auto angles = validation.angle_values();
    const ImageGrid masked = apply_circle_mask(image);
    Eigen::VectorXd simulated(validation.detector_count());
    double total = 0;
    for (Index i = 0; i < validation.count(); ++i) {
        detail::project_masked<double>(masked.pixels, masked.pixel_spacing, angles[static_cast<std::size_t>(i)],
                                       simulated);
        total += (validation.samples.row(i).transpose() - simulated).norm();
    }
    return total;
}

Eigen::VectorXd flatten(const AngleDistribution& dist) {
    if (dist.is_mvf()) {
        const auto& comps = dist.mvf().components;
        const Index l = static_cast<Index>(comps.size());
        Eigen::VectorXd x(3 * l);
        for (Index i = 0; i < l; ++i) {
            x(i) = comps[static_cast<std::size_t>(i)].weight;
            x(l + i) = comps[static_cast<std::size_t>(i)].mean;
            x(2 * l + i) = comps[static_cast<std::size_t>(i)].concentration;
        }
        return x;
    }
    const auto& p = dist.pmf().probabilities;
    return Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Index>(p.size()));
}

AngleDistribution unflatten(const AngleDistribution& like, const Eigen::VectorXd& params) {
    if (params.size() != flatten(like).size())
        throw InvalidInput("parameter vector length does not match the distribution");
    if (like.is_mvf()) {
        const Index l = params.size() / 3;
        const double total = params.head(l).sum();
        if (!(total > 0))
            throw InvalidInput("mixture weights sum to zero");
        MvfParams mvf;
        for (Index i = 0; i < l; ++i)
            mvf.components.push_back({params(i) / total, wrap_angle(params(l + i)), params(2 * l + i)});
        return AngleDistribution(std::move(mvf), like.grid_size());
    }
    const double total = params.sum();
    if (!(total > 0))
        throw InvalidInput("PMF probabilities sum to zero");
    PmfParams pmf;
    for (Index i = 0; i < params.size(); ++i)
        pmf.probabilities.push_back(params(i) / total);
    return AngleDistribution(std::move(pmf), like.grid_size());
}

Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& objective,
                                 const Eigen::VectorXd& x, const Eigen::VectorXd& steps, const Eigen::VectorXd& lower,
                                 const Eigen::VectorXd& upper) {
    const Index p = x.size();
    if (steps.size() != p || lower.size() != p || upper.size() != p)
        throw InvalidInput("numeric_gradient: size mismatch");
    auto evaluate = [&](const Eigen::VectorXd& at, Index coord) {
        const double v = objective(at);
        if (!std::isfinite(v))
            throw NumericalError("objective is not finite while probing parameter " + std::to_string(coord), coord);
        return v;
    };
    std::optional<double> centre;
    auto centre_value = [&](Index coord) {
        if (!centre)
            centre = evaluate(x, coord);
        return *centre;
    };

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(p);
    for (Index i = 0; i < p; ++i) {
        const double h = steps(i);
        if (!(h > 0))
            continue;
        const bool can_down = x(i) - h >= lower(i);
        const bool can_up = x(i) + h <= upper(i);
        Eigen::VectorXd probe = x;
        if (can_down && can_up) {
            probe(i) = x(i) + h;
            const double up = evaluate(probe, i);
            probe(i) = x(i) - h;
            const double down = evaluate(probe, i);
            grad(i) = (up - down) / (2 * h);
        } else if (can_up) {
            probe(i) = x(i) + h;
            grad(i) = (evaluate(probe, i) - centre_value(i)) / h;
        } else if (can_down) {
            probe(i) = x(i) - h;
            grad(i) = (centre_value(i) - evaluate(probe, i)) / h;
        }
    }
    return grad;
}

Eigen::VectorXd mirror_step(const Eigen::VectorXd& weights, const Eigen::VectorXd& gradient, double alpha) {
    if (weights.size() != gradient.size())
        throw InvalidInput("mirror_step: size mismatch");
    for (Index i = 0; i < gradient.size(); ++i)
        if (!std::isfinite(gradient(i)))
            throw NumericalError("mirror_step: gradient entry is not finite", i);
    if (weights.size() == 0)
        return weights;
    // log domain with the largest term pinned at exp(0)
    Eigen::VectorXd log_w(weights.size());
    for (Index i = 0; i < weights.size(); ++i)
        log_w(i) = weights(i) > 0 ? std::log(weights(i)) - alpha * gradient(i) : -inf;
    const double top = log_w.maxCoeff();
    if (!std::isfinite(top))
        throw NumericalError("mirror_step: all weights vanished");
    Eigen::VectorXd out = (log_w.array() - top).exp();
    return out / out.sum();
}

AngleDistribution project_params(AngleDistribution::Model updated, const ConcentrationBounds& bounds, int grid_size) {
    auto renormalize = [](std::vector<double*> entries) {
        double total = 0;
        for (double* e : entries) {
            *e = std::clamp(*e, 0.0, 1.0);
            total += *e;
        }
        if (!(total > 0))
            throw NumericalError("simplex parameters vanished during projection");
        for (double* e : entries)
            *e /= total;
    };
    if (auto* mvf = std::get_if<MvfParams>(&updated)) {
        std::vector<double*> weights;
        for (auto& c : mvf->components) {
            c.mean = wrap_angle(c.mean);
            c.concentration = std::clamp(c.concentration, bounds.min, bounds.max);
            weights.push_back(&c.weight);
        }
        renormalize(weights);
    } else {
        auto& pmf = std::get<PmfParams>(updated);
        std::vector<double*> probs;
        for (auto& p : pmf.probabilities)
            probs.push_back(&p);
        renormalize(probs);
    }
    return AngleDistribution(std::move(updated), grid_size);
}

namespace {

AngleDistribution random_distribution(const FitConfig& cfg, std::mt19937_64& rng) {
    const auto l = static_cast<std::size_t>(cfg.components);
    std::exponential_distribution<double> dirichlet_draw(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (cfg.model == DistributionModel::Pmf) {
        PmfParams pmf;
        for (std::size_t i = 0; i < l; ++i)
            pmf.probabilities.push_back(dirichlet_draw(rng) + 1e-3);
        return project_params(std::move(pmf), cfg.kappa_bounds, cfg.grid_size);
    }
    MvfParams mvf;
    for (std::size_t i = 0; i < l; ++i) {
        VonMisesComponent c;
        c.weight = dirichlet_draw(rng) + 1e-3;
        c.mean = two_pi * unit(rng);
        // log-uniform over [0.1, 10], then clamped into the bounds
        c.concentration = 0.1 * std::pow(100.0, unit(rng));
        mvf.components.push_back(c);
    }
    return project_params(std::move(mvf), cfg.kappa_bounds, cfg.grid_size);
}

AngleDistribution uniform_start(const FitConfig& cfg) {
    const auto l = static_cast<std::size_t>(cfg.components);
    if (cfg.model == DistributionModel::Pmf)
        return project_params(PmfParams{std::vector<double>(l, 1.0 / double(l))}, cfg.kappa_bounds, cfg.grid_size);
    MvfParams mvf;
    for (std::size_t i = 0; i < l; ++i)
        mvf.components.push_back({1.0 / double(l), two_pi * double(i) / double(l), cfg.init_concentration});
    return project_params(std::move(mvf), cfg.kappa_bounds, cfg.grid_size);
}

// Concentration used while scanning means: flat enough to cover the gaps
// between grid positions, peaked enough for J to tell positions apart.
constexpr double scan_concentration = 3.0;

// The eigenmap fixes the projection order but not where the angle origin
// falls in it, so J is multimodal in the means and a descent from the flat
// start settles on a near-uniform assignment. The scan places each mode
// on a grid of `init_grid` positions and keeps the lowest J, with the plain
// uniform start as the fallback. MVF: a rigid rotation of evenly spread
// components, then coordinate sweeps over each component's mean, later also
// its concentration and weight; PMF: one tilted bump.
AngleDistribution search_start(const AngleDistribution& uniform, const SplitObjective& objective,
                               const FitConfig& cfg) {
    AngleDistribution best = uniform;
    double best_j = objective.cve(flatten(uniform));
    const auto consider = [&](AngleDistribution candidate) {
        const double j = objective.cve(flatten(candidate));
        if (j < best_j) {
            best_j = j;
            best = std::move(candidate);
        }
    };
    const int grid = cfg.init_grid;
    const auto l = static_cast<std::size_t>(cfg.components);
    if (cfg.model == DistributionModel::Pmf) {
        for (double tilt : {0.5, 1.0, 2.0})
            for (int g = 0; g < grid; ++g) {
                const double phase = two_pi * g / grid;
                PmfParams pmf;
                for (std::size_t i = 0; i < l; ++i)
                    pmf.probabilities.push_back(std::exp(tilt * std::cos(two_pi * (double(i) + 0.5) / double(l) - phase)));
                consider(project_params(std::move(pmf), cfg.kappa_bounds, cfg.grid_size));
            }
        return best;
    }
    MvfParams scan;
    for (std::size_t i = 0; i < l; ++i)
        scan.components.push_back({1.0 / double(l), two_pi * double(i) / double(l), scan_concentration});
    scan = project_params(std::move(scan), cfg.kappa_bounds, cfg.grid_size).mvf();
    double scan_j = objective.cve(flatten(AngleDistribution(scan, cfg.grid_size)));
    const auto try_scan = [&](MvfParams candidate) {
        candidate = project_params(std::move(candidate), cfg.kappa_bounds, cfg.grid_size).mvf();
        const double j = objective.cve(flatten(AngleDistribution(candidate, cfg.grid_size)));
        if (j < scan_j) {
            scan_j = j;
            scan = std::move(candidate);
        }
    };
    // the whole configuration rotated first: single-mean moves cannot shift
    // a pair of modes that only fits when both move
    const MvfParams spread = scan;
    for (int g = 1; g < grid; ++g) {
        MvfParams candidate = spread;
        for (auto& c : candidate.components)
            c.mean += two_pi * g / grid;
        try_scan(std::move(candidate));
    }
    for (int sweep = 0; sweep < 3; ++sweep)
        for (std::size_t c = 0; c < l; ++c) {
            for (int g = 0; g < grid; ++g) {
                MvfParams candidate = scan;
                candidate.components[c].mean = two_pi * g / grid;
                try_scan(std::move(candidate));
            }
            if (sweep == 0)
                continue;
            for (double kappa : {0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0}) {
                MvfParams candidate = scan;
                candidate.components[c].concentration = kappa;
                try_scan(std::move(candidate));
            }
            if (l < 2)
                continue;
            // weight of component c set to `share`, the rest rescaled
            for (double share : {0.2, 0.35, 0.5, 0.65, 0.8}) {
                MvfParams candidate = scan;
                const double rest = 1.0 - candidate.components[c].weight;
                for (std::size_t i = 0; i < l; ++i)
                    candidate.components[i].weight =
                        i == c ? share : (rest > 0 ? candidate.components[i].weight * (1.0 - share) / rest
                                                   : (1.0 - share) / double(l - 1));
                try_scan(std::move(candidate));
            }
        }
    if (scan_j < best_j)
        best = AngleDistribution(scan, cfg.grid_size);
    return best;
}

} // namespace

AngleDistribution initial_distribution(const FitConfig& cfg) {
    cfg.validate();
    if (cfg.warm_start)
        return AngleDistribution(cfg.warm_start->model(), cfg.grid_size);
    if (cfg.init == InitMode::Random) {
        std::mt19937_64 rng(derive_seed(cfg.seed, SeedStream::Init));
        return random_distribution(cfg, rng);
    }
    return uniform_start(cfg);
}

std::vector<double> moving_average(std::span<const double> values, int window) {
    std::vector<double> out(values.size());
    double running = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        running += values[i];
        if (i >= static_cast<std::size_t>(window))
            running -= values[i - static_cast<std::size_t>(window)];
        out[i] = running / double(std::min<std::size_t>(i + 1, static_cast<std::size_t>(window)));
    }
    return out;
}

FitResult fit(const Sinogram& projections, const FitConfig& cfg) {
    check_projections(projections, 20);
    return fit(projections, laplacian_eigenmap_order(projections, cfg.ordering), cfg);
}

FitResult fit(const Sinogram& projections, const OrderingResult& ordering, const FitConfig& cfg) {
    cfg.validate();
    check_projections(projections, 20);
    if (static_cast<Index>(ordering.permutation.size()) != projections.count())
        throw InvalidInput("ordering does not match the projection count");

    const ProjectionFilter<double> ramp(projections.detector_count(), cfg.filter);
    const Raster<double> filtered = ramp.apply(projections.samples);

    FitResult result{ImageGrid{}, initial_distribution(cfg), initial_distribution(cfg), FitTrace{}, ordering};
    if (cfg.init == InitMode::Search && !cfg.warm_start) {
        std::mt19937_64 split_rng(derive_seed(cfg.seed, SeedStream::Split, 0));
        const DataSplit split = split_data(projections.count(), cfg.reconstruction_fraction, split_rng);
        const SplitObjective objective(projections, filtered, ordering, split, result.initial, cfg);
        result.initial = search_start(result.initial, objective, cfg);
        result.distribution = result.initial;
    }
    const ParameterBox box = parameter_box(result.distribution, cfg);
    const Index l = static_cast<Index>(cfg.components);
    std::vector<double> history;
    double alpha = cfg.step_size;

    for (int it = 0; it < cfg.max_iters; ++it) {
        const std::uint64_t split_seed = derive_seed(cfg.seed, SeedStream::Split, static_cast<std::uint64_t>(it));
        std::mt19937_64 split_rng(split_seed);
        const DataSplit split = split_data(projections.count(), cfg.reconstruction_fraction, split_rng);
        const SplitObjective objective(projections, filtered, ordering, split, result.distribution, cfg);
        const double descent_scale = cfg.relative_objective ? 1.0 / objective.scale() : 1.0;

        const Eigen::VectorXd x = flatten(result.distribution);
        const double j = objective.cve(x);
        if (!std::isfinite(j)) {
            result.trace.abort_reason = "cross-validation error is not finite at iteration " + std::to_string(it);
            break;
        }
        history.push_back(j);
        const auto smoothed = moving_average(history, cfg.smoothing_window);
        result.trace.iterations.push_back({it, j, smoothed.back(), x, split_seed});

        Eigen::VectorXd grad;
        try {
            grad = numeric_gradient([&](const Eigen::VectorXd& p) { return objective.cve(p) * descent_scale; }, x,
                                    box.steps, box.lower, box.upper);
        } catch (const NumericalError& e) {
            result.trace.abort_reason = e.what();
            break;
        }

        auto propose = [&](double alpha) {
            AngleDistribution::Model updated = result.distribution.model();
            if (auto* mvf = std::get_if<MvfParams>(&updated)) {
                Eigen::VectorXd w(l);
                for (Index i = 0; i < l; ++i)
                    w(i) = mvf->components[static_cast<std::size_t>(i)].weight;
                const Eigen::VectorXd w_next = mirror_step(w, grad.head(l), alpha);
                for (Index i = 0; i < l; ++i) {
                    auto& c = mvf->components[static_cast<std::size_t>(i)];
                    c.weight = w_next(i);
                    c.mean -= alpha * grad(l + i);
                    c.concentration -= alpha * grad(2 * l + i);
                }
            } else {
                auto& p = std::get<PmfParams>(updated).probabilities;
                const Eigen::VectorXd p_next =
                    mirror_step(Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Index>(p.size())), grad, alpha);
                for (std::size_t i = 0; i < p.size(); ++i)
                    p[i] = p_next(static_cast<Index>(i));
            }
            return project_params(std::move(updated), cfg.kappa_bounds, cfg.grid_size);
        };

        if (cfg.max_backtracks == 0) {
            result.distribution = propose(alpha);
        } else {
            // halve until this iteration's split objective decreases, then let the step grow again
            bool accepted = false;
            for (int b = 0; b <= cfg.max_backtracks && !accepted; ++b) {
                AngleDistribution candidate = propose(alpha);
                const double trial = objective.cve(flatten(candidate));
                if (std::isfinite(trial) && trial < j) {
                    result.distribution = std::move(candidate);
                    accepted = true;
                } else {
                    alpha *= 0.5;
                }
            }
            if (accepted)
                alpha *= 2.0;
        }

        const auto w = static_cast<std::size_t>(cfg.smoothing_window);
        if (history.size() >= 2 * w) {
            const double now = smoothed.back();
            const double before = smoothed[smoothed.size() - 1 - w];
            if (before > 0 && std::abs(now - before) / before < cfg.convergence_tol) {
                result.trace.converged = true;
                break;
            }
        }
    }

    result.trace.assigned_angles = assign_angles(ordering, result.distribution);
    result.image = reconstruct_all(filtered, result.trace.assigned_angles, cfg);
    result.trace.image = result.image;
    return result;
}

ImageGrid baseline_gltu(const Sinogram& projections, const FitConfig& cfg) {
    check_projections(projections, 3);
    return baseline_gltu(projections, laplacian_eigenmap_order(projections, cfg.ordering), cfg);
}

ImageGrid baseline_gltu(const Sinogram& projections, const OrderingResult& ordering, const FitConfig& cfg) {
    check_projections(projections, 3);
    const ProjectionFilter<double> ramp(projections.detector_count(), cfg.filter);
    const auto angles = assign_angles(ordering, AngleDistribution::uniform(cfg.grid_size));
    return reconstruct_all(ramp.apply(projections.samples), angles, cfg);
}

ImageGrid baseline_orp(const Sinogram& projections, RampFilter filter, AngleWeighting weighting) {
    validate(projections);
    if (!projections.has_all_angles())
        throw InvalidInput("oracle reconstruction needs ground-truth angles on every projection");
    return fbp_reconstruct(projections, filter, 0, weighting);
}

void write_trace_csv(const std::string& path, const FitTrace& trace) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path);
    const Index p = trace.iterations.empty() ? 0 : trace.iterations.front().parameters.size();
    out << "iter,J";
    for (Index i = 0; i < p; ++i)
        out << ",param_" << i;
    out << '\n';
    for (const auto& row : trace.iterations) {
        out << row.iteration << ',' << io::format_double(row.cve);
        for (Index i = 0; i < row.parameters.size(); ++i)
            out << ',' << io::format_double(row.parameters(i));
        out << '\n';
    }
    if (!out)
        throw IoError("write failed: " + path);
}

std::vector<TraceRow> read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("iter,J", 0) != 0)
        throw IoError(path + ": expected header 'iter,J,...'");
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::istringstream ss(line);
        std::string field;
        TraceRow row{};
        std::getline(ss, field, ',');
        row.iteration = std::stoi(field);
        std::getline(ss, field, ',');
        row.cve = io::parse_double(field);
        while (std::getline(ss, field, ','))
            row.parameters.push_back(io::parse_double(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace uvt
