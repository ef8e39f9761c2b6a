#include "uvt/directional_dist.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "uvt/errors.hpp"
#include "uvt/io.hpp"
#include "uvt/keyvalue.hpp"
#include "uvt/tomo_core.hpp"

namespace uvt {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double sum_tolerance = 1e-9;

void check_simplex(const std::vector<double>& v, const char* what) {
    double total = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]) || v[i] < 0.0 || v[i] > 1.0)
            throw InvalidInput(std::string(what) + " " + std::to_string(i) + " outside [0, 1]");
        total += v[i];
    }
    if (std::abs(total - 1.0) > sum_tolerance)
        throw InvalidInput(std::string(what) + "s do not sum to 1");
}

double mvf_density(const MvfParams& mvf, double theta) {
    double total = 0;
    for (const auto& c : mvf.components) {
        if (c.weight == 0.0)
            continue;
        // kappa (cos - 1) keeps the exponent <= 0; the remaining kappa - log I0 is O(log kappa)
        const double log_norm = c.concentration - log_bessel_i0(c.concentration) - std::log(two_pi);
        total += c.weight * std::exp(c.concentration * (std::cos(theta - c.mean) - 1.0) + log_norm);
    }
    return total;
}

double pmf_bin_width(const PmfParams& pmf) { return two_pi / double(pmf.probabilities.size()); }

std::size_t pmf_bin(const PmfParams& pmf, double theta) {
    const auto l = static_cast<std::size_t>(std::floor(theta / pmf_bin_width(pmf)));
    return std::min(l, pmf.probabilities.size() - 1);
}

double pmf_cdf(const PmfParams& pmf, double theta) {
    if (theta <= 0)
        return 0;
    if (theta >= two_pi)
        return 1;
    const double width = pmf_bin_width(pmf);
    const std::size_t l = pmf_bin(pmf, theta);
    double below = 0;
    for (std::size_t i = 0; i < l; ++i)
        below += pmf.probabilities[i];
    return std::min(1.0, below + pmf.probabilities[l] * (theta - double(l) * width) / width);
}

double pmf_survival(const PmfParams& pmf, double theta) {
    if (theta <= 0)
        return 1;
    if (theta >= two_pi)
        return 0;
    const double width = pmf_bin_width(pmf);
    const std::size_t l = pmf_bin(pmf, theta);
    double above = 0;
    for (std::size_t i = pmf.probabilities.size(); i-- > l + 1;)
        above += pmf.probabilities[i];
    return std::min(1.0, above + pmf.probabilities[l] * (double(l + 1) * width - theta) / width);
}

double safe_log(double x) { return x > 0 ? std::log(x) : -std::numeric_limits<double>::infinity(); }

// log of the unnormalized order-statistic density on one node; the
// combinatorial factor is added by the caller.
inline double order_stat_log_kernel(double a, double b, double log_f, double log_cdf, double log_surv) {
    double e = log_f;
    if (a > 0)
        e += a * log_cdf;
    if (b > 0)
        e += b * log_surv;
    return e;
}

double log_binomial_factor(int k, int n) {
    return std::lgamma(double(n) + 1) - std::lgamma(double(k)) - std::lgamma(double(n - k) + 1);
}

void check_order_args(int k, int n) {
    if (n < 1)
        throw InvalidInput("order statistics need N >= 1");
    if (k < 1 || k > n)
        throw InvalidInput("order statistic index k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
}

struct LogTables {
    Eigen::VectorXd log_f, log_cdf, log_surv;
};

LogTables log_tables(const DistributionGrid& grid) {
    const Eigen::Index m = grid.theta.size();
    LogTables t{Eigen::VectorXd(m), Eigen::VectorXd(m), Eigen::VectorXd(m)};
    for (Eigen::Index i = 0; i < m; ++i) {
        t.log_f(i) = safe_log(grid.density(i));
        t.log_cdf(i) = safe_log(grid.cumulative(i));
        t.log_surv(i) = safe_log(grid.survival(i));
    }
    return t;
}

// Grid index range carrying all but a negligible tail of the k-th order
// statistic: U_(k) ~ Beta(k, N-k+1), kept within 40 standard deviations.
std::pair<Eigen::Index, Eigen::Index> order_stat_window(const DistributionGrid& grid, int k, int n) {
    const double mean = double(k) / double(n + 1);
    const double var = double(k) * double(n - k + 1) / (double(n + 1) * double(n + 1) * double(n + 2));
    const double spread = 40.0 * std::sqrt(var) + 1e-12;
    const double lo_u = mean - spread, hi_u = mean + spread;
    const auto* begin = grid.cumulative.data();
    const auto* end = begin + grid.cumulative.size();
    Eigen::Index lo = std::lower_bound(begin, end, lo_u) - begin;
    Eigen::Index hi = std::upper_bound(begin, end, hi_u) - begin;
    lo = std::max<Eigen::Index>(0, lo - 1);
    hi = std::min<Eigen::Index>(grid.cumulative.size() - 1, hi);
    return {lo, hi};
}

double order_stat_mean_from(const DistributionGrid& grid, const LogTables& logs, int k, int n) {
    const double a = double(k - 1), b = double(n - k);
    const auto [lo, hi] = order_stat_window(grid, k, n);
    double peak = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = lo; i <= hi; ++i)
        peak = std::max(peak, order_stat_log_kernel(a, b, logs.log_f(i), logs.log_cdf(i), logs.log_surv(i)));
    if (!std::isfinite(peak))
        throw NumericalError("order statistic density vanishes on the grid", k);
    const Eigen::Index last = grid.theta.size() - 1;
    double mass = 0, moment = 0;
    for (Eigen::Index i = lo; i <= hi; ++i) {
        const double e = order_stat_log_kernel(a, b, logs.log_f(i), logs.log_cdf(i), logs.log_surv(i));
        const double w = (i == 0 || i == last) ? 0.5 : 1.0;
        const double v = w * std::exp(e - peak);
        mass += v;
        moment += v * grid.theta(i);
    }
    return moment / mass;
}

} // namespace

AngleDistribution::AngleDistribution(Model model, int grid_size) : model_(std::move(model)), grid_size_(grid_size) {
    if (grid_size < 256 || grid_size % 2 != 0)
        throw InvalidInput("evaluation grid size must be even and >= 256");
    if (auto* mvf = std::get_if<MvfParams>(&model_)) {
        if (mvf->components.empty())
            throw InvalidInput("MVF needs at least one component");
        std::vector<double> weights;
        for (auto& c : mvf->components) {
            if (!std::isfinite(c.mean))
                throw InvalidInput("MVF mean is not finite");
            if (!std::isfinite(c.concentration) || c.concentration < 0)
                throw InvalidInput("MVF concentration must be finite and >= 0");
            c.mean = wrap_angle(c.mean);
            weights.push_back(c.weight);
        }
        check_simplex(weights, "MVF weight");
    } else {
        const auto& pmf = std::get<PmfParams>(model_);
        if (pmf.probabilities.empty())
            throw InvalidInput("PMF needs at least one bin");
        check_simplex(pmf.probabilities, "PMF probability");
    }
}

AngleDistribution AngleDistribution::uniform(int grid_size) {
    return AngleDistribution(MvfParams{{VonMisesComponent{1.0, 0.0, 0.0}}}, grid_size);
}

double log_bessel_i0(double kappa) {
    kappa = std::abs(kappa);
    if (kappa < 20.0) {
        const double q = 0.25 * kappa * kappa;
        double term = 1.0, sum = 1.0;
        for (int m = 1; m < 500; ++m) {
            term *= q / (double(m) * double(m));
            sum += term;
            if (term < 1e-17 * sum)
                break;
        }
        return std::log(sum);
    }
    // I0(k) ~ e^k / sqrt(2 pi k) * sum_j ((2j-1)!!)^2 / (j! (8k)^j)
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < 30; ++j) {
        const double next = term * double(2 * j - 1) * double(2 * j - 1) / (8.0 * double(j) * kappa);
        if (next > term)
            break;
        term = next;
        sum += term;
        if (term < 1e-17 * sum)
            break;
    }
    return kappa - 0.5 * std::log(two_pi * kappa) + std::log(sum);
}

double pdf(const AngleDistribution& dist, double theta) {
    theta = wrap_angle(theta);
    if (dist.is_mvf())
        return mvf_density(dist.mvf(), theta);
    const auto& pmf = dist.pmf();
    return pmf.probabilities[pmf_bin(pmf, theta)] / pmf_bin_width(pmf);
}

double cdf(const AngleDistribution& dist, double theta) {
    if (theta <= 0)
        return 0;
    if (theta >= two_pi)
        return 1;
    if (!dist.is_mvf())
        return pmf_cdf(dist.pmf(), theta);
    const auto grid = tabulate(dist);
    const double step = two_pi / double(dist.grid_size());
    const double pos = theta / step;
    const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(pos), dist.grid_size() - 1);
    const double frac = pos - double(i);
    return (1 - frac) * grid.cumulative(i) + frac * grid.cumulative(i + 1);
}

DistributionGrid tabulate(const AngleDistribution& dist) {
    const int g = dist.grid_size();
    const double step = two_pi / double(g);
    DistributionGrid out{Eigen::VectorXd(g + 1), Eigen::VectorXd(g + 1), Eigen::VectorXd(g + 1),
                         Eigen::VectorXd(g + 1)};
    for (int i = 0; i <= g; ++i)
        out.theta(i) = double(i) * step;

    if (!dist.is_mvf()) {
        const auto& pmf = dist.pmf();
        for (int i = 0; i <= g; ++i) {
            const double t = out.theta(i);
            out.density(i) = pmf.probabilities[pmf_bin(pmf, t)] / pmf_bin_width(pmf);
            out.cumulative(i) = pmf_cdf(pmf, t);
            out.survival(i) = pmf_survival(pmf, t);
        }
        return out;
    }

    for (int i = 0; i <= g; ++i)
        out.density(i) = mvf_density(dist.mvf(), out.theta(i));
    out.cumulative(0) = 0;
    for (int i = 1; i <= g; ++i)
        out.cumulative(i) = out.cumulative(i - 1) + 0.5 * step * (out.density(i - 1) + out.density(i));
    out.survival(g) = 0;
    for (int i = g; i-- > 0;)
        out.survival(i) = out.survival(i + 1) + 0.5 * step * (out.density(i) + out.density(i + 1));
    const double total = out.cumulative(g);
    out.cumulative /= total;
    out.survival /= total;
    out.cumulative(g) = 1;
    out.survival(0) = 1;
    return out;
}

double grid_integral(const Eigen::VectorXd& values, double step) {
    const Eigen::Index m = values.size();
    if (m < 2)
        return 0;
    return step * (values.sum() - 0.5 * (values(0) + values(m - 1)));
}

Eigen::VectorXd order_stat_pdf(const AngleDistribution& dist, int k, int n) {
    check_order_args(k, n);
    const auto grid = tabulate(dist);
    const auto logs = log_tables(grid);
    const double a = double(k - 1), b = double(n - k);
    const double log_c = log_binomial_factor(k, n);
    const Eigen::Index m = grid.theta.size();
    Eigen::VectorXd out(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double e = log_c + order_stat_log_kernel(a, b, logs.log_f(i), logs.log_cdf(i), logs.log_surv(i));
        out(i) = std::exp(e);
    }
    const double mass = grid_integral(out, two_pi / double(dist.grid_size()));
    if (!(mass > 0) || !std::isfinite(mass)) {
        // Far tails of large-N statistics underflow even in the log domain;
        // shift by the peak before exponentiating.
        double peak = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < m; ++i)
            peak = std::max(peak, order_stat_log_kernel(a, b, logs.log_f(i), logs.log_cdf(i), logs.log_surv(i)));
        if (!std::isfinite(peak))
            throw NumericalError("order statistic density vanishes on the grid", k);
        for (Eigen::Index i = 0; i < m; ++i)
            out(i) = std::exp(order_stat_log_kernel(a, b, logs.log_f(i), logs.log_cdf(i), logs.log_surv(i)) - peak);
        return out / grid_integral(out, two_pi / double(dist.grid_size()));
    }
    return out / mass;
}

double order_stat_mean(const AngleDistribution& dist, int k, int n) {
    check_order_args(k, n);
    const auto grid = tabulate(dist);
    return order_stat_mean_from(grid, log_tables(grid), k, n);
}

std::vector<double> order_stat_means(const DistributionGrid& grid, int n) {
    check_order_args(1, n);
    const auto logs = log_tables(grid);
    std::vector<double> means(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k)
        means[static_cast<std::size_t>(k - 1)] = order_stat_mean_from(grid, logs, k, n);
    return means;
}

std::vector<double> order_stat_means(const AngleDistribution& dist, int n) {
    return order_stat_means(tabulate(dist), n);
}

std::vector<double> sample_angles(const AngleDistribution& dist, int n, std::uint64_t seed) {
    if (n < 1)
        throw InvalidInput("sample_angles needs N >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> out(static_cast<std::size_t>(n));

    if (!dist.is_mvf()) {
        const auto& p = dist.pmf().probabilities;
        std::vector<double> cum(p.size() + 1, 0.0);
        for (std::size_t l = 0; l < p.size(); ++l)
            cum[l + 1] = cum[l] + p[l];
        const double width = two_pi / double(p.size());
        for (auto& theta : out) {
            const double u = unit(rng) * cum.back();
            auto it = std::upper_bound(cum.begin() + 1, cum.end(), u);
            if (it == cum.end())
                --it;
            const auto l = static_cast<std::size_t>(it - cum.begin() - 1);
            const double frac = p[l] > 0 ? (u - cum[l]) / p[l] : 0.0;
            theta = wrap_angle((double(l) + std::clamp(frac, 0.0, 1.0)) * width);
        }
        return out;
    }

    const auto grid = tabulate(dist);
    const auto* begin = grid.cumulative.data();
    const auto* end = begin + grid.cumulative.size();
    for (auto& theta : out) {
        const double u = unit(rng);
        auto hi = static_cast<Eigen::Index>(std::upper_bound(begin, end, u) - begin);
        hi = std::clamp<Eigen::Index>(hi, 1, grid.cumulative.size() - 1);
        const Eigen::Index lo = hi - 1;
        const double span = grid.cumulative(hi) - grid.cumulative(lo);
        const double frac = span > 0 ? (u - grid.cumulative(lo)) / span : 0.0;
        theta = wrap_angle(grid.theta(lo) + frac * (grid.theta(hi) - grid.theta(lo)));
    }
    return out;
}

std::string serialize(const AngleDistribution& dist) {
    KeyValues kv;
    kv.set("grid_size", std::to_string(dist.grid_size()));
    if (dist.is_mvf()) {
        const auto& comps = dist.mvf().components;
        kv.set("model", "mvf");
        kv.set("count", std::to_string(comps.size()));
        for (std::size_t l = 0; l < comps.size(); ++l) {
            kv.set("weight_" + std::to_string(l), io::format_double(comps[l].weight));
            kv.set("mean_" + std::to_string(l), io::format_double(comps[l].mean));
            kv.set("concentration_" + std::to_string(l), io::format_double(comps[l].concentration));
        }
    } else {
        const auto& p = dist.pmf().probabilities;
        kv.set("model", "pmf");
        kv.set("count", std::to_string(p.size()));
        for (std::size_t l = 0; l < p.size(); ++l)
            kv.set("probability_" + std::to_string(l), io::format_double(p[l]));
    }
    return kv.to_string();
}

AngleDistribution parse_distribution(const std::string& text) {
    const auto kv = KeyValues::parse(text);
    const std::string model = kv.get("model");
    const auto count = kv.get_int("count");
    const auto grid = static_cast<int>(kv.get_int_or("grid_size", AngleDistribution::default_grid_size));
    if (count < 1)
        throw InvalidInput("distribution count must be >= 1");
    if (model == "mvf") {
        MvfParams mvf;
        for (long long l = 0; l < count; ++l) {
            const std::string s = std::to_string(l);
            mvf.components.push_back(
                {kv.get_double("weight_" + s), kv.get_double("mean_" + s), kv.get_double("concentration_" + s)});
        }
        return AngleDistribution(std::move(mvf), grid);
    }
    if (model == "pmf") {
        PmfParams pmf;
        for (long long l = 0; l < count; ++l)
            pmf.probabilities.push_back(kv.get_double("probability_" + std::to_string(l)));
        return AngleDistribution(std::move(pmf), grid);
    }
    throw InvalidInput("unknown distribution model '" + model + "'");
}

void save_distribution(const std::filesystem::path& path, const AngleDistribution& dist) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << serialize(dist);
    if (!out)
        throw IoError("write failed: " + path.string());
}

AngleDistribution load_distribution(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_distribution(buffer.str());
    } catch (const InvalidInput& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

PmfParams aggregate_pairs(const PmfParams& pmf) {
    if (pmf.probabilities.size() % 2 != 0)
        throw InvalidInput("pairwise aggregation needs an even bin count");
    PmfParams out;
    for (std::size_t l = 0; l < pmf.probabilities.size(); l += 2)
        out.probabilities.push_back(pmf.probabilities[l] + pmf.probabilities[l + 1]);
    return out;
}

} // namespace uvt
