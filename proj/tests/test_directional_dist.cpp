#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "uvt/directional_dist.hpp"
#include "uvt/errors.hpp"

using namespace uvt;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

AngleDistribution two_vm() {
    return AngleDistribution(MvfParams{{{0.3, 1.0, 4.0}, {0.7, 4.0, 1.5}}});
}

AngleDistribution three_bin() { return AngleDistribution(PmfParams{{0.5, 0.2, 0.3}}); }

} // namespace

TEST_CASE("log I0 matches the standard library") {
    for (double k : {0.0, 1e-3, 0.5, 3.0, 19.9, 20.1, 49.0}) {
        const double expected = std::log(std::cyl_bessel_i(0.0, k));
        CHECK(log_bessel_i0(k) == doctest::Approx(expected).epsilon(1e-12));
    }
    // far beyond the double range of I0 itself
    CHECK(log_bessel_i0(1000.0) == doctest::Approx(1000.0 - 0.5 * std::log(two_pi * 1000.0)).epsilon(1e-6));
}

TEST_CASE("densities integrate to one and CDFs are monotone") {
    for (const auto& dist : {two_vm(), three_bin(), AngleDistribution::uniform()}) {
        const auto grid = tabulate(dist);
        // bin edges off the grid nodes cost the trapezoid rule O(h)
        const double tol = dist.is_mvf() ? 1e-6 : 1e-4;
        CHECK(std::abs(grid_integral(grid.density, two_pi / dist.grid_size()) - 1.0) < tol);
        CHECK(grid.cumulative(0) == 0.0);
        CHECK(grid.cumulative(grid.cumulative.size() - 1) == doctest::Approx(1.0));
        for (Eigen::Index i = 1; i < grid.cumulative.size(); ++i)
            CHECK(grid.cumulative(i) >= grid.cumulative(i - 1));
        CHECK((grid.cumulative + grid.survival).isApproxToConstant(1.0, 1e-12));
    }
}

TEST_CASE("von Mises density at its mode") {
    const AngleDistribution vm(MvfParams{{{1.0, 2.0, 3.0}}});
    CHECK(pdf(vm, 2.0) == doctest::Approx(std::exp(3.0) / (two_pi * std::cyl_bessel_i(0.0, 3.0))));
    CHECK(pdf(vm, 2.0 + two_pi) == doctest::Approx(pdf(vm, 2.0)));
}

TEST_CASE("PMF density and CDF are piecewise") {
    const auto d = three_bin();
    const double w = two_pi / 3.0;
    CHECK(pdf(d, 0.5 * w) == doctest::Approx(0.5 / w));
    CHECK(pdf(d, 2.5 * w) == doctest::Approx(0.3 / w));
    CHECK(cdf(d, w) == doctest::Approx(0.5));
    CHECK(cdf(d, 1.5 * w) == doctest::Approx(0.6));
}

TEST_CASE("uniform order-statistic means have the closed form") {
    const auto uni = AngleDistribution::uniform();
    for (int n : {10, 100}) {
        const auto means = order_stat_means(uni, n);
        REQUIRE(means.size() == static_cast<std::size_t>(n));
        for (int k = 1; k <= n; ++k)
            CHECK(std::abs(means[static_cast<std::size_t>(k - 1)] - two_pi * k / (n + 1)) < 1e-4);
    }
    CHECK(std::abs(order_stat_mean(uni, 3, 7) - two_pi * 3 / 8) < 1e-4);
}

TEST_CASE("order-statistic density of a uniform is the scaled Beta") {
    const auto uni = AngleDistribution::uniform(1024);
    const int n = 5, k = 2;
    const auto f = order_stat_pdf(uni, k, n);
    // Beta(k, n-k+1) on [0, 2pi): n!/((k-1)!(n-k)!) u^{k-1} (1-u)^{n-k} / (2pi)
    for (int i : {100, 300, 700}) {
        const double u = double(i) / 1024.0;
        const double expected = 20.0 * u * std::pow(1.0 - u, 3) / two_pi;
        CHECK(f(i) == doctest::Approx(expected).epsilon(1e-3));
    }
}

TEST_CASE("order-statistic means are increasing and match Monte Carlo") {
    const auto d = two_vm();
    const int n = 20;
    const auto means = order_stat_means(d, n);
    CHECK(std::is_sorted(means.begin(), means.end()));
    std::vector<double> mc(static_cast<std::size_t>(n), 0.0);
    const int reps = 4000;
    for (int r = 0; r < reps; ++r) {
        auto s = sample_angles(d, n, 1000 + static_cast<std::uint64_t>(r));
        std::sort(s.begin(), s.end());
        for (int k = 0; k < n; ++k)
            mc[static_cast<std::size_t>(k)] += s[static_cast<std::size_t>(k)] / reps;
    }
    for (int k = 0; k < n; ++k)
        CHECK(means[static_cast<std::size_t>(k)] == doctest::Approx(mc[static_cast<std::size_t>(k)]).epsilon(0.03));
}

TEST_CASE("samples pass a Kolmogorov-Smirnov check") {
    for (const auto& d : {two_vm(), three_bin()}) {
        auto s = sample_angles(d, 20000, 7);
        std::sort(s.begin(), s.end());
        double ks = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double f = cdf(d, s[i]);
            ks = std::max({ks, std::abs(f - double(i) / s.size()), std::abs(f - double(i + 1) / s.size())});
        }
        // 1% critical value 1.63 / sqrt(n)
        CHECK(ks < 1.63 / std::sqrt(20000.0));
        CHECK(s.front() >= 0.0);
        CHECK(s.back() < two_pi);
    }
    CHECK(sample_angles(two_vm(), 50, 3) == sample_angles(two_vm(), 50, 3));
    CHECK(sample_angles(two_vm(), 50, 3) != sample_angles(two_vm(), 50, 4));
}

TEST_CASE("serialization round-trips exactly") {
    for (const auto& d : {two_vm(), three_bin()}) {
        const auto back = parse_distribution(serialize(d));
        CHECK(serialize(back) == serialize(d));
        CHECK(back.grid_size() == d.grid_size());
    }
    const AngleDistribution odd(MvfParams{{{1.0, 0.1 + 0.2, 1.0 / 3.0}}});
    CHECK(parse_distribution(serialize(odd)).mvf().components[0].concentration == 1.0 / 3.0);
}

TEST_CASE("adjacent PMF bins aggregate") {
    const auto agg = aggregate_pairs(PmfParams{{0.1, 0.2, 0.3, 0.4}});
    REQUIRE(agg.probabilities.size() == 2);
    CHECK(agg.probabilities[0] == doctest::Approx(0.3));
    CHECK(agg.probabilities[1] == doctest::Approx(0.7));
    CHECK_THROWS_AS((void)aggregate_pairs(PmfParams{{0.5, 0.2, 0.3}}), InvalidInput);
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(AngleDistribution(PmfParams{{0.5, 0.6}}), InvalidInput);
    CHECK_THROWS_AS(AngleDistribution(PmfParams{{1.2, -0.2}}), InvalidInput);
    CHECK_THROWS_AS(AngleDistribution(MvfParams{{{1.0, 0.0, -1.0}}}), InvalidInput);
    CHECK_THROWS_AS(AngleDistribution(MvfParams{}), InvalidInput);
    CHECK_THROWS_AS(AngleDistribution(PmfParams{{1.0}}, 255), InvalidInput);
    CHECK_THROWS_AS((void)order_stat_mean(two_vm(), 0, 5), InvalidInput);
    CHECK_THROWS_AS((void)order_stat_mean(two_vm(), 6, 5), InvalidInput);
    CHECK_THROWS_AS((void)parse_distribution("model = cauchy\n"), std::exception);
}

TEST_CASE("single-component limits and symmetries") {
    const AngleDistribution flat(MvfParams{{{1.0, 1.2, 0.0}}});
    for (double t : {0.0, 1.0, 3.0, 6.0})
        CHECK(pdf(flat, t) == doctest::Approx(1.0 / two_pi).epsilon(1e-12));
    CHECK(std::abs(cdf(flat, std::numbers::pi) - 0.5) < 1e-9);
    const AngleDistribution vm(MvfParams{{{1.0, 2.0, 6.0}}});
    for (double d : {0.1, 0.8, 2.5})
        CHECK(std::abs(pdf(vm, 2.0 + d) - pdf(vm, 2.0 - d)) < 1e-12);
    CHECK(std::abs(cdf(vm, two_pi) - 1.0) < 1e-6);
    const AngleDistribution first(PmfParams{{1.0, 0.0, 0.0, 0.0}});
    CHECK(std::abs(cdf(first, two_pi / 4) - 1.0) < 1e-12);
}

TEST_CASE("order-statistic density edge cases") {
    const auto d = two_vm();
    const auto grid = tabulate(d);
    const auto f1 = order_stat_pdf(d, 1, 1);
    CHECK((f1 - grid.density).cwiseAbs().maxCoeff() < 1e-10);
    const double h = two_pi / d.grid_size();
    CHECK(std::abs(grid_integral(order_stat_pdf(d, 2500, 5000), h) - 1.0) < 1e-6);

    const auto uni = AngleDistribution::uniform();
    const auto f = order_stat_pdf(uni, 2, 3);
    const int g = uni.grid_size();
    // 6 u (1 - u) / (2 pi) at u = 1/4 and 1/2
    CHECK(std::abs(f(g / 4) - 9.0 / (16.0 * std::numbers::pi)) < 1e-6);
    CHECK(std::abs(f(g / 2) - 3.0 / (4.0 * std::numbers::pi)) < 1e-6);

    // f_(1) = f, so the single mean is the naive grid mean of theta
    const Eigen::VectorXd weighted = grid.theta.cwiseProduct(grid.density);
    CHECK(std::abs(order_stat_mean(d, 1, 1) - grid_integral(weighted, h)) < 1e-6);
    const auto means = order_stat_means(d, 100);
    for (std::size_t k = 1; k < means.size(); ++k)
        CHECK(means[k] > means[k - 1]);
}

TEST_CASE("uniform order-statistic means to 1e-4") {
    const auto uni = AngleDistribution::uniform();
    for (int n : {10, 100, 1000}) {
        const auto means = order_stat_means(uni, n);
        double worst = 0.0;
        for (int k = 1; k <= n; ++k)
            worst = std::max(worst, std::abs(means[static_cast<std::size_t>(k - 1)] - two_pi * k / (n + 1)));
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("large uniform sample and single-bin support") {
    auto s = sample_angles(AngleDistribution::uniform(), 100000, 21);
    std::sort(s.begin(), s.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = s[i] / two_pi;
        ks = std::max({ks, std::abs(f - double(i) / s.size()), std::abs(f - double(i + 1) / s.size())});
    }
    CHECK(ks < 0.01);
    const AngleDistribution third(PmfParams{{0.0, 0.0, 1.0, 0.0, 0.0}});
    for (double t : sample_angles(third, 2000, 4)) {
        CHECK(t >= 2.0 * two_pi / 5);
        CHECK(t < 3.0 * two_pi / 5);
    }
}
