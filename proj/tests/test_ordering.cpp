#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <doctest.h>

#include "uvt/errors.hpp"
#include "uvt/metrics.hpp"
#include "uvt/ordering.hpp"

using namespace uvt;

namespace {

// Points on a closed curve in R^4, shuffled angles.
Sinogram curve(int n, std::vector<double>& angles) {
    std::mt19937_64 rng(5);
    angles.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        angles[static_cast<std::size_t>(i)] = 2.0 * std::numbers::pi * i / n;
    std::shuffle(angles.begin(), angles.end(), rng);
    Sinogram s(n, 4);
    for (int i = 0; i < n; ++i) {
        const double t = angles[static_cast<std::size_t>(i)];
        s.samples.row(i) << std::cos(t), std::sin(t), 0.3 * std::cos(2 * t), 0.2 * std::sin(3 * t);
    }
    return s;
}

} // namespace

TEST_CASE("affinity kernel") {
    Sinogram s(3, 2);
    s.samples << 0, 0, 1, 0, 0, 2;
    // squared distances 1, 4, 5 -> median 4
    CHECK(median_squared_distance(s) == doctest::Approx(4.0));
    const auto w = build_affinity(s);
    CHECK(w(0, 0) == doctest::Approx(1.0));
    CHECK(w(0, 1) == doctest::Approx(std::exp(-0.25)));
    CHECK(w(1, 2) == doctest::Approx(std::exp(-1.25)));
    CHECK(w.isApprox(w.transpose()));
    const auto w2 = build_affinity(s, 1.0);
    CHECK(w2(0, 2) == doctest::Approx(std::exp(-4.0)));
}

TEST_CASE("k-nearest-neighbour affinity is sparse and symmetric") {
    std::vector<double> angles;
    const auto s = curve(40, angles);
    const auto w = build_knn_affinity(s, 3);
    CHECK(w.isApprox(w.transpose()));
    for (Index i = 0; i < w.rows(); ++i) {
        const auto nonzero = (w.row(i).array() > 0).count();
        CHECK(nonzero >= 4); // self plus at least its own 3 neighbours
        CHECK(nonzero <= 40);
    }
    CHECK_THROWS_AS((void)build_knn_affinity(s, 0), InvalidInput);
    CHECK_THROWS_AS((void)build_knn_affinity(s, 40), InvalidInput);
    CHECK_THROWS_AS((void)build_knn_affinity(s, 3, -1.0), InvalidInput);
}

TEST_CASE("normalized Laplacian has a null vector D^{1/2} 1") {
    std::vector<double> angles;
    const auto s = curve(30, angles);
    const auto w = build_affinity(s);
    const auto l = normalized_laplacian(w);
    const Eigen::VectorXd d = w.rowwise().sum().cwiseSqrt();
    CHECK((l * d).norm() < 1e-10 * d.norm());
    CHECK(l.isApprox(l.transpose()));
}

TEST_CASE("eigenmap recovers the order of a closed curve") {
    std::vector<double> angles;
    const auto s = curve(200, angles);
    for (int k : {0, 8}) {
        const auto r = laplacian_eigenmap_order(s, OrderingConfig{std::nullopt, k});
        REQUIRE(r.permutation.size() == 200);
        auto sorted = r.permutation;
        std::sort(sorted.begin(), sorted.end());
        for (Index i = 0; i < 200; ++i)
            CHECK(sorted[static_cast<std::size_t>(i)] == i);
        CHECK(ordering_concordance(r.permutation, angles) == 1.0);
        CHECK(r.eigen_coords.rows() == 200);
        CHECK(r.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-8));
        for (double b : r.placeholder_angles) {
            CHECK(b >= 0.0);
            CHECK(b < 2.0 * std::numbers::pi);
        }
    }
}

TEST_CASE("eigenmap on tomographic projections of an asymmetric phantom") {
    const int n = 300;
    std::vector<double> angles(n);
    for (int i = 0; i < n; ++i)
        angles[static_cast<std::size_t>(i)] = std::fmod(2.0 * std::numbers::pi * (0.618034 * i), 2.0 * std::numbers::pi);
    const auto sino = radon_forward(make_phantom(PhantomKind::SheppLoganAsymmetric, 64), std::span<const double>(angles), 64);
    const auto r = laplacian_eigenmap_order(sino);
    CHECK(ordering_concordance(r.permutation, angles) > 0.9);
}

TEST_CASE("degenerate inputs") {
    Sinogram same(10, 4);
    same.samples.setOnes();
    CHECK_THROWS_AS((void)laplacian_eigenmap_order(same), DegenerateInput);
    Sinogram tiny(2, 4);
    CHECK_THROWS_AS((void)laplacian_eigenmap_order(tiny), InvalidInput);
}
