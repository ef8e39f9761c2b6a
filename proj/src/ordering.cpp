#include "uvt/ordering.hpp"

#include <algorithm>
#include <numbers>

namespace uvt {

namespace {

Eigen::MatrixXd squared_distances(const Sinogram& sinogram) {
    const Eigen::MatrixXd& y = sinogram.samples;
    const Eigen::VectorXd norms = y.rowwise().squaredNorm();
    Eigen::MatrixXd d = -2.0 * (y * y.transpose());
    d.colwise() += norms;
    d.rowwise() += norms.transpose();
    d = d.cwiseMax(0.0);
    d.diagonal().setZero();
    // symmetrize away rounding differences between (i, j) and (j, i)
    return 0.5 * (d + d.transpose());
}

void require_three(const Sinogram& sinogram) {
    validate(sinogram);
    if (sinogram.count() < 3)
        throw InvalidInput("ordering needs at least 3 projections");
}

double median_off_diagonal(const Eigen::MatrixXd& d) {
    const Index n = d.rows();
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
            values.push_back(d(i, j));
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

Eigen::MatrixXd affinity_from(const Eigen::MatrixXd& d2, std::optional<double> scale) {
    const double eps = scale ? *scale : median_off_diagonal(d2);
    if (!(eps > 0) || !std::isfinite(eps))
        throw DegenerateInput("affinity scale is zero: projections are (nearly) all identical");
    Eigen::MatrixXd w = (-d2 / eps).array().exp().matrix();
    w.diagonal().setOnes();
    return w;
}

Eigen::MatrixXd knn_affinity_from(const Eigen::MatrixXd& d2, int neighbors, std::optional<double> scale) {
    const Index n = d2.rows();
    if (neighbors < 1 || neighbors >= n)
        throw InvalidInput("neighbour count must lie in [1, N-1]");
    const auto k = static_cast<std::size_t>(neighbors);
    std::vector<std::vector<Index>> nearest(static_cast<std::size_t>(n));
    Eigen::VectorXd sigma(n);
    std::vector<std::pair<double, Index>> row;
    for (Index i = 0; i < n; ++i) {
        row.clear();
        for (Index j = 0; j < n; ++j)
            if (j != i)
                row.emplace_back(d2(i, j), j);
        // ties broken by index
        std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end());
        sigma(i) = std::sqrt(row[k - 1].first);
        for (std::size_t q = 0; q < k; ++q)
            nearest[static_cast<std::size_t>(i)].push_back(row[q].second);
    }
    if (scale && !(*scale > 0))
        throw InvalidInput("affinity scale must be positive");
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j : nearest[static_cast<std::size_t>(i)]) {
            const double eps = scale ? *scale : sigma(i) * sigma(j);
            const double v = eps > 0 ? std::exp(-d2(i, j) / eps) : 1.0;
            w(i, j) = w(j, i) = std::max(w(i, j), v);
        }
    w.diagonal().setOnes();
    return w;
}

} // namespace

double median_squared_distance(const Sinogram& sinogram) {
    require_three(sinogram);
    return median_off_diagonal(squared_distances(sinogram));
}

Eigen::MatrixXd build_affinity(const Sinogram& sinogram, std::optional<double> scale) {
    require_three(sinogram);
    return affinity_from(squared_distances(sinogram), scale);
}

Eigen::MatrixXd build_knn_affinity(const Sinogram& sinogram, int neighbors, std::optional<double> scale) {
    require_three(sinogram);
    return knn_affinity_from(squared_distances(sinogram), neighbors, scale);
}

Eigen::MatrixXd normalized_laplacian(const Eigen::MatrixXd& affinity) {
    const Eigen::VectorXd inv_sqrt_deg = affinity.rowwise().sum().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd l = -(inv_sqrt_deg.asDiagonal() * affinity * inv_sqrt_deg.asDiagonal());
    l.diagonal().array() += 1.0;
    return 0.5 * (l + l.transpose());
}

OrderingResult laplacian_eigenmap_order(const Sinogram& sinogram, const OrderingConfig& cfg) {
    require_three(sinogram);
    const Eigen::MatrixXd d2 = squared_distances(sinogram);
    if (d2.maxCoeff() <= 0)
        throw DegenerateInput("all projections are identical; no angular order exists");
    const Eigen::MatrixXd l = normalized_laplacian(cfg.neighbors > 0 ? knn_affinity_from(d2, cfg.neighbors, cfg.scale)
                                                                      : affinity_from(d2, cfg.scale));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l);
    if (solver.info() != Eigen::Success)
        throw DegenerateInput("Laplacian eigen-decomposition failed");

    const Index n = sinogram.count();
    OrderingResult out;
    out.eigenvalues = solver.eigenvalues().head(3);
    out.eigen_coords.resize(n, 2);
    out.eigen_coords.col(0) = solver.eigenvectors().col(1);
    out.eigen_coords.col(1) = solver.eigenvectors().col(2);
    out.placeholder_angles.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        out.placeholder_angles[static_cast<std::size_t>(i)] =
            wrap_angle(std::atan2(out.eigen_coords(i, 0), out.eigen_coords(i, 1)));

    out.permutation.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        out.permutation[static_cast<std::size_t>(i)] = i;
    std::stable_sort(out.permutation.begin(), out.permutation.end(), [&](Index a, Index b) {
        return out.placeholder_angles[static_cast<std::size_t>(a)] < out.placeholder_angles[static_cast<std::size_t>(b)];
    });
    return out;
}

} // namespace uvt
