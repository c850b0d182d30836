#include "isv/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "isv/error.hpp"

namespace isv {

Subspace orthonormal_basis(const LocalMode& mode, double rank_tol) {
    if (mode.cols() < 1 || mode.rows() < 1) throw Error("empty local mode");
    if (!mode.allFinite()) throw Error("local mode contains non-finite values");
    if (mode.isZero(0.0)) throw Error("all-zero local mode has no subspace");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mode, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double cutoff = rank_tol * sv(0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cutoff) ++rank;
    return {svd.matrixU().leftCols(rank)};
}

PrincipalAngles principal_angles(const Subspace& a, const Subspace& b) {
    if (a.basis.rows() != b.basis.rows())
        throw Error("subspaces live in different ambient dimensions (" + std::to_string(a.basis.rows()) +
                    " vs " + std::to_string(b.basis.rows()) + ")");
    if (a.rank() < 1 || b.rank() < 1) throw Error("principal angles of an empty subspace");

    // Cosines are the singular values of O1^T O2. arccos loses accuracy near
    // zero angle, so angles with cos^2 >= 1/2 are taken from the sines instead:
    // the singular values of the part of the lower-rank basis orthogonal to
    // the other subspace.
    const Subspace& wide = a.rank() >= b.rank() ? a : b;
    const Subspace& narrow = a.rank() >= b.rank() ? b : a;
    const Eigen::MatrixXd cross = wide.basis.transpose() * narrow.basis;
    const Eigen::VectorXd cosines = Eigen::JacobiSVD<Eigen::MatrixXd>(cross).singularValues();  // descending
    const Eigen::MatrixXd residual = narrow.basis - wide.basis * cross;
    const Eigen::VectorXd sines = Eigen::JacobiSVD<Eigen::MatrixXd>(residual).singularValues();  // descending

    const auto r = cosines.size();
    PrincipalAngles angles(static_cast<std::size_t>(r));
    for (Eigen::Index i = 0; i < r; ++i) {
        const double c = std::clamp(cosines(i), 0.0, 1.0);
        const double s = std::clamp(sines(r - 1 - i), 0.0, 1.0);
        angles[i] = c * c < 0.5 ? std::acos(c) : std::asin(s);
    }
    std::sort(angles.begin(), angles.end());
    return angles;
}

double geodesic_distance(const PrincipalAngles& angles) {
    double sum = 0.0;
    for (double t : angles) sum += t * t;
    return sum;
}

double binet_cauchy_distance(const PrincipalAngles& angles) {
    double prod = 1.0;
    for (double t : angles) {
        const double c = std::cos(t);
        prod *= c * c;
    }
    return std::sqrt(std::clamp(1.0 - prod, 0.0, 1.0));
}

namespace {

void check_same_dim(const LocalMode& a, const LocalMode& b) {
    if (a.rows() != b.rows())
        throw Error("local modes have different descriptor dimensions (" + std::to_string(a.rows()) +
                    " vs " + std::to_string(b.rows()) + ")");
    if (a.cols() < 1 || b.cols() < 1) throw Error("local mode has no columns");
}

// Plain sequential sum so results are reproducible independent of SIMD width.
double euclidean(const LocalMode& a, Eigen::Index i, const LocalMode& b, Eigen::Index j) {
    double sum = 0.0;
    for (Eigen::Index d = 0; d < a.rows(); ++d) {
        const double diff = a(d, i) - b(d, j);
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

// Distance from each column of a to its nearest column of b.
std::vector<double> nearest_distances(const LocalMode& a, const LocalMode& b) {
    std::vector<double> out(static_cast<std::size_t>(a.cols()));
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
        double best = euclidean(a, i, b, 0);
        for (Eigen::Index j = 1; j < b.cols(); ++j) best = std::min(best, euclidean(a, i, b, j));
        out[i] = best;
    }
    return out;
}

}  // namespace

double hausdorff_distance(const LocalMode& a, const LocalMode& b) {
    check_same_dim(a, b);
    const auto ab = nearest_distances(a, b);
    const auto ba = nearest_distances(b, a);
    return std::max(*std::max_element(ab.begin(), ab.end()), *std::max_element(ba.begin(), ba.end()));
}

double directed_mean_distance(const LocalMode& a, const LocalMode& b) {
    check_same_dim(a, b);
    const auto d = nearest_distances(a, b);
    double sum = 0.0;
    for (double v : d) sum += v;
    return sum / static_cast<double>(d.size());
}

double modified_hausdorff_distance(const LocalMode& a, const LocalMode& b) {
    return std::max(directed_mean_distance(a, b), directed_mean_distance(b, a));
}

std::string_view to_string(Metric metric) {
    switch (metric) {
        case Metric::geodesic: return "geodesic";
        case Metric::binet_cauchy: return "binet_cauchy";
        case Metric::hausdorff: return "hausdorff";
        case Metric::modified_hausdorff: return "mhd";
    }
    return "?";
}

Metric parse_metric(std::string_view name) {
    for (auto m : {Metric::geodesic, Metric::binet_cauchy, Metric::hausdorff, Metric::modified_hausdorff})
        if (to_string(m) == name) return m;
    throw Error("unknown metric '" + std::string(name) + "'");
}

MetricSuite default_metric_suite() {
    return {Metric::geodesic, Metric::binet_cauchy, Metric::hausdorff, Metric::modified_hausdorff};
}

std::string suite_id(const MetricSuite& suite) {
    std::string id;
    for (auto m : suite) {
        if (!id.empty()) id += ',';
        id += to_string(m);
    }
    return id;
}

}  // namespace isv
