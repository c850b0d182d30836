#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace isv {

/// One region's descriptors across the images of a set: a G x l matrix whose
/// columns follow image order.
using LocalMode = Eigen::MatrixXd;

/// Column-orthonormal basis of a linear subspace.
struct Subspace {
    Eigen::MatrixXd basis;
    int rank() const { return static_cast<int>(basis.cols()); }
};

/// Ascending angles in [0, pi/2].
using PrincipalAngles = std::vector<double>;

/// Left singular vectors whose singular value exceeds rank_tol times the
/// largest one. The mode is not mean-centred. Throws on an all-zero mode.
Subspace orthonormal_basis(const LocalMode& mode, double rank_tol = 1e-10);

/// min(r1, r2) angles whose cosines are the singular values of O1^T O2
/// (clamped into [0, 1]). Angles below pi/4 are recovered from their sines
/// for accuracy, so identical subspaces give angles of order 1e-16.
PrincipalAngles principal_angles(const Subspace& a, const Subspace& b);

/// Sum of squared principal angles (Grassmannian arc length).
double geodesic_distance(const PrincipalAngles& angles);

/// sqrt(1 - prod cos^2 theta_i).
double binet_cauchy_distance(const PrincipalAngles& angles);

/// Symmetric Hausdorff distance between the column sets, Euclidean norm.
double hausdorff_distance(const LocalMode& a, const LocalMode& b);

/// Mean over columns of `a` of the distance to the nearest column of `b`.
double directed_mean_distance(const LocalMode& a, const LocalMode& b);

/// max(d_M(A, B), d_M(B, A)).
double modified_hausdorff_distance(const LocalMode& a, const LocalMode& b);

enum class Metric { geodesic, binet_cauchy, hausdorff, modified_hausdorff };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

using MetricSuite = std::vector<Metric>;

/// geodesic, binet_cauchy, hausdorff, mhd.
MetricSuite default_metric_suite();
std::string suite_id(const MetricSuite& suite);

inline bool is_subspace_metric(Metric m) {
    return m == Metric::geodesic || m == Metric::binet_cauchy;
}

}  // namespace isv
