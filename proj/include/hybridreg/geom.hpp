#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "hybridreg/errors.hpp"

namespace hybridreg::geom {

using Eigen::Matrix3d;
using Eigen::Vector3d;

enum class MotionLabel : std::uint8_t {
    Background = 0,
    RigidForeground = 1,
    NonRigidForeground = 2,
};

/// SE(3) transform stored as an explicit rotation matrix + translation.
/// The matrix form is what the evaluation metrics operate on directly.
struct RigidTransform {
    Matrix3d rotation = Matrix3d::Identity();
    Vector3d translation = Vector3d::Zero();

    static RigidTransform identity() { return {}; }
    static RigidTransform from_axis_angle(const Vector3d& axis, double angle_rad,
                                          const Vector3d& t = Vector3d::Zero());
    static RigidTransform rot_z(double angle_rad, const Vector3d& t = Vector3d::Zero());
};

/// True when R is orthonormal with det +1 within tol (per-entry).
bool is_rotation(const Matrix3d& r, double tol = 1e-9);

/// Applies b, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

RigidTransform inverse(const RigidTransform& t);

inline Vector3d apply(const RigidTransform& t, const Vector3d& p) {
    return t.rotation * p + t.translation;
}

struct PointCloud {
    std::vector<Vector3d> points;
    std::vector<MotionLabel> labels;
    // Flat pixel index (y*width + x) in the generating camera grid, or -1.
    // Empty for clouds that did not come from a render.
    std::vector<std::int32_t> source_pixel;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

struct SuperpointGraph {
    std::vector<Vector3d> superpoints;
    std::vector<int> assignment;             // dense point -> superpoint index
    std::vector<std::vector<int>> patch;     // superpoint -> dense point indices

    std::size_t size() const { return superpoints.size(); }
};

/// Rigid transform minimizing sum_i w_i |T(src_i) - tgt_i|^2, via SVD of the
/// weighted cross-covariance with the reflection-corrected last singular
/// vector (det forced to +1).
/// Throws DegenerateConfiguration for <3 effective points or a collinear /
/// coincident configuration.
RigidTransform weighted_kabsch(const std::vector<Vector3d>& src,
                               const std::vector<Vector3d>& tgt,
                               const std::vector<double>& weights);

/// Superpoints are centroids of occupied voxels; every dense point is then
/// assigned to its nearest superpoint (ties to the lower index), so the
/// patches partition the dense indices and reassignment is idempotent.
SuperpointGraph voxel_downsample(const PointCloud& cloud, double voxel);

/// Exact k nearest neighbors, ascending distance, ties by lower index.
std::vector<int> knn(const Vector3d& query, const std::vector<Vector3d>& cloud, int k);

/// Uniform-grid index over a fixed point set for exact neighbor queries.
/// Cell size should be on the order of the expected query radius.
class GridIndex {
public:
    GridIndex(const std::vector<Vector3d>& points, double cell);

    /// Exact kNN with the same ordering contract as geom::knn.
    std::vector<int> knn(const Vector3d& query, int k) const;

    /// Indices of all points within radius (inclusive), ascending index.
    std::vector<int> radius(const Vector3d& query, double r) const;

    /// Index of the nearest point, or -1 for an empty set.
    int nearest(const Vector3d& query) const;

private:
    struct CellKey {
        std::int64_t x, y, z;
        bool operator==(const CellKey&) const = default;
    };
    struct CellHash {
        std::size_t operator()(const CellKey& k) const;
    };

    CellKey key_of(const Vector3d& p) const;

    const std::vector<Vector3d>& points_;
    double cell_;
    std::unordered_map<CellKey, std::vector<int>, CellHash> cells_;
};

}  // namespace hybridreg::geom
