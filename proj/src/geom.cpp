#include "hybridreg/geom.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace hybridreg::geom {

RigidTransform RigidTransform::from_axis_angle(const Vector3d& axis, double angle_rad,
                                               const Vector3d& t) {
    RigidTransform out;
    out.rotation = Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
    out.translation = t;
    return out;
}

RigidTransform RigidTransform::rot_z(double angle_rad, const Vector3d& t) {
    return from_axis_angle(Vector3d::UnitZ(), angle_rad, t);
}

bool is_rotation(const Matrix3d& r, double tol) {
    const Matrix3d delta = r.transpose() * r - Matrix3d::Identity();
    if (delta.cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(r.determinant() - 1.0) <= tol;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    RigidTransform out;
    out.rotation = a.rotation * b.rotation;
    out.translation = a.rotation * b.translation + a.translation;
    return out;
}

RigidTransform inverse(const RigidTransform& t) {
    RigidTransform out;
    out.rotation = t.rotation.transpose();
    out.translation = -(out.rotation * t.translation);
    return out;
}

RigidTransform weighted_kabsch(const std::vector<Vector3d>& src,
                               const std::vector<Vector3d>& tgt,
                               const std::vector<double>& weights) {
    if (src.size() != tgt.size() || src.size() != weights.size())
        throw ShapeMismatch("weighted_kabsch: src/tgt/weights sizes differ");

    double wsum = 0.0;
    int effective = 0;
    for (double w : weights) {
        if (w < 0.0) throw DegenerateConfiguration("weighted_kabsch: negative weight");
        if (w > 0.0) ++effective;
        wsum += w;
    }
    if (effective < 3 || wsum <= 0.0)
        throw DegenerateConfiguration("weighted_kabsch: fewer than 3 effective points");

    Vector3d src_mean = Vector3d::Zero();
    Vector3d tgt_mean = Vector3d::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const double w = weights[i] / wsum;
        src_mean += w * src[i];
        tgt_mean += w * tgt[i];
    }

    Matrix3d cross = Matrix3d::Zero();
    Matrix3d src_cov = Matrix3d::Zero();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const double w = weights[i] / wsum;
        const Vector3d dp = src[i] - src_mean;
        const Vector3d dq = tgt[i] - tgt_mean;
        cross += w * dq * dp.transpose();
        src_cov += w * dp * dp.transpose();
    }

    // Collinear or coincident source data leaves the fit underdetermined.
    Eigen::SelfAdjointEigenSolver<Matrix3d> es(src_cov);
    const Vector3d ev = es.eigenvalues();  // ascending
    if (ev[1] <= 1e-12 * std::max(ev[2], 1e-300))
        throw DegenerateConfiguration("weighted_kabsch: collinear or coincident points");

    Eigen::JacobiSVD<Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix3d u = svd.matrixU();
    const Matrix3d v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;

    RigidTransform out;
    out.rotation = u * v.transpose();
    out.translation = tgt_mean - out.rotation * src_mean;
    return out;
}

namespace {

std::int64_t voxel_coord(double x, double voxel) {
    return static_cast<std::int64_t>(std::floor(x / voxel));
}

}  // namespace

SuperpointGraph voxel_downsample(const PointCloud& cloud, double voxel) {
    if (cloud.empty()) throw EmptyCloud("voxel_downsample: empty cloud");
    if (!(voxel > 0.0)) throw UsageError("voxel_downsample: voxel size must be positive");

    // Ordered map keeps the superpoint order independent of hash layout.
    std::map<std::array<std::int64_t, 3>, std::pair<Vector3d, int>> voxels;
    for (const Vector3d& p : cloud.points) {
        const std::array<std::int64_t, 3> key = {voxel_coord(p.x(), voxel),
                                                 voxel_coord(p.y(), voxel),
                                                 voxel_coord(p.z(), voxel)};
        auto [it, fresh] = voxels.try_emplace(key, Vector3d::Zero(), 0);
        it->second.first += p;
        it->second.second += 1;
    }

    SuperpointGraph graph;
    graph.superpoints.reserve(voxels.size());
    for (const auto& [key, acc] : voxels)
        graph.superpoints.push_back(acc.first / static_cast<double>(acc.second));

    const GridIndex index(graph.superpoints, voxel);
    graph.assignment.resize(cloud.size());
    graph.patch.resize(graph.superpoints.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const int sp = index.nearest(cloud.points[i]);
        graph.assignment[i] = sp;
        graph.patch[sp].push_back(static_cast<int>(i));
    }
    return graph;
}

std::vector<int> knn(const Vector3d& query, const std::vector<Vector3d>& cloud, int k) {
    if (k < 0 || static_cast<std::size_t>(k) > cloud.size())
        throw KTooLarge("knn: k exceeds cloud size");
    std::vector<int> idx(cloud.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto closer = [&](int a, int b) {
        const double da = (cloud[a] - query).squaredNorm();
        const double db = (cloud[b] - query).squaredNorm();
        if (da != db) return da < db;
        return a < b;
    };
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), closer);
    idx.resize(k);
    return idx;
}

std::size_t GridIndex::CellHash::operator()(const CellKey& k) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::int64_t v : {k.x, k.y, k.z}) {
        h ^= static_cast<std::uint64_t>(v);
        h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
}

GridIndex::GridIndex(const std::vector<Vector3d>& points, double cell)
    : points_(points), cell_(cell > 0.0 ? cell : 1.0) {
    for (std::size_t i = 0; i < points.size(); ++i)
        cells_[key_of(points[i])].push_back(static_cast<int>(i));
}

GridIndex::CellKey GridIndex::key_of(const Vector3d& p) const {
    return {voxel_coord(p.x(), cell_), voxel_coord(p.y(), cell_), voxel_coord(p.z(), cell_)};
}

std::vector<int> GridIndex::knn(const Vector3d& query, int k) const {
    if (k < 0 || static_cast<std::size_t>(k) > points_.size())
        throw KTooLarge("GridIndex::knn: k exceeds point count");
    if (k == 0) return {};

    // Expand rings of cells until the k-th best distance is provably final.
    std::vector<std::pair<double, int>> best;  // (squared distance, index)
    const CellKey center = key_of(query);
    auto consider_ring = [&](std::int64_t ring) {
        for (std::int64_t dx = -ring; dx <= ring; ++dx)
            for (std::int64_t dy = -ring; dy <= ring; ++dy)
                for (std::int64_t dz = -ring; dz <= ring; ++dz) {
                    if (std::max({std::llabs(dx), std::llabs(dy), std::llabs(dz)}) != ring)
                        continue;
                    const auto it =
                        cells_.find(CellKey{center.x + dx, center.y + dy, center.z + dz});
                    if (it == cells_.end()) continue;
                    for (int i : it->second)
                        best.emplace_back((points_[i] - query).squaredNorm(), i);
                }
    };

    std::int64_t ring = 0;
    while (true) {
        consider_ring(ring);
        if (best.size() == points_.size()) break;  // everything scanned
        if (best.size() >= static_cast<std::size_t>(k)) {
            std::sort(best.begin(), best.end());
            // Points in un-searched cells are at least ring*cell_ away; strict
            // comparison so boundary ties still get scanned (lowest-index rule).
            const double safe = static_cast<double>(ring) * cell_;
            if (best[k - 1].first < safe * safe) break;
        }
        ++ring;
    }

    std::sort(best.begin(), best.end());
    std::vector<int> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) out.push_back(best[i].second);
    return out;
}

std::vector<int> GridIndex::radius(const Vector3d& query, double r) const {
    std::vector<int> out;
    const double r2 = r * r;
    const std::int64_t reach = static_cast<std::int64_t>(std::ceil(r / cell_)) + 1;
    const CellKey center = key_of(query);
    for (std::int64_t dx = -reach; dx <= reach; ++dx)
        for (std::int64_t dy = -reach; dy <= reach; ++dy)
            for (std::int64_t dz = -reach; dz <= reach; ++dz) {
                const auto it = cells_.find(CellKey{center.x + dx, center.y + dy, center.z + dz});
                if (it == cells_.end()) continue;
                for (int i : it->second)
                    if ((points_[i] - query).squaredNorm() <= r2) out.push_back(i);
            }
    std::sort(out.begin(), out.end());
    return out;
}

int GridIndex::nearest(const Vector3d& query) const {
    if (points_.empty()) return -1;
    return knn(query, 1)[0];
}

}  // namespace hybridreg::geom
