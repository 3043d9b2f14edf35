"""Pairwise and sequential rigid registration of 3D point clouds.

The alignment loop is classic point-to-point ICP seeded by an odometry
prior: deterministic subsampling, nearest-neighbor matching within a
distance gate, rejection of many-to-one correspondences, and a closed-form
least-squares rigid solve, iterated until one of three stop rules fires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "PointCloud",
    "RigidTransform3",
    "IcpParams",
    "IcpResult",
    "RegistrationError",
    "subsample",
    "initial_align",
    "match",
    "reject",
    "solve_rigid",
    "icp",
    "register_sequence",
    "read_xyz",
    "write_xyz",
    "read_ply",
    "write_ply",
]


class RegistrationError(Exception):
    """Degenerate geometry or a failed pairwise alignment."""


@dataclass(frozen=True)
class RigidTransform3:
    """Proper rigid motion: orthonormal rotation (det +1) plus translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-9):
            raise ValueError("rotation is not orthonormal")
        if not math.isclose(np.linalg.det(r), 1.0, abs_tol=1e-9):
            raise ValueError("rotation determinant is not +1")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity():
        return RigidTransform3(np.eye(3), np.zeros(3))

    def apply(self, points):
        return np.asarray(points, dtype=np.float64) @ self.rotation.T + self.translation

    def compose(self, other):
        """self o other: apply `other` first."""
        return RigidTransform3(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self):
        rt = self.rotation.T
        return RigidTransform3(rt, -rt @ self.translation)

    def rotation_angle(self):
        c = (np.trace(self.rotation) - 1.0) / 2.0
        return math.acos(min(1.0, max(-1.0, c)))


@dataclass(frozen=True)
class PointCloud:
    """3D points in meters with an optional odometry pose tag."""

    points: np.ndarray
    pose: RigidTransform3 | None = None

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        if not np.isfinite(p).all():
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "points", p)

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class IcpParams:
    subsample_ratio: float = 1.0
    max_dist: float = 0.10
    max_iterations: int = 50
    error_delta: float = 1e-6     # rmse-plateau floor (m)
    error_floor: float = 1e-3     # absolute rmse floor (m)
    motion_epsilon: float = 1e-7  # per-iteration update considered "no motion"
    max_rotation: float = 0.5     # transform bound (rad)
    max_translation: float = 0.5  # transform bound (m)

    def __post_init__(self):
        if not 0 < self.subsample_ratio <= 1:
            raise ValueError("subsample_ratio must be in (0, 1]")
        for name in ("max_dist", "error_delta", "error_floor", "motion_epsilon",
                     "max_rotation", "max_translation"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")


@dataclass(frozen=True)
class IcpResult:
    transform: RigidTransform3
    rmse: float
    iterations: int
    stop_reason: str  # 'error_floor' | 'iteration_cap' | 'motion' | 'transform_bound'


def subsample(cloud: PointCloud, ratio) -> PointCloud:
    """Deterministic uniform-stride selection of ceil(ratio * N) points."""
    if not 0 < ratio <= 1:
        raise ValueError("ratio must be in (0, 1]")
    n = len(cloud)
    if n == 0:
        raise RegistrationError("cannot subsample an empty cloud")
    k = math.ceil(ratio * n)
    idx = (np.arange(k) * n) // k
    return PointCloud(cloud.points[idx], pose=cloud.pose)


def initial_align(src: PointCloud, ref: PointCloud):
    """Odometry-seeded initial guess: refPose^-1 o srcPose.

    Missing odometry on either side degrades to identity; the second return
    value flags whether the prior was actually available.
    """
    if src.pose is None or ref.pose is None:
        return RigidTransform3.identity(), False
    return ref.pose.inverse().compose(src.pose), True


def match(src_points, ref_points, max_dist):
    """Exact nearest ref neighbor for each src point, gated by max_dist.

    Returns (src_idx, ref_idx, dist) arrays for matched points only.
    """
    src_points = np.asarray(src_points, dtype=np.float64).reshape(-1, 3)
    ref_points = np.asarray(ref_points, dtype=np.float64).reshape(-1, 3)
    tree = cKDTree(ref_points)
    dist, ref_idx = tree.query(src_points, k=1)
    keep = dist <= max_dist
    return np.flatnonzero(keep), ref_idx[keep], dist[keep]


def reject(src_idx, ref_idx, dist):
    """Drop many-to-one correspondences, keeping the closest per ref point."""
    order = np.argsort(dist, kind="stable")
    seen = set()
    keep = []
    for i in order:
        r = int(ref_idx[i])
        if r not in seen:
            seen.add(r)
            keep.append(i)
    keep = np.sort(np.asarray(keep, dtype=np.int64))
    return src_idx[keep], ref_idx[keep], dist[keep]


def solve_rigid(src_points, ref_points) -> RigidTransform3:
    """Closed-form least-squares rigid motion mapping src onto ref.

    Centroid alignment plus SVD of the cross-covariance, with the usual
    determinant correction so the result is a proper rotation.
    """
    src = np.asarray(src_points, dtype=np.float64).reshape(-1, 3)
    ref = np.asarray(ref_points, dtype=np.float64).reshape(-1, 3)
    if src.shape != ref.shape or src.shape[0] < 3:
        raise RegistrationError("need at least 3 correspondence pairs")
    cs, cr = src.mean(axis=0), ref.mean(axis=0)
    h = (src - cs).T @ (ref - cr)
    u, s, vt = np.linalg.svd(h)
    if s[1] <= 1e-12 * max(s[0], 1e-300):
        raise RegistrationError("degenerate (collinear) correspondence geometry")
    d = np.sign(np.linalg.det(vt.T @ u.T))
    rot = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    return RigidTransform3(rot, cr - rot @ cs)


def icp(src: PointCloud, ref: PointCloud, params: IcpParams = IcpParams()) -> IcpResult:
    """Full alignment loop; returns the src->ref transform and diagnostics."""
    transform, _ = initial_align(src, ref)
    working = subsample(src, params.subsample_ratio)
    if len(ref) == 0:
        raise RegistrationError("reference cloud is empty")

    rmse = math.inf
    prev_rmse = math.inf
    iterations = 0
    stop_reason = "iteration_cap"
    for iterations in range(1, params.max_iterations + 1):
        moved = transform.apply(working.points)
        si, ri, dist = reject(*match(moved, ref.points, params.max_dist))
        if si.size < 3:
            if iterations == 1:
                raise RegistrationError("no usable correspondences at first iteration")
            stop_reason = "motion"
            break
        step = solve_rigid(moved[si], ref.points[ri])
        transform = step.compose(transform)
        residual = step.apply(moved[si]) - ref.points[ri]
        rmse = float(np.sqrt((residual ** 2).sum(axis=1).mean()))

        if (step.rotation_angle() > params.max_rotation
                or np.linalg.norm(step.translation) > params.max_translation):
            stop_reason = "transform_bound"
            break
        if rmse <= params.error_floor:
            stop_reason = "error_floor"
            break
        if abs(prev_rmse - rmse) <= params.error_delta:
            stop_reason = "error_floor"
            break
        if (step.rotation_angle() <= params.motion_epsilon
                and np.linalg.norm(step.translation) <= params.motion_epsilon):
            stop_reason = "motion"
            break
        prev_rmse = rmse
    else:
        iterations = params.max_iterations
        stop_reason = "iteration_cap"
    if params.max_iterations == 0:
        rmse = math.nan
    return IcpResult(transform, rmse, iterations, stop_reason)


def register_sequence(clouds, params: IcpParams = IcpParams()):
    """Chain pairwise ICP into the frame of cloud 0.

    Returns (merged PointCloud, per-frame transforms).  A pairwise failure
    aborts with the offending frame index.
    """
    clouds = list(clouds)
    if not clouds:
        raise RegistrationError("need at least one cloud")
    transforms = [RigidTransform3.identity()]
    for i in range(1, len(clouds)):
        try:
            result = icp(clouds[i], clouds[i - 1], params)
        except RegistrationError as e:
            raise RegistrationError(f"pairwise registration failed at frame {i}: {e}") from e
        transforms.append(transforms[i - 1].compose(result.transform))
    merged = np.vstack([t.apply(c.points) for t, c in zip(transforms, clouds)])
    return PointCloud(merged), transforms


# --- file formats -----------------------------------------------------------

def read_xyz(path) -> PointCloud:
    """ASCII XYZ: one 'x y z' triple per line."""
    pts = np.loadtxt(path, dtype=np.float64, ndmin=2)
    return PointCloud(pts[:, :3])


def write_xyz(path, cloud: PointCloud):
    np.savetxt(path, cloud.points, fmt="%.9g")


def read_ply(path) -> PointCloud:
    """ASCII vertex-only PLY."""
    with open(path) as f:
        line = f.readline().strip()
        if line != "ply":
            raise RegistrationError(f"{path}: not a PLY file")
        n = None
        while True:
            line = f.readline()
            if not line:
                raise RegistrationError(f"{path}: truncated PLY header")
            parts = line.split()
            if parts[:2] == ["element", "vertex"]:
                n = int(parts[2])
            elif parts and parts[0] == "format" and parts[1] != "ascii":
                raise RegistrationError(f"{path}: only ASCII PLY supported")
            elif parts == ["end_header"]:
                break
        pts = np.loadtxt(f, dtype=np.float64, max_rows=n, ndmin=2)
    return PointCloud(pts[:, :3])


def write_ply(path, cloud: PointCloud):
    with open(path, "w") as f:
        f.write("ply\nformat ascii 1.0\n")
        f.write(f"element vertex {len(cloud)}\n")
        f.write("property float x\nproperty float y\nproperty float z\nend_header\n")
        for x, y, z in cloud.points:
            f.write(f"{x:.9g} {y:.9g} {z:.9g}\n")
