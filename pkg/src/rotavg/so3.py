"""Rotations on SO(3) backed by unit quaternions.

Scalar-first quaternions (w, x, y, z) with w >= 0 are the internal currency;
matrices and rotation vectors are produced on demand.  Module-level array
helpers (quat_mul, quat_rotvec, ...) operate on (..., 4) float arrays and are
what the graph/averaging code uses on hot paths.
"""

import math

import numpy as np

# Below this angle (radians), series expansions replace trig ratios.
_SMALL_ANGLE = 1e-6
# Unit-norm drift window: renormalize only when |1 - ||q||^2| exceeds this,
# so that already-unit quaternions keep their exact bits (file round trips).
_UNIT_TOL = 4.0 * np.finfo(float).eps


def _canonical_tuple(w: float, x: float, y: float, z: float):
    """Flip sign so w >= 0; at w == 0 exactly, first nonzero component >= 0."""
    if w < 0.0:
        return -w, -x, -y, -z
    if w == 0.0:
        if x < 0.0 or (x == 0.0 and (y < 0.0 or (y == 0.0 and z < 0.0))):
            return w, -x, -y, -z
    return w, x, y, z


class Rotation:
    """A single rotation.  Immutable; construct via the from_* classmethods."""

    __slots__ = ("_q",)

    def __init__(self, quat):
        q = np.asarray(quat, dtype=float)
        if q.shape != (4,):
            raise ValueError(f"quaternion must have shape (4,), got {q.shape}")
        if not np.all(np.isfinite(q)):
            raise ValueError("quaternion has non-finite entries")
        n2 = float(q @ q)
        if n2 == 0.0:
            raise ValueError("zero quaternion does not define a rotation")
        if abs(n2 - 1.0) > _UNIT_TOL:
            q = q / math.sqrt(n2)
        w, x, y, z = _canonical_tuple(q[0], q[1], q[2], q[3])
        out = np.array([w, x, y, z])
        out.flags.writeable = False
        self._q = out

    @classmethod
    def _wrap(cls, w: float, x: float, y: float, z: float) -> "Rotation":
        # Trusted path for values already unit within _UNIT_TOL.
        self = object.__new__(cls)
        w, x, y, z = _canonical_tuple(w, x, y, z)
        q = np.array([w, x, y, z])
        q.flags.writeable = False
        self._q = q
        return self

    @classmethod
    def identity(cls) -> "Rotation":
        return cls._wrap(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_quat(cls, quat) -> "Rotation":
        """Build from a scalar-first (w, x, y, z) quaternion; normalizes."""
        return cls(quat)

    @classmethod
    def from_rotvec(cls, v) -> "Rotation":
        """Exponential map: axis-angle 3-vector (radians) to rotation.

        Angles below 1e-6 use the series 1/2 - theta^2/48 + theta^4/3840 for
        sin(theta/2)/theta, so the map is smooth through zero.
        """
        v = np.asarray(v, dtype=float)
        if v.shape != (3,):
            raise ValueError(f"rotation vector must have shape (3,), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("rotation vector has non-finite entries")
        x, y, z = float(v[0]), float(v[1]), float(v[2])
        t2 = x * x + y * y + z * z
        theta = math.sqrt(t2)
        if theta < _SMALL_ANGLE:
            k = 0.5 - t2 / 48.0 + t2 * t2 / 3840.0
        else:
            k = math.sin(0.5 * theta) / theta
        return cls._wrap(math.cos(0.5 * theta), k * x, k * y, k * z)

    @classmethod
    def from_matrix(cls, m, atol: float = 1e-6) -> "Rotation":
        """Build from a 3x3 rotation matrix (checked within atol).

        Quaternion extraction branches on the largest diagonal combination,
        so the axis stays well conditioned near half-turns.
        """
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError(f"rotation matrix must have shape (3, 3), got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("rotation matrix has non-finite entries")
        if np.abs(m @ m.T - np.eye(3)).max() > atol:
            raise ValueError("matrix is not orthonormal")
        if abs(float(np.linalg.det(m)) - 1.0) > atol:
            raise ValueError("matrix determinant is not +1")
        t = m[0, 0] + m[1, 1] + m[2, 2]
        if t > max(m[0, 0], m[1, 1], m[2, 2]):
            r = math.sqrt(1.0 + t)
            s = 0.5 / r
            q = (0.5 * r, (m[2, 1] - m[1, 2]) * s, (m[0, 2] - m[2, 0]) * s,
                 (m[1, 0] - m[0, 1]) * s)
        elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
            r = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2])
            s = 0.5 / r
            q = ((m[2, 1] - m[1, 2]) * s, 0.5 * r, (m[0, 1] + m[1, 0]) * s,
                 (m[0, 2] + m[2, 0]) * s)
        elif m[1, 1] >= m[2, 2]:
            r = math.sqrt(1.0 - m[0, 0] + m[1, 1] - m[2, 2])
            s = 0.5 / r
            q = ((m[0, 2] - m[2, 0]) * s, (m[0, 1] + m[1, 0]) * s, 0.5 * r,
                 (m[1, 2] + m[2, 1]) * s)
        else:
            r = math.sqrt(1.0 - m[0, 0] - m[1, 1] + m[2, 2])
            s = 0.5 / r
            q = ((m[1, 0] - m[0, 1]) * s, (m[0, 2] + m[2, 0]) * s,
                 (m[1, 2] + m[2, 1]) * s, 0.5 * r)
        return cls(np.array(q))

    @property
    def quat(self) -> np.ndarray:
        """Scalar-first unit quaternion with w >= 0 (read-only view)."""
        return self._q

    def as_matrix(self) -> np.ndarray:
        w, x, y, z = self._q
        xx, yy, zz = x * x, y * y, z * z
        wx, wy, wz = w * x, w * y, w * z
        xy, xz, yz = x * y, x * z, y * z
        return np.array([
            [1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)],
            [2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)],
            [2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)],
        ])

    def as_rotvec(self) -> np.ndarray:
        """Logarithm map: principal axis-angle vector, norm <= pi."""
        w, x, y, z = self._q
        s2 = x * x + y * y + z * z
        s = math.sqrt(s2)
        if s < _SMALL_ANGLE:
            f = (2.0 / w) * (1.0 - s2 / (3.0 * w * w))
        else:
            f = 2.0 * math.atan2(s, w) / s
        return np.array([f * x, f * y, f * z])

    def inverse(self) -> "Rotation":
        w, x, y, z = self._q
        return Rotation._wrap(w, -x, -y, -z)

    def __matmul__(self, other: "Rotation") -> "Rotation":
        if not isinstance(other, Rotation):
            return NotImplemented
        aw, ax, ay, az = self._q
        bw, bx, by, bz = other._q
        w = aw * bw - ax * bx - ay * by - az * bz
        x = aw * bx + ax * bw + ay * bz - az * by
        y = aw * by - ax * bz + ay * bw + az * bx
        z = aw * bz + ax * by - ay * bx + az * bw
        n2 = w * w + x * x + y * y + z * z
        if abs(n2 - 1.0) > _UNIT_TOL:
            inv = 1.0 / math.sqrt(n2)
            w, x, y, z = w * inv, x * inv, y * inv, z * inv
        return Rotation._wrap(w, x, y, z)

    def __repr__(self) -> str:
        w, x, y, z = self._q
        return f"Rotation(quat=[{w:.6g}, {x:.6g}, {y:.6g}, {z:.6g}])"


def exp(v) -> Rotation:
    """Exponential map from an axis-angle 3-vector (radians)."""
    return Rotation.from_rotvec(v)


def log(r: Rotation) -> np.ndarray:
    """Logarithm map to the principal axis-angle vector (norm <= pi)."""
    return r.as_rotvec()


def angular_distance(a: Rotation, b: Rotation) -> float:
    """Geodesic angle between two rotations, in [0, pi] radians."""
    aw, ax, ay, az = a._q
    bw, bx, by, bz = b._q
    # Relative quaternion a * conj(b); its scalar part is the 4-dot of a and b.
    w = aw * bw + ax * bx + ay * by + az * bz
    x = ax * bw - aw * bx - ay * bz + az * by
    y = ay * bw - aw * by + ax * bz - az * bx
    z = az * bw - aw * bz - ax * by + ay * bx
    return 2.0 * math.atan2(math.sqrt(x * x + y * y + z * z), abs(w))


def chordal_distance(a: Rotation, b: Rotation) -> float:
    """Frobenius distance between the two rotation matrices, in [0, 2*sqrt(2)].

    Computed as 2*sqrt(2)*sin(angle/2) via the relative quaternion, which
    equals ||A - B||_F exactly.
    """
    aw, ax, ay, az = a._q
    bw, bx, by, bz = b._q
    x = ax * bw - aw * bx - ay * bz + az * by
    y = ay * bw - aw * by + ax * bz - az * bx
    z = az * bw - aw * bz - ax * by + ay * bx
    s = math.sqrt(x * x + y * y + z * z)
    if s > 1.0:
        s = 1.0
    return 2.0 * math.sqrt(2.0) * s


def bch_residual(a: Rotation, b: Rotation) -> np.ndarray:
    """Log(a * b^-1): first-order approximation of rotvec(a) - rotvec(b).

    The approximation error is governed by the commutator term
    0.5*cross(u_a, u_b) and is small when both rotations are small.
    """
    return (a @ b.inverse()).as_rotvec()


def random_rotation(rng: np.random.Generator) -> Rotation:
    """Uniform random rotation (normalized 4-dimensional Gaussian)."""
    q = rng.standard_normal(4)
    return Rotation(q)


def random_rotations(rng: np.random.Generator, n: int) -> np.ndarray:
    """(n, 4) array of uniform random unit quaternions, canonicalized."""
    q = rng.standard_normal((n, 4))
    return quat_canonical(q / np.linalg.norm(q, axis=1, keepdims=True))


# ---------------------------------------------------------------------------
# Array helpers: scalar-first (..., 4) quaternions, (..., 3) rotation vectors.


def quat_canonical(q: np.ndarray) -> np.ndarray:
    """Flip signs so each quaternion has w >= 0 (w == 0 rows: first nonzero >= 0)."""
    q = np.asarray(q, dtype=float)
    flip = q[..., 0] < 0.0
    zero_w = q[..., 0] == 0.0
    if np.any(zero_w):
        x, y, z = q[..., 1], q[..., 2], q[..., 3]
        neg = (x < 0.0) | ((x == 0.0) & ((y < 0.0) | ((y == 0.0) & (z < 0.0))))
        flip = flip | (zero_w & neg)
    out = np.where(flip[..., None], -q, q)
    return out


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product, broadcasting over leading dimensions."""
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


def quat_conj(q: np.ndarray) -> np.ndarray:
    out = np.array(q, dtype=float, copy=True)
    out[..., 1:] *= -1.0
    return out


def quat_angle(q: np.ndarray) -> np.ndarray:
    """Rotation angle of each quaternion, in [0, pi]."""
    s = np.linalg.norm(q[..., 1:], axis=-1)
    return 2.0 * np.arctan2(s, np.abs(q[..., 0]))


def quat_chordal(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise chordal distance 2*sqrt(2)*sin(angle/2) between quaternion arrays."""
    rel = quat_mul(a, quat_conj(b))
    s = np.minimum(np.linalg.norm(rel[..., 1:], axis=-1), 1.0)
    return 2.0 * math.sqrt(2.0) * s


def rotvec_quat(v: np.ndarray) -> np.ndarray:
    """Batch exponential map: (..., 3) rotation vectors to canonical quaternions."""
    v = np.asarray(v, dtype=float)
    t2 = np.sum(v * v, axis=-1)
    theta = np.sqrt(t2)
    small = theta < _SMALL_ANGLE
    k = np.where(small, 0.5 - t2 / 48.0 + t2 * t2 / 3840.0,
                 np.sin(0.5 * theta) / np.where(small, 1.0, theta))
    q = np.empty(v.shape[:-1] + (4,))
    q[..., 0] = np.cos(0.5 * theta)
    q[..., 1:] = k[..., None] * v
    return quat_canonical(q)


def quat_rotvec(q: np.ndarray) -> np.ndarray:
    """Batch logarithm map to principal rotation vectors (norm <= pi)."""
    q = quat_canonical(q)
    w = q[..., 0]
    s2 = np.sum(q[..., 1:] ** 2, axis=-1)
    s = np.sqrt(s2)
    small = s < _SMALL_ANGLE
    w_safe = np.where(w == 0.0, 1.0, w)
    f = np.where(small,
                 (2.0 / w_safe) * (1.0 - s2 / (3.0 * w_safe * w_safe)),
                 2.0 * np.arctan2(s, w) / np.where(small, 1.0, s))
    return f[..., None] * q[..., 1:]


def quat_matrix(q: np.ndarray) -> np.ndarray:
    """Batch quaternion to rotation matrix, shape (..., 3, 3)."""
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    xx, yy, zz = x * x, y * y, z * z
    wx, wy, wz = w * x, w * y, w * z
    xy, xz, yz = x * y, x * z, y * z
    m = np.empty(q.shape[:-1] + (3, 3))
    m[..., 0, 0] = 1.0 - 2.0 * (yy + zz)
    m[..., 0, 1] = 2.0 * (xy - wz)
    m[..., 0, 2] = 2.0 * (xz + wy)
    m[..., 1, 0] = 2.0 * (xy + wz)
    m[..., 1, 1] = 1.0 - 2.0 * (xx + zz)
    m[..., 1, 2] = 2.0 * (yz - wx)
    m[..., 2, 0] = 2.0 * (xz - wy)
    m[..., 2, 1] = 2.0 * (yz + wx)
    m[..., 2, 2] = 1.0 - 2.0 * (xx + yy)
    return m
