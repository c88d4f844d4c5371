"""Tour of the SO(3) layer: construction, composition, distances, averaging.

Rotations are stored as scalar-first unit quaternions with a nonnegative
scalar part, so every orientation has exactly one representation. The demo
builds a few rotations, round-trips them through the axis-angle map, and
compares the robust and non-robust averaging operators on contaminated input.
"""

import numpy as np

from rotavg import (Rotation, angular_distance, chordal_distance,
                    chordal_l2_mean, geodesic_l1_mean)


def main() -> None:
    rng = np.random.default_rng(7)

    # Construction from an axis-angle vector and from a matrix round-trip.
    r = Rotation.from_rotvec(np.array([0.3, -0.1, 0.2]))
    back = Rotation.from_matrix(r.as_matrix())
    print(f"quat (w, x, y, z) = {np.round(r.quat, 6)}")
    print(f"matrix round trip error = {angular_distance(r, back):.3e} rad")

    # Composition and inverse behave like matrix products.
    a = Rotation.from_rotvec(np.array([0.0, 0.0, np.pi / 2]))
    b = Rotation.from_rotvec(np.array([np.pi / 4, 0.0, 0.0]))
    ab = a @ b
    err = angular_distance(Rotation.from_matrix(a.as_matrix() @ b.as_matrix()), ab)
    print(f"compose vs matrix product = {err:.3e} rad")
    ident = np.linalg.norm((a @ a.inverse()).as_rotvec())
    print(f"a @ a^-1 angle = {ident:.3e} rad")

    # Two distances on the group. Chordal saturates at 2*sqrt(2) while the
    # angular distance keeps growing to pi.
    for deg in (1, 30, 90, 179):
        c = Rotation.from_rotvec(np.radians(deg) * np.array([1.0, 0.0, 0.0]))
        print(f"  {deg:4d} deg: angular {angular_distance(a, a @ c):.4f} rad"
              f"  chordal {chordal_distance(a, a @ c):.4f}")

    # Averaging: 12 samples near a common rotation plus one gross outlier.
    center = Rotation.from_rotvec(np.array([0.2, 0.4, -0.1]))
    cloud = [center @ Rotation.from_rotvec(rng.normal(scale=0.02, size=3))
             for _ in range(12)]
    cloud.append(center @ Rotation.from_rotvec(np.array([2.5, 0.0, 0.0])))

    l2 = chordal_l2_mean(cloud)
    l1 = geodesic_l1_mean(cloud)
    print(f"L2 mean error under 1 outlier = {np.degrees(angular_distance(l2, center)):.2f} deg")
    print(f"L1 median error under 1 outlier = {np.degrees(angular_distance(l1, center)):.2f} deg")


if __name__ == "__main__":
    main()
