"""Membership grids and boundary traces on 2D cross-sections of the outcome
cube.

Three nested regions are mapped: outcome vectors satisfying the classical
(CHSH) bounds, the quantum-realizability inequality, and the Tsirelson
bounds.  Two of the four components are fixed; the remaining two span
[0, 1/2] x [0, 1/2].  Grid cells are evaluated at their centers in exact
arithmetic, so an odd resolution puts 1/4 exactly on a sample.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, TextIO

import numpy as np

from .model import OutcomeVector
from .scalars import Scalar, as_scalar
from .stats import (
    TSIRELSON_HIGH,
    TSIRELSON_LOW,
    Compliance,
    chsh_satisfied,
    qm_compliant,
    tsirelson_satisfied,
)

__all__ = [
    "REGIONS",
    "RegionEmptyError",
    "MembershipGrid",
    "membership_grid",
    "trace_boundary",
    "boundary_defect",
    "box_face_defect",
    "default_grid_filename",
]

REGIONS = ("chsh", "qm", "tsirelson")
_COMPONENTS = ("p11", "p12", "p21", "p22")

CSV_HEADER = "free_x,free_y,chsh,qm,tsirelson"


class RegionEmptyError(ValueError):
    """The region does not contain the slice's reference interior point."""


def _region_predicate(region: str) -> Callable[[OutcomeVector], bool]:
    if region == "chsh":
        return chsh_satisfied
    if region == "qm":
        return lambda p: qm_compliant(p) is not Compliance.OUTSIDE
    if region == "tsirelson":
        return tsirelson_satisfied
    raise ValueError(f"unknown region {region!r}; expected one of {REGIONS}")


def _split_components(fixed: Mapping[str, object]):
    names = list(fixed)
    if len(names) != 2 or any(n not in _COMPONENTS for n in names):
        raise ValueError(f"fixed must name two of {_COMPONENTS}, got {names}")
    fixed_vals = {n: as_scalar(fixed[n]) for n in names}
    free = tuple(n for n in _COMPONENTS if n not in fixed_vals)
    return fixed_vals, free


def _vector_builder(fixed_vals: Mapping[str, Scalar], free: tuple[str, str]):
    order = {name: i for i, name in enumerate(_COMPONENTS)}
    template: list = [None, None, None, None]
    for name, value in fixed_vals.items():
        template[order[name]] = value
    ix, iy = order[free[0]], order[free[1]]

    def build(x, y) -> OutcomeVector:
        args = list(template)
        args[ix] = x
        args[iy] = y
        return OutcomeVector(*args)

    return build


@dataclass
class MembershipGrid:
    """Per-cell membership flags for the three regions on one slice."""

    fixed: dict[str, Scalar]
    free: tuple[str, str]
    resolution: int
    centers: tuple[Fraction, ...]
    flags: np.ndarray  # shape (resolution, resolution), bits: 1 chsh, 2 qm, 4 tsirelson
    inclusion_holds: bool

    def counts(self) -> dict[str, int]:
        return {
            "chsh": int((self.flags & 1).astype(bool).sum()),
            "qm": int((self.flags & 2).astype(bool).sum()),
            "tsirelson": int((self.flags & 4).astype(bool).sum()),
        }

    def cell(self, ix: int, iy: int) -> tuple[bool, bool, bool]:
        f = int(self.flags[ix, iy])
        return (bool(f & 1), bool(f & 2), bool(f & 4))

    def write_csv(self, stream: TextIO) -> None:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for ix, cx in enumerate(self.centers):
            for iy, cy in enumerate(self.centers):
                chsh, qm, tsir = self.cell(ix, iy)
                writer.writerow([str(cx), str(cy), int(chsh), int(qm), int(tsir)])

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as stream:
            self.write_csv(stream)

    def to_json_dict(self) -> dict:
        return {
            "fixed": {k: str(v) for k, v in self.fixed.items()},
            "free": list(self.free),
            "resolution": self.resolution,
            "centers": [str(c) for c in self.centers],
            "flags": [[int(v) for v in row] for row in self.flags],
            "counts": self.counts(),
            "inclusion_holds": self.inclusion_holds,
        }


def _grid_row(fixed_vals, free, centers, ix: int) -> tuple[int, list[int]]:
    build = _vector_builder(fixed_vals, free)
    sx = Scalar(centers[ix])
    row = []
    for cy in centers:
        p = build(sx, Scalar(cy))
        chsh = chsh_satisfied(p)
        qm = qm_compliant(p) is not Compliance.OUTSIDE
        tsir = tsirelson_satisfied(p)
        if (chsh and not qm) or (qm and not tsir):
            raise AssertionError(
                f"inclusion chain violated at cell ({centers[ix]}, {cy})"
            )
        row.append((1 if chsh else 0) | (2 if qm else 0) | (4 if tsir else 0))
    return ix, row


def membership_grid(fixed: Mapping[str, object], resolution: int = 201) -> MembershipGrid:
    """Evaluate all three region predicates at every cell center.

    The inclusion chain (classical inside quantum inside Tsirelson) is
    asserted cell by cell; a violation would be a logic error and raises.
    Rows are evaluated in parallel when COUPLING_THREADS allows; the output
    is merged by row index and does not depend on the schedule.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    fixed_vals, free = _split_components(fixed)
    centers = tuple(Fraction(2 * k + 1, 4 * resolution) for k in range(resolution))
    flags = np.zeros((resolution, resolution), dtype=np.uint8)

    from .verify import worker_count  # late import; verify depends on regions

    workers = worker_count()
    if workers > 1 and resolution >= 2 * workers:
        from concurrent.futures import ProcessPoolExecutor
        from functools import partial

        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = pool.map(
                partial(_grid_row, fixed_vals, free, centers), range(resolution)
            )
            for ix, row in rows:
                flags[ix, :] = row
    else:
        for ix in range(resolution):
            _, row = _grid_row(fixed_vals, free, centers, ix)
            flags[ix, :] = row
    return MembershipGrid(
        fixed=dict(fixed_vals),
        free=free,
        resolution=resolution,
        centers=centers,
        flags=flags,
        inclusion_holds=True,
    )


def default_grid_filename(fixed: Mapping[str, object], resolution: int) -> str:
    fixed_vals, _ = _split_components(fixed)
    parts = [
        str(fixed_vals[n]).replace("/", "d")
        for n in _COMPONENTS
        if n in fixed_vals
    ]
    return f"region_{parts[0]}_{parts[1]}_{resolution}.csv"


# -- boundary tracing ----------------------------------------------------------

_CENTER = (Fraction(1, 4), Fraction(1, 4))


def _perimeter_point(s: Fraction) -> tuple[Fraction, Fraction]:
    """Point on the boundary of [0,1/2]^2 at arc-length fraction s, walking
    counterclockwise from (1/2, 1/4)."""
    half = Fraction(1, 2)
    arc = (s % 1) * 2
    if arc < Fraction(1, 4):
        return (half, Fraction(1, 4) + arc)
    if arc < Fraction(3, 4):
        return (half - (arc - Fraction(1, 4)), half)
    if arc < Fraction(5, 4):
        return (Fraction(0), half - (arc - Fraction(3, 4)))
    if arc < Fraction(7, 4):
        return (arc - Fraction(5, 4), Fraction(0))
    return (half, arc - Fraction(7, 4))


def _chsh_face_times(build, cx, cy, tx, ty) -> list:
    """Parameters u where a classical face holds with equality along
    p(u) = center + u*(target - center); exact rationals."""
    lo = build(cx, cy).components
    hi = build(tx, ty).components
    out = []
    total_lo = sum(c.as_fraction() for c in lo)
    total_hi = sum(c.as_fraction() for c in hi)
    for k in range(4):
        a0 = total_lo - 2 * lo[k].as_fraction()
        a1 = total_hi - 2 * hi[k].as_fraction()
        beta = a1 - a0
        if beta == 0:
            continue
        for bound in (Fraction(0), Fraction(1)):
            out.append((bound - a0) / beta)
    return out


def _tsirelson_face_times(build, cx, cy, tx, ty) -> list:
    lo = build(cx, cy).components
    hi = build(tx, ty).components
    out = []
    total_lo = sum((c for c in lo[1:]), lo[0])
    total_hi = sum((c for c in hi[1:]), hi[0])
    for k in range(4):
        a0 = total_lo - 2 * lo[k]
        a1 = total_hi - 2 * hi[k]
        beta = a1 - a0
        if beta == 0:
            continue
        for bound in (TSIRELSON_LOW, TSIRELSON_HIGH):
            out.append((bound - a0) / beta)
    return out


def trace_boundary(
    region: str,
    fixed: Mapping[str, object],
    rays: int,
    *,
    iterations: int = 64,
) -> list[tuple[Scalar, Scalar]]:
    """Boundary points of a region on a slice, one per ray from (1/4, 1/4).

    Rays aim at ``rays`` points spread uniformly along the slice perimeter.
    If the region reaches the box face along a ray, the face point itself is
    returned (the region's boundary there is the face).  Otherwise the
    crossing is bisected in exact arithmetic; for the two linear regions the
    point is then snapped onto the face equality, making the result exact.
    """
    predicate = _region_predicate(region)
    fixed_vals, free = _split_components(fixed)
    build = _vector_builder(fixed_vals, free)
    cx, cy = _CENTER
    if not predicate(build(Scalar(cx), Scalar(cy))):
        raise RegionEmptyError(
            f"region {region!r} does not contain the slice point (1/4, 1/4)"
        )
    if rays < 1:
        raise ValueError("rays must be positive")

    points: list[tuple[Scalar, Scalar]] = []
    for k in range(rays):
        tx, ty = _perimeter_point(Fraction(k, rays))

        def at(u: Fraction) -> tuple[Fraction, Fraction]:
            return (cx + u * (tx - cx), cy + u * (ty - cy))

        def inside(u: Fraction) -> bool:
            x, y = at(u)
            return predicate(build(Scalar(x), Scalar(y)))

        if inside(Fraction(1)):
            points.append((Scalar(tx), Scalar(ty)))
            continue
        lo, hi = Fraction(0), Fraction(1)
        for _ in range(iterations):
            mid = (lo + hi) / 2
            if inside(mid):
                lo = mid
            else:
                hi = mid

        snapped = None
        if region in ("chsh", "tsirelson"):
            if region == "chsh":
                candidates = _chsh_face_times(build, cx, cy, tx, ty)
            else:
                candidates = _tsirelson_face_times(build, cx, cy, tx, ty)
            valid = []
            for u in candidates:
                if lo <= u <= hi:
                    xs = cx + u * (tx - cx)
                    ys = cy + u * (ty - cy)
                    px = Scalar(xs) if isinstance(xs, Fraction) else xs
                    py = Scalar(ys) if isinstance(ys, Fraction) else ys
                    try:
                        ok = predicate(build(px, py))
                    except ValueError:
                        continue
                    if ok:
                        valid.append((u, px, py))
            if valid:
                valid.sort(key=lambda item: item[0])
                snapped = (valid[0][1], valid[0][2])
        if snapped is not None:
            points.append(snapped)
        else:
            x, y = at(lo)
            points.append((Scalar(x), Scalar(y)))
    return points


def box_face_defect(x, y) -> float:
    """Distance from a slice point to the nearest box face."""
    fx, fy = float(as_scalar(x)), float(as_scalar(y))
    return min(fx, 0.5 - fx, fy, 0.5 - fy)


def boundary_defect(region: str, fixed: Mapping[str, object], x, y) -> float:
    """Float residual of the region's own boundary equalities at a point
    (ignoring box faces); small values mean the point sits on the boundary."""
    fixed_vals, free = _split_components(fixed)
    build = _vector_builder(fixed_vals, free)
    sx, sy = as_scalar(x), as_scalar(y)
    if sx.is_exact != sy.is_exact:  # pragma: no cover - defensive
        raise ValueError("mixed-mode boundary point")
    p = build(sx, sy)
    comps = [float(c) for c in p.components]
    total = sum(comps)
    exprs = [total - 2 * c for c in comps]
    if region == "chsh":
        return min(min(abs(e), abs(e - 1)) for e in exprs)
    if region == "tsirelson":
        lo, hi = float(TSIRELSON_LOW), float(TSIRELSON_HIGH)
        return min(min(abs(e - lo), abs(e - hi)) for e in exprs)
    if region == "qm":
        r = [4 * c - 1 for c in comps]
        lhs = abs(r[0] * r[1] - r[2] * r[3])
        rhs = (max(0.0, (1 - r[0] ** 2) * (1 - r[1] ** 2))) ** 0.5 + (
            max(0.0, (1 - r[2] ** 2) * (1 - r[3] ** 2))
        ) ** 0.5
        return abs(rhs - lhs)
    raise ValueError(f"unknown region {region!r}")
