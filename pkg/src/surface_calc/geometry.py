"""Toroidal surface parametrizations and metric data on the parameter grid.

A surface is given by a doubly periodic embedding x(u, v) into R^3 with u the
poloidal and v the toroidal angle.  Each parametrization evaluates its
embedding and the analytic tangents du_x, dv_x at arbitrary points; the
derivatives of the metric entries themselves (needed by the divergence and
curl coefficient grids) are obtained by spectral differentiation of the nodal
metric, which avoids hand-coding second derivatives of the embedding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np

from .spectral import Grid, apply_mode_symbol

__all__ = [
    "TrigSeries",
    "TorusOfRevolution",
    "SurfaceOfRevolution",
    "GarabedianStellarator",
    "SurfaceJet",
    "MetricGrids",
    "evaluate_surface",
    "build_metric",
    "flat_metric",
]


@dataclass(frozen=True)
class TrigSeries:
    """Real trigonometric polynomial sum_k a_k cos(k t) + b_k sin(k t).

    ``terms`` is a tuple of (harmonic, cosine coefficient, sine coefficient)
    triples; harmonics are nonnegative integers.
    """

    terms: tuple[tuple[int, float, float], ...]

    @staticmethod
    def from_terms(terms: Iterable[tuple[int, float, float]]) -> "TrigSeries":
        cleaned = tuple((int(k), float(a), float(b)) for k, a, b in terms)
        for k, _, _ in cleaned:
            if k < 0:
                raise ValueError(f"harmonic must be nonnegative, got {k}")
        return TrigSeries(cleaned)

    @staticmethod
    def constant(value: float) -> "TrigSeries":
        return TrigSeries(((0, float(value), 0.0),))

    def __call__(self, t: np.ndarray) -> np.ndarray:
        out = np.zeros_like(np.asarray(t, dtype=float))
        for k, a, b in self.terms:
            out += a * np.cos(k * t) + b * np.sin(k * t)
        return out

    def derivative(self, t: np.ndarray) -> np.ndarray:
        out = np.zeros_like(np.asarray(t, dtype=float))
        for k, a, b in self.terms:
            out += -a * k * np.sin(k * t) + b * k * np.cos(k * t)
        return out


@dataclass(frozen=True)
class TorusOfRevolution:
    """Standard torus ((R + r cos u) cos v, (R + r cos u) sin v, r sin u)."""

    major_radius: float
    minor_radius: float

    def __post_init__(self) -> None:
        if not 0 < self.minor_radius < self.major_radius:
            raise ValueError(
                "need 0 < minor_radius < major_radius, got "
                f"r={self.minor_radius}, R={self.major_radius}"
            )

    def embed(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        ring = self.major_radius + self.minor_radius * np.cos(u)
        return np.stack(
            [ring * np.cos(v), ring * np.sin(v), self.minor_radius * np.sin(u) * np.ones_like(v)]
        )

    def frame(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        r = self.minor_radius
        ring = self.major_radius + r * np.cos(u)
        x = np.stack([ring * np.cos(v), ring * np.sin(v), r * np.sin(u) * np.ones_like(v)])
        xu = np.stack(
            [-r * np.sin(u) * np.cos(v), -r * np.sin(u) * np.sin(v), r * np.cos(u) * np.ones_like(v)]
        )
        xv = np.stack([-ring * np.sin(v), ring * np.cos(v), np.zeros_like(u + v)])
        return x, xu, xv


@dataclass(frozen=True)
class SurfaceOfRevolution:
    """Profile curve (r(u), z(u)) swept around the z axis.

    Embedding (r(u) cos v, r(u) sin v, z(u)); requires r(u) > 0 for a valid
    torus, which surfaces later as the g > 0 check at metric build.
    """

    r_profile: TrigSeries
    z_profile: TrigSeries

    def embed(self, u, v):
        r = self.r_profile(u)
        return np.stack([r * np.cos(v), r * np.sin(v), self.z_profile(u) * np.ones_like(v)])

    def frame(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        r = self.r_profile(u)
        dr = self.r_profile.derivative(u)
        dz = self.z_profile.derivative(u)
        ones = np.ones_like(v)
        x = np.stack([r * np.cos(v), r * np.sin(v), self.z_profile(u) * ones])
        xu = np.stack([dr * np.cos(v), dr * np.sin(v), dz * ones])
        xv = np.stack([-r * np.sin(v), r * np.cos(v), np.zeros_like(u + v)])
        return x, xu, xv


@dataclass(frozen=True)
class GarabedianStellarator:
    """Nested stellarator surface around a magnetic axis curve.

    The axis is (r0(v) cos v, r0(v) sin v, z0(v)).  The outer boundary is the
    trigonometric sum over the mode table ``deltas``:

        C(u, v) = sum delta[m, n] cos((1 - m) u + n v)
        S(u, v) = sum delta[m, n] sin((1 - m) u + n v)

    and the surface at radius-like coordinate s interpolates between axis and
    boundary through the stretch factor R(s, u, v) = s (1 + a1 (1 - s) cos u sin v):

        x = cos v (r0 + R (C - r0)),  y = sin v (r0 + R (C - r0)),
        z = z0 + R (S - z0).
    """

    r0_profile: TrigSeries
    z0_profile: TrigSeries
    deltas: tuple[tuple[int, int, float], ...]
    s: float
    stretch_a1: float = 0.01

    def __post_init__(self) -> None:
        if not 0 <= self.s <= 1:
            raise ValueError(f"radial coordinate s must lie in [0, 1], got {self.s}")

    @staticmethod
    def from_tables(
        r0_terms: Iterable[tuple[int, float, float]],
        z0_terms: Iterable[tuple[int, float, float]],
        deltas: Mapping[tuple[int, int], float] | Iterable[tuple[int, int, float]],
        s: float,
        stretch_a1: float = 0.01,
    ) -> "GarabedianStellarator":
        if isinstance(deltas, Mapping):
            rows = tuple(sorted((int(m), int(n), float(c)) for (m, n), c in deltas.items()))
        else:
            rows = tuple(sorted((int(m), int(n), float(c)) for m, n, c in deltas))
        return GarabedianStellarator(
            TrigSeries.from_terms(r0_terms),
            TrigSeries.from_terms(z0_terms),
            rows,
            float(s),
            float(stretch_a1),
        )

    def _boundary_sums(self, u, v):
        c = np.zeros_like(u + v)
        sn = np.zeros_like(u + v)
        cu = np.zeros_like(u + v)
        cv = np.zeros_like(u + v)
        su = np.zeros_like(u + v)
        sv = np.zeros_like(u + v)
        for m, n, coeff in self.deltas:
            p = 1 - m
            phase = p * u + n * v
            cp, sp = np.cos(phase), np.sin(phase)
            c += coeff * cp
            sn += coeff * sp
            cu += -coeff * p * sp
            cv += -coeff * n * sp
            su += coeff * p * cp
            sv += coeff * n * cp
        return c, sn, cu, cv, su, sv

    def _stretch(self, u, v):
        amp = self.s * self.stretch_a1 * (1.0 - self.s)
        r = self.s * (1.0 + self.stretch_a1 * (1.0 - self.s) * np.cos(u) * np.sin(v))
        ru = -amp * np.sin(u) * np.sin(v)
        rv = amp * np.cos(u) * np.cos(v)
        return r, ru, rv

    def embed(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        c, sn, *_ = self._boundary_sums(u, v)
        stretch, _, _ = self._stretch(u, v)
        r0 = self.r0_profile(v)
        z0 = self.z0_profile(v)
        rho = r0 + stretch * (c - r0)
        return np.stack([rho * np.cos(v), rho * np.sin(v), z0 + stretch * (sn - z0)])

    def frame(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        c, sn, cu, cv, su, sv = self._boundary_sums(u, v)
        stretch, stretch_u, stretch_v = self._stretch(u, v)
        r0 = self.r0_profile(v)
        dr0 = self.r0_profile.derivative(v)
        z0 = self.z0_profile(v)
        dz0 = self.z0_profile.derivative(v)

        rho = r0 + stretch * (c - r0)
        rho_u = stretch_u * (c - r0) + stretch * cu
        rho_v = dr0 + stretch_v * (c - r0) + stretch * (cv - dr0)

        cv_, sv_ = np.cos(v), np.sin(v)
        x = np.stack([rho * cv_, rho * sv_, z0 + stretch * (sn - z0)])
        xu = np.stack(
            [rho_u * cv_, rho_u * sv_, stretch_u * (sn - z0) + stretch * su]
        )
        xv = np.stack(
            [
                rho_v * cv_ - rho * sv_,
                rho_v * sv_ + rho * cv_,
                dz0 + stretch_v * (sn - z0) + stretch * (sv - dz0),
            ]
        )
        return x, xu, xv


@dataclass(frozen=True)
class SurfaceJet:
    """Embedding and analytic tangents sampled on a grid; shapes (3, N, N)."""

    grid: Grid
    x: np.ndarray
    xu: np.ndarray
    xv: np.ndarray


def evaluate_surface(spec, grid: Grid) -> SurfaceJet:
    """Sample a parametrization and its tangents at all grid nodes."""
    x, xu, xv = spec.frame(grid.u_mesh, grid.v_mesh)
    return SurfaceJet(grid, x, xu, xv)


@dataclass(frozen=True)
class MetricGrids:
    """All pointwise geometry data used by the surface operators.

    The ``*_over_g`` ratios are the inverse-metric factors of the gradient
    (``guv_over_g`` is stored unsigned, the gradient applies its minus sign);
    the ``*_over_sqrtg`` grids and the spectral metric derivatives are the
    remaining pointwise operator coefficients.
    """

    grid: Grid
    x: np.ndarray
    xu: np.ndarray
    xv: np.ndarray
    guu: np.ndarray
    guv: np.ndarray
    gvv: np.ndarray
    g: np.ndarray
    sqrt_g: np.ndarray
    normal: np.ndarray
    du_g_over_2g: np.ndarray
    dv_g_over_2g: np.ndarray
    guu_over_g: np.ndarray
    guv_over_g: np.ndarray
    gvv_over_g: np.ndarray
    guu_over_sqrtg: np.ndarray
    guv_over_sqrtg: np.ndarray
    gvv_over_sqrtg: np.ndarray
    du_guv_over_sqrtg: np.ndarray
    dv_guv_over_sqrtg: np.ndarray
    dv_guu_over_sqrtg: np.ndarray
    du_gvv_over_sqrtg: np.ndarray

    @cached_property
    def area(self) -> float:
        """Surface area, h^2 sum sqrt(g)."""
        return float(self.grid.spacing**2 * self.sqrt_g.sum())


def build_metric(jet: SurfaceJet) -> MetricGrids:
    """Assemble metric entries, normal and operator coefficient grids.

    Raises
    ------
    ValueError
        If the parametrization is degenerate (min g <= 0 or min G_uu <= 0).
    """
    grid = jet.grid
    xu, xv = jet.xu, jet.xv
    guu = np.einsum("cij,cij->ij", xu, xu)
    guv = np.einsum("cij,cij->ij", xu, xv)
    gvv = np.einsum("cij,cij->ij", xv, xv)
    g = guu * gvv - guv**2
    if g.min() <= 0.0 or guu.min() <= 0.0:
        raise ValueError(
            "degenerate parametrization: "
            f"min g = {g.min():.3e}, min G_uu = {guu.min():.3e}"
        )
    sqrt_g = np.sqrt(g)
    normal = np.cross(xu, xv, axis=0) / sqrt_g

    du = 1j * grid.mode_u
    dv = 1j * grid.mode_v
    du_g = apply_mode_symbol(g, du)
    dv_g = apply_mode_symbol(g, dv)
    du_guv = apply_mode_symbol(guv, du)
    dv_guv = apply_mode_symbol(guv, dv)
    dv_guu = apply_mode_symbol(guu, dv)
    du_gvv = apply_mode_symbol(gvv, du)

    return MetricGrids(
        grid=grid,
        x=jet.x,
        xu=xu,
        xv=xv,
        guu=guu,
        guv=guv,
        gvv=gvv,
        g=g,
        sqrt_g=sqrt_g,
        normal=normal,
        du_g_over_2g=du_g / (2.0 * g),
        dv_g_over_2g=dv_g / (2.0 * g),
        guu_over_g=guu / g,
        guv_over_g=guv / g,
        gvv_over_g=gvv / g,
        guu_over_sqrtg=guu / sqrt_g,
        guv_over_sqrtg=guv / sqrt_g,
        gvv_over_sqrtg=gvv / sqrt_g,
        du_guv_over_sqrtg=du_guv / sqrt_g,
        dv_guv_over_sqrtg=dv_guv / sqrt_g,
        dv_guu_over_sqrtg=dv_guu / sqrt_g,
        du_gvv_over_sqrtg=du_gvv / sqrt_g,
    )


def flat_metric(grid: Grid) -> MetricGrids:
    """Metric of the flat torus (G = identity), used by the preconditioners."""
    n = grid.n
    ones = np.ones((n, n))
    zeros = np.zeros((n, n))
    jet = SurfaceJet(
        grid,
        x=np.stack([grid.u_mesh, grid.v_mesh, zeros]),
        xu=np.stack([ones, zeros, zeros]),
        xv=np.stack([zeros, ones, zeros]),
    )
    return build_metric(jet)
