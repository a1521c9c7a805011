"""Krylov solver, flat-torus preconditioners, and the harmonic-field basis.

The Laplace-Beltrami equation is rank-one deficient on a closed surface, so
it is solved in the stabilized form (L + c c^T) phi = b whose unique solution
is the mean-zero one.  The preconditioner is the exact inverse of the flat
(identity metric) counterpart, which is diagonal in Fourier space; with it,
BiCGStab iteration counts stay essentially independent of the grid size.

A harmonic tangential field is computed as a null vector of the stacked
(div; curl) operator via a rank-two random perturbation: solve
(A + R S^T) F = A Q for random R, S, Q; then F - Q lies in the nullspace of A
with probability one.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import MetricGrids
from .operators import (
    TangentField,
    cross_normal,
    div_and_curl,
    inner_product_scalar,
    inner_product_vector,
    laplace_beltrami,
    scalar_norm,
)
from .spectral import Grid, dft2_forward, dft2_inverse

__all__ = [
    "KrylovConfig",
    "SolveReport",
    "SolverError",
    "BreakdownError",
    "NonConvergenceError",
    "DegenerateNullVectorError",
    "bicgstab",
    "flat_lb_apply",
    "flat_lb_inverse",
    "flat_field_apply",
    "flat_field_pseudoinverse",
    "solve_laplace_beltrami",
    "harmonic_basis",
]


class SolverError(RuntimeError):
    """Base class for iterative-solver failures."""


class BreakdownError(SolverError):
    """BiCGStab recurrence broke down (rho or omega numerically zero)."""


class NonConvergenceError(SolverError):
    """Iteration budget exhausted before reaching the tolerance."""


class DegenerateNullVectorError(SolverError):
    """Randomized nullspace solve returned F close to Q; retry with a new seed."""


@dataclass(frozen=True)
class KrylovConfig:
    """Iteration controls and the seed for the randomized nullspace draw."""

    rel_tolerance: float = 1e-13
    max_iterations: int = 500
    rng_seed: int = 7

    def __post_init__(self) -> None:
        if self.rel_tolerance <= 0:
            raise ValueError("rel_tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class SolveReport:
    """Outcome of one Krylov solve.

    ``final_relative_residual`` is the true preconditioned residual
    ||M(A x - b)|| / ||M b||, recomputed after the iteration.
    ``dropped_mean`` is the relative magnitude of any mean component removed
    from the right-hand side (Laplace-Beltrami solves only).
    """

    iterations: int
    final_relative_residual: float
    wall_time: float
    dropped_mean: float = 0.0


def bicgstab(apply_op, precond, b, cfg: KrylovConfig):
    """Preconditioned BiCGStab for the left-preconditioned system M A x = M b.

    Parameters
    ----------
    apply_op, precond : callables mapping a 1D vector to a 1D vector
        The linear operator A and preconditioner M (pass ``None`` for M = I).
    b : 1D array
    cfg : KrylovConfig

    Returns
    -------
    (x, SolveReport) with ||M(A x - b)|| <= rel_tolerance * ||M b|| on return.

    Raises
    ------
    BreakdownError
        On a zero rho or omega in the recurrence.
    NonConvergenceError
        If max_iterations steps do not reach the tolerance.
    """
    if precond is None:
        precond = lambda vec: vec

    def composed(vec):
        return precond(apply_op(vec))

    start = time.perf_counter()
    d = precond(np.asarray(b, dtype=float))
    d_norm = np.linalg.norm(d)
    if d_norm == 0.0:
        return np.zeros_like(d), SolveReport(0, 0.0, time.perf_counter() - start)
    threshold = cfg.rel_tolerance * d_norm

    x = np.zeros_like(d)
    total_steps = 0
    while True:
        # (re)start from the true residual; BiCGStab recursion drift can make
        # the recursive residual optimistic near the floor
        r = d - composed(x)
        true_norm = np.linalg.norm(r)
        if true_norm <= threshold:
            break
        if total_steps >= cfg.max_iterations:
            raise NonConvergenceError(
                f"no convergence in {total_steps} iterations: "
                f"residual {true_norm / d_norm:.3e} > tol {cfg.rel_tolerance:.1e}"
            )
        r_shadow = r.copy()
        rho = alpha = omega = 1.0
        p = None
        vee = None
        while total_steps < cfg.max_iterations:
            rho_next = float(r_shadow @ r)
            if rho_next == 0.0 or not np.isfinite(rho_next):
                raise BreakdownError(f"rho breakdown at iteration {total_steps}")
            if p is None:
                p = r.copy()
            else:
                beta = (rho_next / rho) * (alpha / omega)
                p = r + beta * (p - omega * vee)
            rho = rho_next
            vee = composed(p)
            rv = float(r_shadow @ vee)
            if rv == 0.0 or not np.isfinite(rv):
                raise BreakdownError(f"rho breakdown at iteration {total_steps}")
            alpha = rho / rv
            s = r - alpha * vee
            total_steps += 1
            if np.linalg.norm(s) <= threshold:
                x = x + alpha * p
                break
            t = composed(s)
            tt = float(t @ t)
            if tt == 0.0 or not np.isfinite(tt):
                raise BreakdownError(f"omega breakdown at iteration {total_steps}")
            omega = float(t @ s) / tt
            if omega == 0.0:
                raise BreakdownError(f"omega breakdown at iteration {total_steps}")
            x = x + alpha * p + omega * s
            r = s - omega * t
            if np.linalg.norm(r) <= threshold:
                break

    final = np.linalg.norm(d - composed(x)) / d_norm
    report = SolveReport(total_steps, float(final), time.perf_counter() - start)
    return x, report


def _flat_lb_symbols(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Forward and inverse symbols of the stabilized flat operator
    Delta_flat + ones ones^T, whose Fourier form is -(m^2+n^2) off the zero
    mode and N^2 at it."""
    msq = grid.mode_sq.astype(float)
    forward = -msq.copy()
    forward[0, 0] = grid.n**2
    inverse = np.empty_like(msq)
    inverse[msq > 0] = -1.0 / msq[msq > 0]
    inverse[0, 0] = 1.0 / grid.n**2
    return forward, inverse


def flat_lb_apply(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Apply the stabilized flat Laplacian Delta_flat + ones ones^T."""
    forward, _ = _flat_lb_symbols(grid)
    return dft2_inverse(forward * dft2_forward(values))


def flat_lb_inverse(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Exact inverse of the stabilized flat Laplacian.

    Fourier-diagonal: coeff -> -coeff/(m^2+n^2) off the zero mode; the zero
    mode is scaled by 1/N^2 so the map inverts flat_lb_apply exactly.
    """
    _, inverse = _flat_lb_symbols(grid)
    return dft2_inverse(inverse * dft2_forward(values))


def flat_field_apply(grid: Grid, field: TangentField) -> TangentField:
    """Stacked (div; curl) operator of the flat torus: per mode the 2x2 block
    [[im, in], [-in, im]]."""
    c1 = dft2_forward(field.f1)
    c2 = dft2_forward(field.f2)
    im = 1j * grid.mode_u
    iv = 1j * grid.mode_v
    return TangentField(
        dft2_inverse(im * c1 + iv * c2),
        dft2_inverse(-iv * c1 + im * c2),
    )


def flat_field_pseudoinverse(grid: Grid, field: TangentField) -> TangentField:
    """Per-mode inverse of the flat (div; curl) blocks.

    Each nonzero mode inverts [[im, in], [-in, im]] (determinant
    -(m^2+n^2)); the zero-mode block is the identity, the regularized
    reading of a formally singular diagonal.
    """
    c1 = dft2_forward(field.f1)
    c2 = dft2_forward(field.f2)
    im = 1j * grid.mode_u
    iv = 1j * grid.mode_v
    det = -grid.mode_sq.astype(float)
    det[0, 0] = 1.0
    out1 = (im * c1 - iv * c2) / det
    out2 = (iv * c1 + im * c2) / det
    out1[0, 0] = c1[0, 0]
    out2[0, 0] = c2[0, 0]
    return TangentField(dft2_inverse(out1), dft2_inverse(out2))


def solve_laplace_beltrami(metric: MetricGrids, b: np.ndarray, cfg: KrylovConfig | None = None):
    """Solve the Laplace-Beltrami equation for the mean-zero potential.

    The right-hand side should be (discretely) mean-zero; any mean component
    is projected out, reported in ``SolveReport.dropped_mean`` and warned
    about when it exceeds 1e-10 of ||b||.  The stabilized system
    (L + c c^T) phi = b, with c the quadrature-weighted sqrt(g) node vector,
    is solved by BiCGStab with the flat inverse as preconditioner; the
    returned potential satisfies <phi, 1> ~= 0 in the surface inner product.
    """
    if cfg is None:
        cfg = KrylovConfig()
    grid = metric.grid
    ones = np.ones_like(b)
    mean_part = inner_product_scalar(metric, b, ones) / metric.area
    b0 = b - mean_part
    norm_b = scalar_norm(metric, b)
    dropped = abs(mean_part) * np.sqrt(metric.area) / norm_b if norm_b > 0 else 0.0
    if dropped > 1e-10:
        warnings.warn(
            f"right-hand side has a mean component of relative size {dropped:.2e}; "
            "it was projected out",
            stacklevel=2,
        )

    c_vec = (grid.spacing * metric.sqrt_g).ravel()

    def apply_op(vec):
        phi = vec.reshape(grid.n, grid.n)
        out = laplace_beltrami(metric, phi).ravel()
        return out + c_vec * (c_vec @ vec)

    def precond(vec):
        return flat_lb_inverse(grid, vec.reshape(grid.n, grid.n)).ravel()

    x, report = bicgstab(apply_op, precond, b0.ravel(), cfg)
    report.dropped_mean = float(dropped)
    return x.reshape(grid.n, grid.n), report


def harmonic_basis(metric: MetricGrids, cfg: KrylovConfig | None = None):
    """Compute a basis (h1, h2) of the harmonic tangential fields.

    Solves the randomly perturbed nullspace system for the stacked
    (div; curl) operator, preconditioned blockwise by the flat pseudoinverse.
    h1 is the null vector normalized to unit vector-L2 norm and h2 = n x h1.

    Raises
    ------
    DegenerateNullVectorError
        If the null vector is numerically zero (retry with another seed).
    """
    if cfg is None:
        cfg = KrylovConfig()
    f_vec, q_vec, _, report = _perturbed_nullspace_solve(metric, cfg)
    null_vec = f_vec - q_vec
    if np.linalg.norm(null_vec) <= 1e-8 * np.linalg.norm(q_vec):
        raise DegenerateNullVectorError(
            "null vector is numerically zero; retry with a different rng_seed"
        )
    h1 = TangentField.from_ravel(null_vec, metric.grid.n)
    h1 = h1 * (1.0 / np.sqrt(inner_product_vector(metric, h1, h1)))
    h2 = cross_normal(metric, h1)
    return h1, h2, report


def _perturbed_nullspace_solve(metric: MetricGrids, cfg: KrylovConfig):
    """Solve (A + R S^T) F = A Q; returns (F, Q, S, report)."""
    grid = metric.grid
    n = grid.n
    rng = np.random.default_rng(cfg.rng_seed)
    r_mat = rng.standard_normal((2 * n * n, 2))
    s_mat = rng.standard_normal((2 * n * n, 2))
    q_vec = rng.standard_normal(2 * n * n)

    def apply_a(vec):
        field = TangentField.from_ravel(vec, n)
        divergence, rotation = div_and_curl(metric, field)
        return np.concatenate([divergence.ravel(), rotation.ravel()])

    def apply_perturbed(vec):
        return apply_a(vec) + r_mat @ (s_mat.T @ vec)

    def precond(vec):
        out = flat_field_pseudoinverse(grid, TangentField.from_ravel(vec, n))
        return out.ravel()

    f_vec, report = bicgstab(apply_perturbed, precond, apply_a(q_vec), cfg)
    return f_vec, q_vec, s_mat, report
