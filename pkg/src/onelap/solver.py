"""Radial finite-difference solver for the regularized absorption problem.

The continuous target is the singular limit problem; what is actually solved
on each rung is the p-Laplacian surrogate with truncated absorption,

    -div(|Du|^(p-2) Du) + h_n(u) |Du|^p = T_n(g),   u = 0 on the boundary,

on a uniform radial grid over [0, R], with the gradient norm smoothed through
eps: phi(s) = (s^2 + eps^2)^((p-2)/2) s.  A continuation schedule drives
p -> 1, n -> infinity, eps -> 0, warm-starting each rung from the last.
Fluxes live on cell midpoints; the divergence is the finite-volume balance
over the cell [r_{i-1/2}, r_{i+1/2}] with exact cell averages of r^(N-1), so
a linear-in-r flux field has exactly constant discrete divergence.  Each rung
is solved by a damped Newton iteration on the exact tridiagonal Jacobian.

Deep rungs sit at the edge of what float64 can represent: the flux slope
d(phi)/d(slope) reaches 1/eps on the plateau, so moving a nodal value by one
ulp moves plateau residual rows by roughly ulp(u)/(eps dr^2).  The iteration
therefore stops either on a small residual or on a Newton step below float
resolution, and reports which; the eps floor below is chosen so that the
unavoidable plateau residual stays well under the verifier's tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.linalg import solve_banded

from .geometry import DomainSpec, sphere_area, unit_ball_volume
from .scalar import absorption_truncated, absorption_truncated_prime, truncate

__all__ = [
    "ProblemSpec",
    "RegularizationState",
    "RadialGrid",
    "DiscreteSolution",
    "ContinuationSchedule",
    "RungReport",
    "AprioriReport",
    "NonConvergence",
    "SingularJacobian",
    "regularized_flux",
    "regularized_flux_prime",
    "assemble_residual",
    "assemble_system",
    "newton_solve",
    "continuation_solve",
    "reconstruct_flux",
    "plateau_extent",
    "gradient_mass",
    "apriori_bounds_report",
    "schedule_preset",
    "solve_problem",
]

SourceTerm = Union[float, Callable[[np.ndarray], np.ndarray]]


class NonConvergence(RuntimeError):
    """Newton failed a rung; carries the last iterate so callers can still
    write a report."""

    def __init__(self, message, last=None, rung=None):
        super().__init__(message)
        self.last = last
        self.rung = rung


class SingularJacobian(RuntimeError):
    """The tridiagonal system lost rank, typically eps too small for the
    current p on an exact plateau."""


@dataclass(frozen=True)
class ProblemSpec:
    """Continuous problem data: domain, singular exponent, source.

    `source` is either a constant strength (the lam of the explicit
    solutions) or a callable returning nodal values of a radial profile g(r).
    """

    domain: DomainSpec
    gamma: float
    source: SourceTerm

    def __post_init__(self):
        if not float(self.gamma) > 0.0:
            raise ValueError(f"singular exponent must be positive, got {self.gamma!r}")
        if isinstance(self.source, (int, float)):
            if not float(self.source) >= 0.0:
                raise ValueError("source must be nonnegative")

    @property
    def constant_source(self) -> float | None:
        return float(self.source) if isinstance(self.source, (int, float)) else None

    def source_values(self, r: np.ndarray) -> np.ndarray:
        if isinstance(self.source, (int, float)):
            return np.full_like(np.asarray(r, dtype=float), float(self.source))
        g = np.asarray(self.source(np.asarray(r, dtype=float)), dtype=float)
        if g.shape != np.shape(r):
            raise ValueError("source profile must return one value per node")
        if np.any(g < 0.0):
            raise ValueError("source must be nonnegative")
        return g


@dataclass(frozen=True)
class RegularizationState:
    """One rung of the approximation ladder."""

    p: float
    n: int
    eps: float
    mesh_size: int

    def __post_init__(self):
        if not self.p > 1.0:
            raise ValueError(f"need p > 1, got {self.p!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"truncation level must be a positive integer, got {self.n!r}")
        if not self.eps > 0.0:
            raise ValueError(f"smoothing eps must be positive, got {self.eps!r}")
        if int(self.mesh_size) != self.mesh_size or self.mesh_size < 8:
            raise ValueError(f"mesh size must be an integer >= 8, got {self.mesh_size!r}")


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial mesh on [0, R] with exact finite-volume weights.

    node_weights[i] = (r_{i+1/2}^N - r_{i-1/2}^N) / (N dr), the cell average
    of r^(N-1), with r_{-1/2} taken as 0 so the origin row needs no special
    case beyond a vanishing inner flux.
    """

    dim: int
    radius: float
    mesh_size: int
    spacing: float = field(init=False)
    nodes: np.ndarray = field(init=False)
    midpoints: np.ndarray = field(init=False)
    node_weights: np.ndarray = field(init=False)
    midpoint_weights: np.ndarray = field(init=False)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim!r}")
        if not self.radius > 0.0:
            raise ValueError(f"radius must be positive, got {self.radius!r}")
        m = self.mesh_size
        if int(m) != m or m < 8:
            raise ValueError(f"mesh size must be an integer >= 8, got {m!r}")
        n = int(self.dim)
        dr = self.radius / m
        nodes = np.linspace(0.0, self.radius, m + 1)
        mids = 0.5 * (nodes[1:] + nodes[:-1])
        faces = np.concatenate(([0.0], mids))  # inner faces of cells 0..M-1
        outer = np.concatenate((mids, [self.radius]))
        cell_w = (outer**n - faces**n) / (n * dr)
        object.__setattr__(self, "spacing", dr)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "midpoints", mids)
        object.__setattr__(self, "node_weights", cell_w)  # one per node 0..M
        object.__setattr__(self, "midpoint_weights", mids ** (n - 1))

    @classmethod
    def uniform(cls, domain: DomainSpec, mesh_size: int) -> "RadialGrid":
        return cls(dim=domain.dim, radius=domain.radius, mesh_size=mesh_size)

    def cell_volumes(self) -> np.ndarray:
        """Radial cell measures (r_{i+1/2}^N - r_{i-1/2}^N)/N, one per node;
        they telescope exactly to R^N / N."""
        return self.node_weights * self.spacing


@dataclass(frozen=True)
class RungReport:
    """Per-rung continuation diagnostics, including the converged iterate."""

    index: int
    state: RegularizationState
    iterations: int
    residual_norm: float
    stop_reason: str  # "residual" or "stagnation"
    sup_norm: float
    gradient_mass: float  # discrete integral of |Du|^p
    plateau_radius: float
    solution: "DiscreteSolution"


@dataclass(frozen=True)
class DiscreteSolution:
    """Nodal state, midpoint flux, and nodal residual for one rung."""

    u: np.ndarray
    z: np.ndarray
    residual: np.ndarray
    state: RegularizationState
    converged: bool
    iterations: int
    residual_norm: float
    stop_reason: str = "residual"
    history: tuple = ()


@dataclass(frozen=True)
class ContinuationSchedule:
    states: tuple
    newton_tol: float = 1e-9
    step_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise ValueError("schedule needs at least one rung")
        object.__setattr__(self, "states", states)
        for a, b in zip(states, states[1:]):
            if not b.p < a.p:
                raise ValueError("schedule must decrease p strictly")
            if b.n < a.n:
                raise ValueError("schedule must not decrease n")
            if b.eps > a.eps:
                raise ValueError("schedule must not increase eps")
            if b.mesh_size != a.mesh_size:
                raise ValueError("schedule must keep one mesh")


def regularized_flux(s, p: float, eps: float):
    """Smoothed p-flux phi(s) = (s^2 + eps^2)^((p-2)/2) s."""
    s = np.asarray(s, dtype=float)
    return (s * s + eps * eps) ** ((p - 2.0) / 2.0) * s


def regularized_flux_prime(s, p: float, eps: float):
    """phi'(s) = (s^2 + eps^2)^((p-4)/2) ((p-1) s^2 + eps^2), positive."""
    s = np.asarray(s, dtype=float)
    t = s * s + eps * eps
    return t ** ((p - 4.0) / 2.0) * ((p - 1.0) * s * s + eps * eps)


def _check_iterate(grid: RadialGrid, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (grid.mesh_size + 1,):
        raise ValueError(f"state vector must have {grid.mesh_size + 1} nodes")
    if not np.all(np.isfinite(u)):
        raise ValueError("state vector must be finite")
    if u[-1] != 0.0:
        raise ValueError("boundary node must be exactly zero")
    return u


def _nodal_gradient_scale(D: np.ndarray, eps: float) -> np.ndarray:
    """q_i = sqrt of the mean of the two adjacent squared slopes plus eps^2;
    at the origin the reflected ghost slope makes the mean a plain square."""
    q = np.empty(D.size)
    q[0] = math.hypot(D[0], eps) if D.size else 0.0
    if D.size > 1:
        q[1:] = np.sqrt(0.5 * (D[:-1] ** 2 + D[1:] ** 2) + eps * eps)
    return q


def assemble_residual(
    spec: ProblemSpec, state: RegularizationState, grid: RadialGrid, u: np.ndarray
) -> np.ndarray:
    """Nodal residual of the discrete rung equations at nodes 0..M-1.

    residual_i = -(F_{i+1/2} - F_{i-1/2}) / (W_i dr) + h_n(u_i) q_i^p - g_n(r_i)
    with F the midpoint-weighted smoothed flux and F_{-1/2} = 0 (symmetry).
    """
    u = _check_iterate(grid, u)
    if state.mesh_size != grid.mesh_size:
        raise ValueError("state and grid disagree on the mesh")
    dr = grid.spacing
    m = grid.mesh_size
    D = np.diff(u) / dr
    F = grid.midpoint_weights * regularized_flux(D, state.p, state.eps)
    div = np.empty(m)
    div[0] = F[0] / (grid.node_weights[0] * dr)
    div[1:] = np.diff(F) / (grid.node_weights[1:m] * dr)
    q = _nodal_gradient_scale(D, state.eps)
    absorb = absorption_truncated(u[:m], state.n, spec.gamma) * q**state.p
    g = truncate(spec.source_values(grid.nodes), float(state.n))
    return -div + absorb - g[:m]


def assemble_system(
    spec: ProblemSpec, state: RegularizationState, grid: RadialGrid, u: np.ndarray
):
    """Residual plus its exact tridiagonal Jacobian in banded storage
    (rows: super, diagonal, sub) over the unknowns u_0..u_{M-1}."""
    u = _check_iterate(grid, u)
    if state.mesh_size != grid.mesh_size:
        raise ValueError("state and grid disagree on the mesh")
    dr = grid.spacing
    m = grid.mesh_size
    p, eps, n = state.p, state.eps, state.n
    D = np.diff(u) / dr
    phi = regularized_flux(D, p, eps)
    dphi = regularized_flux_prime(D, p, eps)
    mw = grid.midpoint_weights
    W = grid.node_weights[:m]
    F = mw * phi
    div = np.empty(m)
    div[0] = F[0] / (W[0] * dr)
    div[1:] = np.diff(F) / (W[1:] * dr)
    q = _nodal_gradient_scale(D, eps)
    h = absorption_truncated(u[:m], n, spec.gamma)
    dh = absorption_truncated_prime(u[:m], n, spec.gamma)
    qp = q**p
    g = truncate(spec.source_values(grid.nodes), float(n))
    residual = -div + h * qp - g[:m]

    # flux sensitivities scaled into each row
    c = mw * dphi  # one per midpoint
    qpm2 = q ** (p - 2.0)
    diag = np.empty(m)
    sub = np.zeros(m)
    sup = np.zeros(m)
    # origin row: only the right midpoint enters, and q_0 = hypot(D_0, eps)
    diag[0] = c[0] / (W[0] * dr * dr) + dh[0] * qp[0] - h[0] * p * qpm2[0] * D[0] / dr
    if m > 1:
        sup[0] = -c[0] / (W[0] * dr * dr) + h[0] * p * qpm2[0] * D[0] / dr
        Wd = W[1:] * dr * dr
        half = 0.5 / dr
        diag[1:] = (
            (c[1:] + c[:-1]) / Wd
            + dh[1:] * qp[1:]
            + h[1:] * p * qpm2[1:] * (D[:-1] - D[1:]) * half
        )
        sub[1:] = -c[:-1] / Wd - h[1:] * p * qpm2[1:] * D[:-1] * half
        sup[1:] = -c[1:] / Wd + h[1:] * p * qpm2[1:] * D[1:] * half
    ab = np.zeros((3, m))
    ab[0, 1:] = sup[:-1]
    ab[1, :] = diag
    ab[2, :-1] = sub[1:]
    return residual, ab


def reconstruct_flux(state: RegularizationState, grid: RadialGrid, u: np.ndarray) -> np.ndarray:
    """Midpoint flux z_{i+1/2} = phi(D_{i+1/2}), the discrete stand-in for
    |Du|^(p-2) Du whose p -> 1 limit is the certifying field."""
    u = _check_iterate(grid, u)
    return regularized_flux(np.diff(u) / grid.spacing, state.p, state.eps)


def _row_allowance(ab: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Smallest residual each row can express: moving one unknown by an ulp
    changes row i by up to rowsum|J_i| ulp(u).  On plateau rows the flux
    slope is phi'(0) ~ eps^(p-2), so this floor dwarfs any fixed tolerance;
    on moving rows it stays near machine precision."""
    rowsum = np.abs(ab[1]).copy()
    rowsum[:-1] += np.abs(ab[0][1:])
    rowsum[1:] += np.abs(ab[2][:-1])
    scale = 4.0 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(u))))
    return scale * rowsum


def newton_solve(
    spec: ProblemSpec,
    state: RegularizationState,
    grid: RadialGrid,
    u0: np.ndarray,
    tol: float = 1e-9,
    step_tol: float = 1e-12,
    max_iter: int = 200,
) -> DiscreteSolution:
    """Damped Newton on the rung equations from the iterate u0.

    Convergence is row-wise: every residual entry must drop below tol or
    below that row's float-resolution allowance, whichever is larger
    (stop_reason "residual" vs "float_floor").  A proposed step below
    step_tol relative to the iterate also stops the loop ("stagnation").
    Line search is Armijo backtracking with strict decrease on the
    allowance-weighted residual 2-norm; the weighting keeps plateau
    quantization noise at O(1) per row so progress on the few genuinely
    unconverged rows stays visible.  A dead end raises NonConvergence.
    """
    u = _check_iterate(grid, u0).copy()
    m = grid.mesh_size
    reason = None
    its = 0
    residual, ab = assemble_system(spec, state, grid, u)
    rmax = float(np.max(np.abs(residual)))
    for its in range(1, max_iter + 1):
        allow = np.maximum(tol, _row_allowance(ab, u))
        if np.all(np.abs(residual) <= allow):
            reason = "residual" if rmax <= tol else "float_floor"
            its -= 1
            break
        try:
            step = solve_banded((1, 1), ab, -residual)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobian("non-finite Newton step")
        if np.max(np.abs(step)) <= step_tol * (1.0 + np.max(np.abs(u))):
            reason = "stagnation"
            its -= 1
            break
        rnorm = float(np.linalg.norm(residual / allow))
        alpha = 1.0
        accepted = False
        for _ in range(50):
            trial = u.copy()
            trial[:m] += alpha * step
            trial_res = assemble_residual(spec, state, grid, trial)
            tnorm = float(np.linalg.norm(trial_res / allow))
            if tnorm < rnorm and tnorm <= (1.0 - 1e-4 * alpha) * rnorm:
                u = trial
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        residual, ab = assemble_system(spec, state, grid, u)
        rmax = float(np.max(np.abs(residual)))
    if reason is None:
        if rmax <= tol:
            reason = "residual"
        else:
            raise NonConvergence(
                f"Newton stalled at residual {rmax:.3e} "
                f"(p={state.p}, n={state.n}, eps={state.eps})",
                last=DiscreteSolution(
                    u=u,
                    z=reconstruct_flux(state, grid, u),
                    residual=residual,
                    state=state,
                    converged=False,
                    iterations=its,
                    residual_norm=rmax,
                    stop_reason="stalled",
                ),
            )
    return DiscreteSolution(
        u=u,
        z=reconstruct_flux(state, grid, u),
        residual=residual,
        state=state,
        converged=True,
        iterations=its,
        residual_norm=rmax,
        stop_reason=reason,
    )


def plateau_extent(grid: RadialGrid, u: np.ndarray, slope_floor: float = 1e-6) -> float:
    """Radius of the flat core: the last node before the first midpoint whose
    slope magnitude exceeds the floor, the full radius if none does."""
    D = np.diff(u) / grid.spacing
    steep = np.nonzero(np.abs(D) > slope_floor)[0]
    if steep.size == 0:
        return grid.radius
    if steep[0] == 0:
        return 0.0
    return float(grid.nodes[steep[0]])


def gradient_mass(grid: RadialGrid, u: np.ndarray, p: float) -> float:
    """Discrete integral of |Du|^p over the domain (midpoint rule with the
    full sphere factor)."""
    D = np.diff(u) / grid.spacing
    return float(
        sphere_area(grid.dim)
        * grid.spacing
        * np.sum(grid.midpoint_weights * np.abs(D) ** p)
    )


def continuation_solve(
    spec: ProblemSpec, schedule: ContinuationSchedule, grid: RadialGrid
) -> DiscreteSolution:
    """Solve the schedule in order, warm-starting each rung, and return the
    final rung's solution with a full per-rung history attached."""
    u = np.zeros(grid.mesh_size + 1)
    history = []
    sol = None
    prev_eps = None
    for k, st in enumerate(schedule.states):
        # A sub-threshold state is regularization dust: on the trivial branch
        # the profile scales linearly with eps, so rescale the warm start when
        # eps drops.  Otherwise the stale slopes sit far above the new eps,
        # the flux saturates, and Newton overshoots toward a spurious bump.
        if prev_eps is not None and st.eps < prev_eps:
            if float(np.max(np.abs(u))) <= 1e-4:
                u = u * (st.eps / prev_eps)
        prev_eps = st.eps
        try:
            sol = newton_solve(
                spec,
                st,
                grid,
                u,
                tol=schedule.newton_tol,
                step_tol=schedule.step_tol,
                max_iter=schedule.max_iter,
            )
        except NonConvergence as exc:
            exc.rung = k
            raise
        u = sol.u
        history.append(
            RungReport(
                index=k,
                state=st,
                iterations=sol.iterations,
                residual_norm=sol.residual_norm,
                stop_reason=sol.stop_reason,
                sup_norm=float(np.max(np.abs(u))),
                gradient_mass=gradient_mass(grid, u, st.p),
                plateau_radius=plateau_extent(grid, u),
                solution=sol,
            )
        )
    return DiscreteSolution(
        u=sol.u,
        z=sol.z,
        residual=sol.residual,
        state=sol.state,
        converged=True,
        iterations=sol.iterations,
        residual_norm=sol.residual_norm,
        stop_reason=sol.stop_reason,
        history=tuple(history),
    )


@dataclass(frozen=True)
class AprioriReport:
    """Discrete analogues of the energy bounds: the p-gradient mass and the
    absorption mass are both controlled by the source mass."""

    gradient_mass: float
    absorption_mass: float
    source_mass: float
    slack: float
    gradient_bound_ok: bool
    absorption_bound_ok: bool


def apriori_bounds_report(
    spec: ProblemSpec,
    state: RegularizationState,
    grid: RadialGrid,
    u: np.ndarray,
    slack: float = 0.05,
) -> AprioriReport:
    u = _check_iterate(grid, u)
    m = grid.mesh_size
    dr = grid.spacing
    area = sphere_area(grid.dim)
    grad = gradient_mass(grid, u, state.p)
    D = np.diff(u) / dr
    q = _nodal_gradient_scale(D, state.eps)
    h = absorption_truncated(u[:m], state.n, spec.gamma)
    vols = grid.cell_volumes()
    absorb = float(area * np.sum(h * q**state.p * vols[:m]))
    lam = spec.constant_source
    if lam is not None:
        # exact mass lam * omega_N * R^N for a constant source
        source = lam * unit_ball_volume(grid.dim) * grid.radius**grid.dim
    else:
        source = float(area * np.sum(spec.source_values(grid.nodes) * vols))
    budget = source * (1.0 + slack)
    return AprioriReport(
        gradient_mass=grad,
        absorption_mass=absorb,
        source_mass=source,
        slack=slack,
        gradient_bound_ok=grad <= budget,
        absorption_bound_ok=absorb <= budget,
    )


_PRESET_P = {
    "fast": (1.5, 1.2, 1.05, 1.01, 1.003, 1.001),
    "default": (
        1.5,
        1.3,
        1.1,
        1.05,
        1.01,
        1.003,
        1.001,
        1.0003,
        1.0001,
        1.00003,
        1.00001,
        1.000003,
        1.000001,
    ),
    "tight": (
        1.5,
        1.3,
        1.1,
        1.05,
        1.01,
        1.003,
        1.001,
        1.0003,
        1.0001,
        1.00003,
        1.00001,
        1.000003,
        1.000001,
        1.0000003,
        1.0000001,
    ),
}


def schedule_preset(name: str, mesh_size: int) -> ContinuationSchedule:
    """Named continuation ladders.  n grows by decades from 100 up to 1e6;
    eps follows (p-1)^2 clamped into [1e-8, 1e-3].  The deep tail of the
    default ladder is what collapses boundary layers of width (p-1) below
    mesh resolution, which the rigidity and plateau tests rely on; the eps
    floor keeps plateau slopes two decades under the slope floor used for
    plateau detection while staying coarse enough that float64 can still
    resolve the plateau flux profile."""
    try:
        ps = _PRESET_P[name]
    except KeyError:
        raise ValueError(f"unknown schedule preset {name!r}") from None
    states = tuple(
        RegularizationState(
            p=p,
            n=min(100 * 10**k, 1_000_000),
            eps=min(max((p - 1.0) ** 2, 1e-8), 1e-3),
            mesh_size=mesh_size,
        )
        for k, p in enumerate(ps)
    )
    return ContinuationSchedule(states=states)


def solve_problem(
    spec: ProblemSpec, mesh_size: int, preset: str = "default"
) -> DiscreteSolution:
    """Convenience wrapper: uniform grid plus a named schedule."""
    grid = RadialGrid.uniform(spec.domain, mesh_size)
    return continuation_solve(spec, schedule_preset(preset, mesh_size), grid)
