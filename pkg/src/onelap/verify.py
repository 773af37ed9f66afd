"""Certification of candidate (state, flux) pairs against the checkable
clauses of the limit problem.

A candidate is a nodal state u with u = 0 at the outer boundary and a
midpoint flux z.  The clauses checked: the flux bound |z| <= 1; the pairing
identity z . Du = |Du| wherever the slope is numerically nonzero; the
equation -div(z) + |Du|/(1-u)^gamma = g; the boundary trace; and, for
gamma = 1 with a constant source, the energy identity and the logarithmic
substitution inequality that drives the rigidity threshold.

The equation clause is reported two ways but certified by one.  The
pointwise residual uses the same finite-volume divergence stencil as the
solver and is the headline diagnostic; it cannot carry the verdict, for two
reasons seen on real end states.  On a plateau the flux is determined by an
integral identity and pointwise differencing of a float-quantized flux
amplifies ulp noise by 1/dr; and around the free boundary the regularized
state smooths the kink over a band of cells whose slopes are neither
plateau-small nor genuinely moving, so no slope threshold isolates rows
where the pointwise equation should hold.  The verdict therefore rests on
the integrated flux balance r^(N-1) z(r) = int_0^r rho^(N-1)
(absorption - g) drho over all rows, which is the measure-faithful reading
of the equation and is immune to both effects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import oracle
from .geometry import (cheeger_bounds, sobolev_constant, sphere_area,
                       unit_ball_volume)
from .scalar import absorption_exact, remainder
from .solver import DiscreteSolution, ProblemSpec, RadialGrid, plateau_extent

__all__ = [
    "Tolerances",
    "VerificationReport",
    "LevelSetRecord",
    "LogSubstitutionReport",
    "GridMismatch",
    "verify",
    "pointwise_residual",
    "energy_identity_check",
    "logsub_cheeger_check",
    "level_set_decay_check",
    "sampled_explicit",
    "sampled_trivial",
]

_trapz = getattr(np, "trapezoid", None) or np.trapz

# States below this sup-norm stand for the zero solution.  The continuation
# leaves regularization dust of order eps on trivial branches; ratios of the
# two near-zero integrals in the scalar identities are then meaningless, so
# both identity checks short-circuit to their exact u = 0 values.  Matches
# the rigidity detection threshold used by the acceptance experiments.
ZERO_STATE_FLOOR = 1e-6


class GridMismatch(ValueError):
    """Candidate arrays do not fit the grid they are checked on."""


@dataclass(frozen=True)
class Tolerances:
    """Defect budgets for the verdicts.  The defaults are calibrated for
    closed-form samplings, where every error is pure discretization; use
    `for_solver` when the continuation schedule, not the mesh, limits
    accuracy."""

    field_bound: float = 2e-3
    pairing: float = 2e-3
    equation: float = 2e-3
    trace: float = 1e-12
    energy: float = 1e-3
    cheeger_slack: float = 1e-3
    slope_floor: float = 1e-6

    @classmethod
    def for_solver(cls) -> "Tolerances":
        # the continuation end state carries regularization error on top of
        # discretization error: the integrated equation defect collects the
        # free-boundary band and plateau quantization noise, and the energy
        # identity inherits the h_n truncation gap
        return cls(equation=1e-2, energy=2e-2)


@dataclass(frozen=True)
class LogSubstitutionReport:
    lhs: float
    rhs: float
    holds: bool
    pointwise_ok: bool


@dataclass(frozen=True)
class VerificationReport:
    field_bound_defect: float
    pairing_defect: float
    equation_residual: float
    equation_residual_moving: float
    flux_balance_defect: float
    trace_value: float
    max_jump: float
    plateau_radius_estimate: float
    energy_gap: Optional[float]
    log_substitution: Optional[LogSubstitutionReport]
    verdicts: dict
    passed: bool


def _radial_integral(grid: RadialGrid, values: np.ndarray) -> float:
    """Trapezoidal integral of a nodal field over the domain, radial weight
    r^(N-1) times the unit-sphere area."""
    w = grid.nodes ** (grid.dim - 1)
    return float(sphere_area(grid.dim) * _trapz(values * w, dx=grid.spacing))


def _unpack(candidate, grid: RadialGrid):
    if isinstance(candidate, DiscreteSolution):
        u, z = candidate.u, candidate.z
    else:
        u, z = candidate
    u = np.asarray(u, dtype=float)
    z = np.asarray(z, dtype=float)
    m = grid.mesh_size
    if u.shape != (m + 1,):
        raise GridMismatch(f"state has {u.size} nodes, grid wants {m + 1}")
    if z.shape != (m,):
        raise GridMismatch(f"flux has {z.size} midpoints, grid wants {m}")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(z))):
        raise ValueError("candidate must be finite")
    return u, z


def _centered_slopes(grid: RadialGrid, u: np.ndarray) -> np.ndarray:
    """Nodal slope estimates at nodes 0..M-1: averages of adjacent midpoint
    slopes, zero at the origin by symmetry."""
    D = np.diff(u) / grid.spacing
    s = np.empty(grid.mesh_size)
    s[0] = 0.0
    s[1:] = 0.5 * (D[:-1] + D[1:])
    return s


def energy_identity_check(candidate, spec: ProblemSpec, grid: RadialGrid) -> float:
    """Relative gap in the identity int |Du|/(1-u) = lam int u, stated for
    gamma = 1 with a constant source."""
    lam = spec.constant_source
    if float(spec.gamma) != 1.0 or lam is None:
        raise ValueError("energy identity is stated for gamma = 1 with a constant source")
    u, _ = _unpack(candidate, grid)
    if np.any(u >= 1.0):
        raise ValueError("state must stay strictly below 1")
    if float(np.max(np.abs(u))) <= ZERO_STATE_FLOOR:
        return 0.0
    s = np.concatenate((_centered_slopes(grid, u), [(u[-1] - u[-2]) / grid.spacing]))
    density = np.abs(s) / (1.0 - np.clip(u, 0.0, None))
    lhs = _radial_integral(grid, density)
    rhs = lam * _radial_integral(grid, u)
    return abs(lhs - rhs) / max(rhs, 1e-14)


def logsub_cheeger_check(
    candidate, spec: ProblemSpec, grid: RadialGrid, slack: float = 1e-3
) -> LogSubstitutionReport:
    """The rigidity mechanism: with v = -log(1-u), the Cheeger inequality
    gives h(Omega) int v <= int |Dv| = lam int u, and v >= u pointwise."""
    lam = spec.constant_source
    if float(spec.gamma) != 1.0 or lam is None:
        raise ValueError("log substitution is stated for gamma = 1 with a constant source")
    u, _ = _unpack(candidate, grid)
    if np.any(u >= 1.0):
        raise ValueError("state must stay strictly below 1")
    if float(np.max(np.abs(u))) <= ZERO_STATE_FLOOR:
        return LogSubstitutionReport(lhs=0.0, rhs=0.0, holds=True, pointwise_ok=True)
    uc = np.clip(u, 0.0, None)
    v = -np.log1p(-uc)
    h = cheeger_bounds(spec.domain).exact
    lhs = h * _radial_integral(grid, v)
    rhs = lam * _radial_integral(grid, uc)
    holds = lhs <= rhs * (1.0 + slack) + 1e-14
    return LogSubstitutionReport(
        lhs=lhs, rhs=rhs, holds=bool(holds), pointwise_ok=bool(np.all(v >= uc))
    )


def _defect_parts(u, z, spec: ProblemSpec, grid: RadialGrid):
    """Shared core: exact-absorption density, FV divergence, residual rows.
    States touching 1 get infinite absorption rows (outside the admissible
    class); small negative values are clipped before evaluating (1-u)^-gamma."""
    m = grid.mesh_size
    dr = grid.spacing
    g = spec.source_values(grid.nodes)[:m]
    subunit = bool(np.all(u < 1.0))
    s = _centered_slopes(grid, u)
    if subunit:
        absorb = np.abs(s) * absorption_exact(np.clip(u[:m], 0.0, None), spec.gamma)
    else:
        absorb = np.full(m, np.inf)
    F = grid.midpoint_weights * z
    div = np.empty(m)
    div[0] = F[0] / (grid.node_weights[0] * dr)
    div[1:] = np.diff(F) / (grid.node_weights[1:m] * dr)
    return -div + absorb - g, F, absorb, g, subunit


def pointwise_residual(candidate, spec: ProblemSpec, grid: RadialGrid) -> np.ndarray:
    """Exact-absorption residual -div(z) + |Du|/(1-u)^gamma - g at rows
    0..M-1; the boundary node carries no equation row."""
    u, z = _unpack(candidate, grid)
    residual, _, _, _, _ = _defect_parts(u, z, spec, grid)
    return residual


def verify(candidate, spec: ProblemSpec, grid: RadialGrid, tol: Tolerances | None = None) -> VerificationReport:
    """Run every clause check on a candidate (DiscreteSolution, or a pair of
    nodal state and midpoint flux) and assemble the verdicts."""
    if tol is None:
        tol = Tolerances()
    if spec.domain.dim != grid.dim or spec.domain.radius != grid.radius:
        raise GridMismatch("problem domain and grid disagree")
    u, z = _unpack(candidate, grid)
    m = grid.mesh_size
    dr = grid.spacing

    field_defect = max(0.0, float(np.max(np.abs(z))) - 1.0)

    D = np.diff(u) / dr
    live = np.abs(D) > tol.slope_floor
    if np.any(live):
        pairing_defect = float(np.max(np.abs(1.0 - z[live] * np.sign(D[live]))))
    else:
        pairing_defect = 0.0

    trace_value = abs(float(u[-1]))
    max_jump = float(np.max(np.abs(np.diff(u))))

    residual, F, absorb, g, subunit = _defect_parts(u, z, spec, grid)
    equation_residual = float(np.max(np.abs(residual)))

    # rows whose both adjacent slopes are live; row 0 pairs its single slope
    # with its mirror image, so it is moving only if D_0 is
    moving = np.empty(m, dtype=bool)
    moving[0] = live[0]
    moving[1:] = live[:-1] & live[1:]
    equation_moving = float(np.max(np.abs(residual[moving]))) if np.any(moving) else 0.0

    vols = grid.cell_volumes()
    if subunit:
        balance = F - np.cumsum((absorb - g) * vols[:m])
        flux_balance_defect = float(np.max(np.abs(balance)))
    else:
        flux_balance_defect = math.inf

    plateau = plateau_extent(grid, u, tol.slope_floor)

    lam = spec.constant_source
    scalar_checks = float(spec.gamma) == 1.0 and lam is not None and subunit
    energy_gap = energy_identity_check((u, z), spec, grid) if scalar_checks else None
    logsub = (
        logsub_cheeger_check((u, z), spec, grid, tol.cheeger_slack)
        if scalar_checks
        else None
    )

    verdicts = {
        "field_bound": field_defect <= tol.field_bound,
        "pairing": pairing_defect <= tol.pairing,
        "equation": flux_balance_defect <= tol.equation,
        "trace": trace_value <= tol.trace,
        "energy": energy_gap <= tol.energy if energy_gap is not None else True,
        "log_substitution": (logsub.holds and logsub.pointwise_ok)
        if logsub is not None
        else True,
    }
    return VerificationReport(
        field_bound_defect=field_defect,
        pairing_defect=pairing_defect,
        equation_residual=equation_residual,
        equation_residual_moving=equation_moving,
        flux_balance_defect=flux_balance_defect,
        trace_value=trace_value,
        max_jump=max_jump,
        plateau_radius_estimate=plateau,
        energy_gap=energy_gap,
        log_substitution=logsub,
        verdicts=verdicts,
        passed=bool(all(verdicts.values())),
    )


@dataclass(frozen=True)
class LevelSetRecord:
    level: float
    tail_mass: float
    superlevel_measure: float
    holds: bool


def level_set_decay_check(
    candidate,
    state,
    spec: ProblemSpec,
    grid: RadialGrid,
    tol: float = 0.1,
    levels: int = 9,
) -> tuple:
    """Check the superlevel-set decay bound
    int (u-k)^+ <= (S(N,p) ||g||_N)^(1/(p-1)) |{u > k}|^(1 + 1/N)
    on a ladder of levels below max u.  Comparison happens in log space: in
    the strict-smallness regime the right side underflows float64 long
    before the inequality becomes false.  States that are zero to working
    precision give the empty tuple (every clause is vacuous)."""
    if grid.dim < 2:
        raise ValueError("level-set decay needs dimension >= 2")
    p = float(state.p)
    if not 1.0 < p < grid.dim:
        raise ValueError(f"level-set decay needs 1 < p < dim, got p={p}")
    u, _ = _unpack(candidate, grid)
    top = float(np.max(u))
    # The vacuity floor scales with eps here: trivial-branch dust is an
    # O(eps) artifact of the gradient smoothing, while the decay coefficient
    # collapses doubly exponentially as p -> 1.  A state below dust scale
    # says nothing about the unsmoothed problem, so it stands for zero.
    if top <= max(ZERO_STATE_FLOOR, 10.0 * float(state.eps)):
        return ()
    area_factor = 1.0 + 1.0 / grid.dim
    g = spec.source_values(grid.nodes)
    lam = spec.constant_source
    if lam is not None:
        g_ln = lam * (unit_ball_volume(grid.dim) * grid.radius**grid.dim) ** (
            1.0 / grid.dim
        )
    else:
        g_ln = _radial_integral(grid, g**grid.dim) ** (1.0 / grid.dim)
    log_coef = math.log(sobolev_constant(grid.dim, p) * g_ln) / (p - 1.0)
    vols = grid.cell_volumes()
    area = sphere_area(grid.dim)
    out = []
    for j in range(1, levels + 1):
        k = top * j / (levels + 1)
        tail = _radial_integral(grid, np.abs(remainder(np.clip(u, 0.0, None), k)))
        measure = float(area * np.sum(vols[np.clip(u, 0.0, None) > k]))
        if tail <= 0.0:
            holds = True
        elif measure <= 0.0:
            holds = False
        else:
            holds = math.log(tail) <= log_coef + area_factor * math.log(
                measure
            ) + math.log1p(tol)
        out.append(
            LevelSetRecord(
                level=k, tail_mass=tail, superlevel_measure=measure, holds=bool(holds)
            )
        )
    return tuple(out)


def sampled_explicit(grid: RadialGrid, lam: float):
    """Closed-form candidate on a unit-ball grid: nodal state, midpoint
    flux."""
    if grid.radius != 1.0:
        raise ValueError("explicit solutions are given on the unit ball")
    u = oracle.profile(grid.dim, lam, grid.nodes)
    z = oracle.flux(grid.dim, lam, grid.midpoints)
    return np.asarray(u), np.asarray(z)


def sampled_trivial(grid: RadialGrid, lam: float):
    """The zero state with its certifying flux, for lam <= dim."""
    if grid.radius != 1.0:
        raise ValueError("explicit solutions are given on the unit ball")
    u = np.zeros(grid.mesh_size + 1)
    z = oracle.trivial_flux(grid.dim, lam, grid.midpoints)
    return u, np.asarray(z)
