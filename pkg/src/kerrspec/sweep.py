"""Sector-resolved spectra over 1-D parameter grids.

Each grid point is an independent unit of work: expand the parameter record,
assemble, split into the sweep's common symmetry sectors, diagonalize, and
certify truncation convergence against the probe basis.  Points may be
evaluated concurrently; results are merged by grid index, so the output is
identical for any evaluation order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .eigensolve import DEFAULT_N_MAX, DEFAULT_N_PROBE, DEFAULT_TOL_CONV, eigen
from .fock import COUPLING_FIELDS, FockSpace, HamiltonianSpec, assemble, standard_hamiltonian
from .sectors import MOD_ALL, detect_modulus, split

__all__ = [
    "SweepPlan",
    "SpectrumGrid",
    "run_sweep",
    "refine_near",
    "plan_modulus",
    "sector_levels_at",
]

_NORMALIZE_MODES = ("absolute", "excitation")


@dataclass(frozen=True)
class SweepPlan:
    """One varying parameter over a strictly increasing grid."""

    varying: str
    grid: tuple[float, ...]
    fixed: HamiltonianSpec = field(default_factory=HamiltonianSpec)
    n_max: int = DEFAULT_N_MAX
    n_probe: int = DEFAULT_N_PROBE
    tol_conv: float = DEFAULT_TOL_CONV
    normalize: str = "excitation"

    def __post_init__(self) -> None:
        if self.varying not in COUPLING_FIELDS:
            raise ValueError(f"unknown sweep parameter {self.varying!r}")
        grid = tuple(float(g) for g in self.grid)
        if len(grid) < 2:
            raise ValueError("grid needs at least two points")
        if not all(math.isfinite(g) for g in grid):
            raise ValueError("grid values must be finite")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid must be strictly increasing")
        if self.normalize not in _NORMALIZE_MODES:
            raise ValueError(f"normalize must be one of {_NORMALIZE_MODES}")
        if self.n_probe <= self.n_max:
            raise ValueError("n_probe must exceed n_max")
        object.__setattr__(self, "grid", grid)

    def spec_at(self, value: float) -> HamiltonianSpec:
        return replace(self.fixed, **{self.varying: float(value)})


def plan_modulus(plan: SweepPlan) -> int | str:
    """Common sector structure over the whole grid.

    Points where some coupling vanishes may conserve more than the generic
    point (a diagonal matrix satisfies any modulus), so moduli are combined
    by gcd with the MOD_ALL sentinel as identity.
    """
    g = 0
    for value in plan.grid:
        k = detect_modulus(standard_hamiltonian(plan.spec_at(value)))
        if k != MOD_ALL:
            g = math.gcd(g, k)
    return MOD_ALL if g == 0 else g


def sector_levels_at(
    plan: SweepPlan, value: float, k: int | str, residues: tuple[int, ...] | None = None
) -> dict[int, np.ndarray]:
    """Absolute sector eigenvalues of the plan's Hamiltonian at one point.

    ``residues`` restricts the diagonalization to the named sectors (used by
    crossing refinement, which re-evaluates two blocks many times).
    """
    poly = standard_hamiltonian(plan.spec_at(value))
    decomp = split(assemble(poly, FockSpace(plan.n_max)), k)
    out = {}
    for s in decomp.sectors:
        if residues is None or s.residue in residues:
            out[s.residue] = eigen(s.block).eigenvalues
    return out


@dataclass(frozen=True)
class SpectrumGrid:
    """Per-sector level curves over the grid, in the plan's normalization.

    ``curves[r]`` has shape (grid length, levels in sector r) and ascends in
    the level index at every point.  ``ground_energy`` keeps the absolute
    per-point minimum, so absolute and excitation energies are always both
    recoverable.
    """

    plan: SweepPlan
    modulus: int | str
    params: np.ndarray
    curves: dict[int, np.ndarray]
    converged: dict[int, np.ndarray]
    ground_energy: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.params, dtype=float)
        p.flags.writeable = False
        object.__setattr__(self, "params", p)
        for bundle in (self.curves, self.converged):
            for arr in bundle.values():
                arr.flags.writeable = False
        g = np.asarray(self.ground_energy, dtype=float)
        g.flags.writeable = False
        object.__setattr__(self, "ground_energy", g)

    @property
    def residues(self) -> tuple[int, ...]:
        return tuple(sorted(self.curves))

    def n_levels(self, residue: int) -> int:
        return self.curves[residue].shape[1]

    def excitation(self, residue: int) -> np.ndarray:
        if self.plan.normalize == "excitation":
            return self.curves[residue]
        return self.curves[residue] - self.ground_energy[:, None]

    def absolute(self, residue: int) -> np.ndarray:
        if self.plan.normalize == "absolute":
            return self.curves[residue]
        return self.curves[residue] + self.ground_energy[:, None]


def _evaluate_point(plan: SweepPlan, value: float, k: int | str):
    """One grid point: absolute sector levels plus probe-certified flags."""
    poly = standard_hamiltonian(plan.spec_at(value))
    main = split(assemble(poly, FockSpace(plan.n_max)), k)
    probe = split(assemble(poly, FockSpace(plan.n_probe)), k)
    levels, flags = {}, {}
    probe_vals = {s.residue: eigen(s.block).eigenvalues for s in probe.sectors}
    for s in main.sectors:
        vals = eigen(s.block).eigenvalues
        pv = probe_vals[s.residue][: len(vals)]
        flags[s.residue] = np.abs(vals - pv) <= plan.tol_conv * np.maximum(
            1.0, np.abs(vals)
        )
        levels[s.residue] = vals
    return levels, flags


def run_sweep(plan: SweepPlan, threads: int = 1) -> SpectrumGrid:
    """Evaluate the plan over its whole grid.

    ``threads`` > 1 (or 0 for auto) evaluates grid points concurrently;
    the merge is by grid index, so the result does not depend on scheduling.
    """
    k = plan_modulus(plan)
    return _sweep_values(plan, k, np.asarray(plan.grid, dtype=float), threads)


def _sweep_values(
    plan: SweepPlan, k: int | str, values: np.ndarray, threads: int
) -> SpectrumGrid:
    npts = len(values)
    if k == MOD_ALL:
        residues = tuple(range(plan.n_max + 1))
        dims = {r: 1 for r in residues}
    else:
        residues = tuple(range(min(k, plan.n_max + 1)))
        dims = {r: len(range(r, plan.n_max + 1, k)) for r in residues}
    curves = {r: np.zeros((npts, dims[r])) for r in residues}
    flags = {r: np.zeros((npts, dims[r]), dtype=bool) for r in residues}

    def work(i: int):
        return i, _evaluate_point(plan, values[i], k)

    if threads == 1:
        results = [work(i) for i in range(npts)]
    else:
        workers = threads if threads > 0 else None
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, range(npts)))
    for i, (levels, ok) in results:
        for r in residues:
            curves[r][i] = levels[r]
            flags[r][i] = ok[r]

    ground = np.min(
        np.stack([curves[r][:, 0] for r in residues], axis=1), axis=1
    )
    if plan.normalize == "excitation":
        for r in residues:
            curves[r] = curves[r] - ground[:, None]
    return SpectrumGrid(plan, k, values.copy(), curves, flags, ground)


def refine_near(grid: SpectrumGrid, events, factor: int) -> SpectrumGrid:
    """Insert factor - 1 points inside each event's bracketing grid interval.

    Only the inserted points are computed; existing columns are reused and
    the result is merged in ascending parameter order.  ``events`` need only
    carry a ``param_value`` attribute.
    """
    if factor < 2:
        raise ValueError("refinement factor must be >= 2")
    params = grid.params
    new_values: list[float] = []
    for ev in events:
        t = float(ev.param_value)
        idx = int(np.clip(np.searchsorted(params, t, side="right") - 1, 0, len(params) - 2))
        lo, hi = params[idx], params[idx + 1]
        inner = lo + (hi - lo) * np.arange(1, factor) / factor
        new_values.extend(float(x) for x in inner)
    new_values = sorted(set(new_values) - set(params.tolist()))
    if not new_values:
        return grid

    extra = _sweep_values(grid.plan, grid.modulus, np.asarray(new_values), threads=1)
    merged = np.concatenate([params, extra.params])
    order = np.argsort(merged, kind="stable")
    curves, flags = {}, {}
    for r in grid.residues:
        curves[r] = np.concatenate([grid.curves[r], extra.curves[r]])[order]
        flags[r] = np.concatenate([grid.converged[r], extra.converged[r]])[order]
    ground = np.concatenate([grid.ground_energy, extra.ground_energy])[order]
    return SpectrumGrid(grid.plan, grid.modulus, merged[order], curves, flags, ground)
