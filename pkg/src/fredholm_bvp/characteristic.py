"""Characteristic matrix assembly and Fredholm bookkeeping.

The characteristic matrix of a problem is the q x (r*m) block matrix
whose i-th block is the boundary operator applied column-wise to the
i-th fundamental trajectory.  Its numerical rank determines the kernel
and cokernel dimensions of the boundary-value problem itself, which is
what makes desk-scale solvability analysis possible: an infinite-
dimensional question reduces to the SVD of one small matrix.

Rank decisions need an explicit cutoff.  The default tolerance is
``sigma_max * max(q, r*m) * 1e-10``, far above integrator error for
desk-scale problems, and reports carry the full singular-value list so
borderline calls remain auditable.  A small spectral gap at the cutoff
is flagged: kernel dimensions can jump under arbitrarily small
perturbations, so fragile ranks deserve a warning, not silence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary import BoundaryOperator
from .grid import Grid, Interval, LebesgueExponent
from .ode import CoefficientSet, FundamentalSet, RightHandSide, fundamental_set

RANK_TOLERANCE_FACTOR = 1e-10
FRAGILE_GAP = 1e3


@dataclass(frozen=True)
class ProblemSpec:
    """A complete boundary-value problem on an interval."""

    interval: Interval
    coefficients: CoefficientSet
    boundary: BoundaryOperator
    exponent: LebesgueExponent
    rhs: RightHandSide | None = None

    def __post_init__(self):
        for term in self.boundary.point_terms:
            if term.matrix.shape[1] != self.coefficients.m:
                raise ValueError(
                    f"boundary matrix columns ({term.matrix.shape[1]}) do not match "
                    f"the system size m={self.coefficients.m}"
                )
        if self.rhs is not None:
            if self.rhs.f.shape != (self.coefficients.m,):
                raise ValueError("right-hand side f has the wrong dimension")
            if self.rhs.c.shape != (self.boundary.codomain,):
                raise ValueError(
                    f"boundary data c has length {self.rhs.c.shape[0]}, "
                    f"expected {self.boundary.codomain}"
                )

    @property
    def r(self) -> int:
        return self.coefficients.r

    @property
    def m(self) -> int:
        return self.coefficients.m

    @property
    def n(self) -> int:
        return self.coefficients.n

    @property
    def q(self) -> int:
        return self.boundary.codomain

    @property
    def state_size(self) -> int:
        """Number of degrees of freedom of the homogeneous equation: r*m."""
        return self.r * self.m


@dataclass(frozen=True)
class CharacteristicMatrix:
    """The assembled q x (r*m) matrix with its rank analysis."""

    entries: np.ndarray
    blocks: tuple[np.ndarray, ...]
    singular_values: np.ndarray
    rank_tolerance: float
    numerical_rank: int
    diagnostics: tuple[str, ...] = ()

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def condition_number(self) -> float:
        """sigma_max / sigma_min; inf when the smallest vanishes."""
        smallest = self.singular_values[-1]
        if smallest == 0.0:
            return np.inf
        return float(self.singular_values[0] / smallest)


@dataclass(frozen=True)
class SolvabilityReport:
    """Fredholm data of the problem derived from the characteristic matrix."""

    index: int
    dim_kernel: int
    dim_cokernel: int
    well_posed: bool
    diagnostics: tuple[str, ...] = field(default_factory=tuple)


def _analyze_entries(entries: np.ndarray, rank_tolerance: float | None) -> CharacteristicMatrix:
    q, size = entries.shape
    singular_values = np.linalg.svd(entries, compute_uv=False)
    sigma_max = float(singular_values[0]) if singular_values.size else 0.0
    if rank_tolerance is None:
        rank_tolerance = sigma_max * max(q, size) * RANK_TOLERANCE_FACTOR
    rank = int(np.sum(singular_values > rank_tolerance))
    diagnostics = []
    if 0 < rank < singular_values.size:
        accepted = singular_values[rank - 1]
        rejected = singular_values[rank]
        if rejected > 0 and accepted / rejected < FRAGILE_GAP:
            diagnostics.append(
                "rank-fragile: singular-value gap at the cutoff is below "
                f"{FRAGILE_GAP:g} (sigma_{rank}={accepted:.3e}, sigma_{rank + 1}={rejected:.3e})"
            )
    blocks = ()  # filled by the caller when block structure is known
    return CharacteristicMatrix(
        entries=entries,
        blocks=blocks,
        singular_values=singular_values,
        rank_tolerance=float(rank_tolerance),
        numerical_rank=rank,
        diagnostics=tuple(diagnostics),
    )


def characteristic_from_blocks(blocks, rank_tolerance: float | None = None) -> CharacteristicMatrix:
    """Assemble and analyze the matrix from q x m blocks [BY_1], ..., [BY_r]."""
    blocks = tuple(np.asarray(b, dtype=complex) for b in blocks)
    entries = np.hstack(blocks)
    analyzed = _analyze_entries(entries, rank_tolerance)
    return CharacteristicMatrix(
        entries=analyzed.entries,
        blocks=blocks,
        singular_values=analyzed.singular_values,
        rank_tolerance=analyzed.rank_tolerance,
        numerical_rank=analyzed.numerical_rank,
        diagnostics=analyzed.diagnostics,
    )


def characteristic_from_fundamental(problem: ProblemSpec, fset: FundamentalSet,
                                    rank_tolerance: float | None = None) -> CharacteristicMatrix:
    blocks = [problem.boundary.apply_to_matrix(member) for member in fset.members]
    return characteristic_from_blocks(blocks, rank_tolerance)


def build_characteristic_matrix(problem: ProblemSpec, grid: Grid,
                                rank_tolerance: float | None = None) -> CharacteristicMatrix:
    """Integrate the fundamental set and apply the boundary operator."""
    fset = fundamental_set(problem.coefficients, grid)
    return characteristic_from_fundamental(problem, fset, rank_tolerance)


def solvability_report(matrix: CharacteristicMatrix, problem: ProblemSpec) -> SolvabilityReport:
    """Kernel/cokernel dimensions, index and well-posedness of the problem.

    The index is r*m - q regardless of the matrix; the d-characteristics
    come from the numerical rank.  Well-posedness requires a square
    nonsingular matrix.
    """
    q = problem.q
    size = problem.state_size
    rank = matrix.numerical_rank
    dim_kernel = size - rank
    dim_cokernel = q - rank
    well_posed = q == size and dim_kernel == 0 and dim_cokernel == 0
    diagnostics = list(matrix.diagnostics)
    diagnostics.extend(problem.boundary.validate(problem))
    return SolvabilityReport(
        index=size - q,
        dim_kernel=dim_kernel,
        dim_cokernel=dim_cokernel,
        well_posed=well_posed,
        diagnostics=tuple(diagnostics),
    )


def kernel_directions(matrix: CharacteristicMatrix) -> list[np.ndarray]:
    """Orthonormal basis of the numerical null space (length = dim kernel)."""
    _, singular_values, vh = np.linalg.svd(matrix.entries)
    directions = []
    size = matrix.entries.shape[1]
    for i in range(size):
        sigma = singular_values[i] if i < singular_values.size else 0.0
        if sigma <= matrix.rank_tolerance:
            directions.append(vh[i].conj())
    return directions


def cokernel_directions(matrix: CharacteristicMatrix) -> list[np.ndarray]:
    """Orthonormal basis of the orthogonal complement of the range."""
    u, singular_values, _ = np.linalg.svd(matrix.entries)
    directions = []
    q = matrix.entries.shape[0]
    for i in range(q):
        sigma = singular_values[i] if i < singular_values.size else 0.0
        if sigma <= matrix.rank_tolerance:
            directions.append(u[:, i])
    return directions
