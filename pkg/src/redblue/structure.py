"""Community structures: attractiveness matrices and derived objects.

The attractiveness matrix A has entry A[x, y] = pull of an existing
vertex in community x on a newcomer landing in community y (so column y
drives the attachment weights of community-y newcomers). mu is the
newcomer community distribution. From these we derive the limiting
edge-end measure nu and the influence digraph used by the
synchronization condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, SpecError


@dataclass(frozen=True)
class CommunityStructure:
    A: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        a = np.array(self.A, dtype=float)
        mu = np.array(self.mu, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise SpecError("attractiveness matrix must be square")
        n = a.shape[0]
        if mu.shape != (n,):
            raise SpecError(f"mu must have length {n}")
        if not np.all(np.isfinite(a)) or not np.all(np.isfinite(mu)):
            raise SpecError("non-finite entries")
        if np.any(a < 0.0):
            raise SpecError("attractiveness entries must be >= 0")
        colsums = a.sum(axis=0)
        if np.any(colsums <= 0.0):
            bad = int(np.argmin(colsums))
            raise SpecError(f"community {bad} has zero total attractiveness: "
                            "its newcomers would have nowhere to attach")
        if np.any(mu <= 0.0):
            raise SpecError("mu entries must be strictly positive")
        if abs(mu.sum() - 1.0) > 1e-9:
            raise SpecError(f"mu must sum to 1 (got {mu.sum()!r})")
        mu = mu / mu.sum()
        a.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "mu", mu)

    @property
    def n_communities(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class NuMeasure:
    """Limiting edge-end proportions per community plus the equation residual."""

    nu: np.ndarray
    residual: float


def make_a_theta(A1, theta: float) -> np.ndarray:
    """Interpolated matrix: diagonal of A1 kept, off-diagonal scaled by theta."""
    a1 = np.array(A1, dtype=float)
    if a1.ndim != 2 or a1.shape[0] != a1.shape[1]:
        raise SpecError("A1 must be square")
    if np.any(np.diag(a1) <= 0.0):
        raise SpecError("A1 needs a strictly positive diagonal")
    if theta < 0.0:
        raise SpecError("theta must be >= 0")
    a0 = np.diag(np.diag(a1))
    return (1.0 - theta) * a0 + theta * a1


def symmetric_pair(theta: float, mu=(0.5, 0.5)) -> CommunityStructure:
    """Two communities with unit self-attractiveness and coupling theta."""
    return CommunityStructure(A=make_a_theta(np.ones((2, 2)), theta), mu=np.asarray(mu))


def three_cycle(mu=(1 / 3, 1 / 3, 1 / 3)) -> CommunityStructure:
    """Directed 3-cycle: each community only sees the one "clockwise" of it."""
    a = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    return CommunityStructure(A=a, mu=np.asarray(mu))


def _nu_map(cs: CommunityStructure, nu: np.ndarray) -> np.ndarray:
    # T(nu)_i = mu_i/2 + nu_i/2 * sum_j mu_j A[i,j] / (sum_k A[k,j] nu_k)
    denom = cs.A.T @ nu
    return 0.5 * cs.mu + 0.5 * nu * (cs.A @ (cs.mu / denom))


def solve_nu(cs: CommunityStructure, tol: float = 1e-13, max_iter: int = 10**6) -> NuMeasure:
    """Edge-end limit measure: fixed point of the damped self-map of the simplex.

    Iterates nu <- (nu + T(nu))/2 from nu = mu with renormalization each
    step, until the equation residual ||nu - T(nu)||_inf drops below tol.
    """
    nu = cs.mu.copy()
    for _ in range(max_iter):
        t = _nu_map(cs, nu)
        residual = float(np.max(np.abs(nu - t)))
        if residual <= tol:
            return NuMeasure(nu=nu, residual=residual)
        nu = 0.5 * (nu + t)
        nu = nu / nu.sum()
    raise ConvergenceError(
        f"nu iteration did not reach {tol:g} in {max_iter} steps",
        residual=residual,
    )


def gamma_digraph(cs: CommunityStructure) -> np.ndarray:
    """Influence digraph: adjacency[i, j] = True iff A[j, i] > 0."""
    return (cs.A.T > 0.0).copy()


def check_common_reachability(adj: np.ndarray) -> bool:
    """True iff every pair of vertices has directed paths to some common vertex.

    Vertices reach themselves; closure by boolean matrix powers.
    """
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    reach = adj | np.eye(n, dtype=bool)
    while True:
        nxt = reach | (reach @ reach)
        if (nxt == reach).all():
            break
        reach = nxt
    for i in range(n):
        for j in range(i + 1, n):
            if not np.any(reach[i] & reach[j]):
                return False
    return True


def det_sign_2x2(cs: CommunityStructure) -> int:
    """Sign of det(A) for two communities, with a +-1e-12 zero band."""
    if cs.n_communities != 2:
        raise SpecError("determinant sign test applies to 2 communities only")
    det = cs.A[0, 0] * cs.A[1, 1] - cs.A[0, 1] * cs.A[1, 0]
    if abs(det) <= 1e-12:
        return 0
    return 1 if det > 0.0 else -1


def from_config(cfg: dict) -> CommunityStructure:
    """Build a structure from a config mapping.

    Keys: ``N``, ``mu``, and either ``A`` (row-major, full matrix) or the
    pair ``A1`` + ``theta`` for the interpolated family.
    """
    if "N" not in cfg or "mu" not in cfg:
        raise SpecError("structure config needs N and mu")
    n = int(cfg["N"])
    mu = np.asarray(cfg["mu"], dtype=float)
    if "A" in cfg:
        a = np.asarray(cfg["A"], dtype=float).reshape(n, n)
    elif "A1" in cfg and "theta" in cfg:
        a1 = np.asarray(cfg["A1"], dtype=float).reshape(n, n)
        a = make_a_theta(a1, float(cfg["theta"]))
    else:
        raise SpecError("structure config needs A, or A1 plus theta")
    return CommunityStructure(A=a, mu=mu)
