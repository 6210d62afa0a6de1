"""Small dense numerical kernels shared by the analysis modules.

Everything here is sized for the problem at hand: polynomials up to
degree 64 and matrices up to 8x8. Roots come from Aberth-Ehrlich
simultaneous iteration; eigenvalues go through the characteristic
polynomial (Faddeev-LeVerrier) and reuse the same root finder.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NewtonError, NumericError, RootFindingError, SpecError

MAX_POLY_DEGREE = 64
MAX_EIG_DIM = 8


@dataclass(frozen=True)
class Poly:
    """Real polynomial in the power basis, coefficients ascending by degree.

    Trailing (highest-order) zero coefficients are trimmed on construction,
    so ``coeffs[-1]`` is nonzero for any nonzero polynomial.
    """

    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = [float(v) for v in self.coeffs]
        if not c:
            raise SpecError("polynomial needs at least one coefficient")
        if not all(np.isfinite(c)):
            raise SpecError("polynomial coefficients must be finite")
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        if len(c) - 1 > MAX_POLY_DEGREE:
            raise SpecError(f"degree {len(c) - 1} exceeds maximum {MAX_POLY_DEGREE}")
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def scale(self) -> float:
        """Residual scale 1 + max|coeff| used by root acceptance bounds."""
        return 1.0 + max(abs(v) for v in self.coeffs)

    def __call__(self, z):
        acc = 0.0 * z + self.coeffs[-1]
        for c in self.coeffs[-2::-1]:
            acc = acc * z + c
        return acc

    def derivative(self) -> "Poly":
        if self.degree == 0:
            return Poly((0.0,))
        return Poly(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by descending real part (ties: descending imag)."""

    eigenvalues: tuple[complex, ...]

    @property
    def max_real(self) -> float:
        return max(v.real for v in self.eigenvalues)


def poly_roots(p: Poly, max_iter: int = 10_000) -> list[complex]:
    """All complex roots of ``p`` (with multiplicity) via Aberth-Ehrlich.

    Iterates all root approximations simultaneously from a perturbed
    circle until every residual satisfies |p(r)| <= 1e-9 * (1 + max|c|).
    Raises RootFindingError with the offending residuals if `max_iter`
    passes are not enough.
    """
    if p.degree < 1:
        raise SpecError("root finding needs degree >= 1")
    c = np.asarray(p.coeffs, dtype=np.complex128)
    n = p.degree
    if n == 1:
        return [complex(-c[0] / c[1])]

    d = np.arange(1, n + 1) * c[1:]
    radius = 1.0 + max(abs(v) for v in p.coeffs[:-1]) / abs(p.coeffs[-1])
    ang = 2.0 * np.pi * np.arange(n) / n + 0.4
    x = radius * np.exp(1j * ang) * (1.0 + 1e-3 * np.cos(7.0 * ang))

    tol = 1e-9 * p.scale
    resid = np.abs(_horner(c, x))
    best = np.inf
    stalled = 0
    for _ in range(max_iter):
        if resid.max() <= 0.25 * tol:
            break
        if resid.max() >= 0.995 * best:
            stalled += 1
            if stalled > 80:
                break  # no progress: either done (checked below) or unattainable
        else:
            stalled = 0
            best = resid.max()
        moved = 0.0
        for i in range(n):
            pv = _horner(c, x[i])
            dv = _horner(d, x[i])
            if pv == 0.0:
                continue
            diffs = x[i] - np.delete(x, i)
            if np.any(diffs == 0.0):
                x[i] += (1.0 + 1j) * 1e-9 * (1.0 + abs(x[i]))
                continue
            s = np.sum(1.0 / diffs)
            denom = dv - pv * s
            if denom == 0.0:
                x[i] += (1.0 - 1j) * 1e-9 * (1.0 + abs(x[i]))
                continue
            step = pv / denom
            x[i] -= step
            moved = max(moved, abs(step) / (1.0 + abs(x[i])))
        resid = np.abs(_horner(c, x))
        if moved < 1e-16 and resid.max() <= tol:
            break
    else:
        if resid.max() > tol:
            raise RootFindingError(
                f"Aberth iteration did not converge in {max_iter} passes "
                f"(worst residual {resid.max():.3e}, bound {tol:.3e})",
                residuals=resid.tolist(),
            )
    x = _polish_clusters(c, x, tol)
    resid = np.abs(_horner(c, x))
    if resid.max() > tol:
        raise RootFindingError(
            f"root residual {resid.max():.3e} above bound {tol:.3e}",
            residuals=resid.tolist(),
        )
    return sorted((complex(v) for v in x), key=lambda z: (z.real, z.imag))


def _polish_clusters(c, x, tol):
    """Sharpen multiple roots: a q-fold root is a simple zero of p^(q-1).

    Aberth converges only linearly on multiple roots, leaving clusters of
    approximations ~tol^(1/q) wide. Each cluster is collapsed onto the
    nearby zero of the (q-1)-th derivative, accepted only if that point's
    residual does not exceed what the cluster members already achieved.
    """
    n = x.size
    if n < 2:
        return x
    thresh = 3e-3
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(x[i] - x[j]) <= thresh * (1.0 + abs(x[i])):
                parent[find(i)] = find(j)
    clusters = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(i)

    out = x.copy()
    for members in clusters.values():
        q = len(members)
        if q < 2 or q - 1 >= c.size - 1:
            continue
        pts = x[members]
        z = pts.mean()
        dq = c.copy()
        for _ in range(q - 1):
            dq = np.arange(1, dq.size) * dq[1:]
        dq1 = np.arange(1, dq.size) * dq[1:]
        ok = False
        for _ in range(60):
            dv = _horner(dq1, z) if dq1.size else 0.0
            if dv == 0.0:
                break
            step = _horner(dq, z) / dv
            z -= step
            if abs(step) <= 1e-15 * (1.0 + abs(z)):
                ok = True
                break
        diam = max(abs(p - q2) for p in pts for q2 in pts)
        if not ok or abs(z - pts.mean()) > 2.0 * diam + 1e-6:
            continue
        member_resid = max(abs(_horner(c, p)) for p in pts)
        if abs(_horner(c, z)) <= max(2.0 * member_resid, 1e-13 * (1.0 + np.abs(c).max())):
            for i in members:
                out[i] = z
    return out


def _horner(coeffs_ascending, z):
    acc = coeffs_ascending[-1] * np.ones_like(z) if np.ndim(z) else coeffs_ascending[-1]
    for c in coeffs_ascending[-2::-1]:
        acc = acc * z + c
    return acc


def real_roots(p: Poly, low: float, high: float, imag_tol: float = 1e-7) -> list[float]:
    """Real roots of ``p`` inside [low, high], clamped to the interval.

    Near-real pairs produced by multiple roots are kept (their real parts
    land next to each other and can be deduplicated by the caller).
    """
    out = []
    for r in poly_roots(p):
        if abs(r.imag) <= imag_tol * (1.0 + abs(r.real)) and low - 1e-9 <= r.real <= high + 1e-9:
            out.append(min(max(r.real, low), high))
    return sorted(out)


def characteristic_poly(matrix: np.ndarray) -> Poly:
    """Coefficients of det(lambda*I - M) by the Faddeev-LeVerrier recurrence."""
    a = np.asarray(matrix, dtype=float)
    n = a.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[n] = 1.0
    mk = np.zeros_like(a)
    for k in range(1, n + 1):
        mk = a @ mk + coeffs[n - k + 1] * np.eye(n)
        coeffs[n - k] = -np.trace(a @ mk) / k
    return Poly(tuple(coeffs))


def eigenvalues(matrix) -> Spectrum:
    """Eigenvalues of a small (<= 8x8) real matrix via its characteristic polynomial."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SpecError("eigenvalues needs a square matrix")
    if a.shape[0] > MAX_EIG_DIM:
        raise SpecError(f"dimension {a.shape[0]} exceeds maximum {MAX_EIG_DIM}")
    if not np.all(np.isfinite(a)):
        raise SpecError("matrix entries must be finite")
    roots = poly_roots(characteristic_poly(a))
    ordered = sorted(roots, key=lambda z: (-z.real, -z.imag))
    return Spectrum(tuple(ordered))


def newton_solve(
    f: Callable,
    x0,
    tol: float = 1e-11,
    max_iter: int = 200,
    fd_step: float = 1e-6,
    max_halvings: int = 40,
):
    """Damped Newton iteration for f(x) = 0 with finite-difference Jacobians.

    Jacobians use central differences with absolute step `fd_step`; each
    Newton step is halved (up to `max_halvings` times) until the residual
    sup-norm decreases. Returns x with ||f(x)||_inf <= tol, or raises
    NewtonError -- never a silent bad root. Scalar x0 gets a scalar back.
    """
    scalar = np.ndim(x0) == 0
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()

    def fv(v):
        out = np.atleast_1d(np.asarray(f(v[0] if scalar else v, ), dtype=float))
        return out

    r = fv(x)
    rnorm = np.max(np.abs(r))
    for _ in range(max_iter):
        if rnorm <= tol:
            return float(x[0]) if scalar else x
        m, n = r.size, x.size
        jac = np.empty((m, n))
        for j in range(n):
            xp = x.copy()
            xm = x.copy()
            xp[j] += fd_step
            xm[j] -= fd_step
            jac[:, j] = (fv(xp) - fv(xm)) / (2.0 * fd_step)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise NewtonError(f"singular Jacobian at x={x!r}") from exc
        if not np.all(np.isfinite(step)):
            raise NewtonError(f"non-finite Newton step at x={x!r}")
        lam = 1.0
        for _ in range(max_halvings + 1):
            cand = x + lam * step
            rc = fv(cand)
            cnorm = np.max(np.abs(rc))
            if np.isfinite(cnorm) and cnorm < rnorm:
                x, r, rnorm = cand, rc, cnorm
                break
            lam *= 0.5
        else:
            raise NewtonError(
                f"damping failed to reduce residual {rnorm:.3e} at x={x!r}"
            )
    if rnorm <= tol:
        return float(x[0]) if scalar else x
    raise NewtonError(f"no convergence in {max_iter} iterations (residual {rnorm:.3e})")


@dataclass(frozen=True)
class FlowResult:
    """Time grid and states from an explicit integration run."""

    times: np.ndarray
    states: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def integrate_flow(
    f: Callable,
    x0: Sequence[float],
    t_end: float,
    dt: float,
    project: bool = True,
) -> FlowResult:
    """Classical RK4 integration of x' = f(x) on the probability simplex.

    After every step the state is re-projected (negatives clamped to 0,
    then renormalized to unit sum), which keeps the coordinate sum at 1
    exactly up to float rounding. A NaN/Inf state aborts with the time
    at which it appeared.
    """
    if dt <= 0.0:
        raise SpecError("dt must be positive")
    x = np.asarray(x0, dtype=float).copy()
    steps = int(np.ceil(t_end / dt - 1e-12))
    times = np.empty(steps + 1)
    states = np.empty((steps + 1, x.size))
    times[0] = 0.0
    states[0] = x
    t = 0.0
    for k in range(steps):
        h = min(dt, t_end - t)
        k1 = np.asarray(f(x))
        k2 = np.asarray(f(x + 0.5 * h * k1))
        k3 = np.asarray(f(x + 0.5 * h * k2))
        k4 = np.asarray(f(x + h * k3))
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if project:
            np.clip(x, 0.0, None, out=x)
            s = x.sum()
            if s > 0.0:
                x /= s
        t += h
        if not np.all(np.isfinite(x)):
            raise NumericError(f"flow state became non-finite at t={t:.6g}")
        times[k + 1] = t
        states[k + 1] = x
    return FlowResult(times=times, states=states)
