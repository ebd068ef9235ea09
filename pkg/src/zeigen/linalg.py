"""Dense kernels for the shifted and bordered linear systems.

Both systems are solved by LU with partial pivoting; near-singularity is
detected with the LAPACK 1-norm reciprocal-condition estimator.  Matrices
here are small (the solvers target n up to a few dozen), so dense
factorizations are the simplest correct choice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .errors import DimensionMismatch, PerturbationExhausted, SingularBordered, SingularShift

RCOND_THRESHOLD = 1e-12
EPS_BASE = 1e-8
EPS_FACTOR = 2.0
EPS_ATTEMPTS = 41


@dataclass(frozen=True)
class SolveDiagnostics:
    """Conditioning report for one linear solve."""

    rcond: float
    singular: bool
    perturbation: float = 0.0


@dataclass(frozen=True)
class BorderedSystem:
    """The (n+1) x (n+1) matrix [[lam*I - T, x], [e^T, 0]]."""

    lam: float
    T: np.ndarray
    x: np.ndarray

    def matrix(self) -> np.ndarray:
        n = self.x.size
        if self.T.shape != (n, n):
            raise DimensionMismatch(
                f"T has shape {self.T.shape}, expected ({n}, {n})"
            )
        M = np.zeros((n + 1, n + 1))
        M[:n, :n] = self.lam * np.eye(n) - self.T
        M[:n, n] = self.x
        M[n, :n] = 1.0
        return M


def bordered_matrix(lam: float, T: np.ndarray, x: np.ndarray) -> np.ndarray:
    return BorderedSystem(lam, np.asarray(T, dtype=float), np.asarray(x, dtype=float)).matrix()


def _factor(M: np.ndarray):
    """LU-factor M and estimate its 1-norm reciprocal condition number."""
    anorm = float(np.linalg.norm(M, 1)) if M.size else 0.0
    lu, piv, info = lapack.dgetrf(M)
    if info > 0 or anorm == 0.0:
        return lu, piv, 0.0
    rcond, _ = lapack.dgecon(lu, anorm, norm="1")
    rcond = float(rcond)
    if not np.isfinite(rcond):
        rcond = 0.0
    return lu, piv, rcond


def _lu_solve(lu, piv, b: np.ndarray) -> np.ndarray:
    sol, info = lapack.dgetrs(lu, piv, b)
    if info != 0:
        raise RuntimeError(f"dgetrs failed with info={info}")
    return np.asarray(sol, dtype=float)


def shift_rcond(lam: float, T: np.ndarray) -> float:
    """Reciprocal condition estimate of lam*I - T."""
    T = np.asarray(T, dtype=float)
    _, _, rcond = _factor(lam * np.eye(T.shape[0]) - T)
    return rcond


def bordered_rcond(lam: float, T: np.ndarray, x: np.ndarray) -> float:
    """Reciprocal condition estimate of the bordered matrix."""
    _, _, rcond = _factor(bordered_matrix(lam, T, x))
    return rcond


def solve_shifted(
    lam: float,
    T: np.ndarray,
    b: np.ndarray,
    rcond_threshold: float = RCOND_THRESHOLD,
) -> tuple[np.ndarray, SolveDiagnostics]:
    """Solve ``(lam*I - T) w = b``.

    Raises :class:`SingularShift` when the reciprocal condition estimate
    falls below ``rcond_threshold``.
    """
    T = np.asarray(T, dtype=float)
    b = np.asarray(b, dtype=float)
    n = b.size
    if T.shape != (n, n):
        raise DimensionMismatch(f"T has shape {T.shape}, expected ({n}, {n})")
    lu, piv, rcond = _factor(lam * np.eye(n) - T)
    diag = SolveDiagnostics(rcond=rcond, singular=rcond < rcond_threshold)
    if diag.singular:
        raise SingularShift(
            f"shift lam={lam!r} is singular or nearly singular (rcond={rcond:.3e})",
            diagnostics=diag,
        )
    return _lu_solve(lu, piv, b), diag


def solve_bordered(
    lam: float,
    T: np.ndarray,
    x: np.ndarray,
    r: np.ndarray,
    s: float,
    rcond_threshold: float = RCOND_THRESHOLD,
) -> tuple[np.ndarray, float, SolveDiagnostics]:
    """Solve ``[[lam*I - T, x], [e^T, 0]] [d; delta] = [r; s]``.

    Returns ``(d, delta, diagnostics)``; raises :class:`SingularBordered`
    when the bordered matrix is singular or nearly singular.
    """
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    if r.shape != x.shape:
        raise DimensionMismatch(f"r has shape {r.shape}, expected {x.shape}")
    M = bordered_matrix(lam, T, x)
    lu, piv, rcond = _factor(M)
    diag = SolveDiagnostics(rcond=rcond, singular=rcond < rcond_threshold)
    if diag.singular:
        raise SingularBordered(
            f"bordered matrix at lam={lam!r} is singular or nearly singular "
            f"(rcond={rcond:.3e})",
            diagnostics=diag,
        )
    rhs = np.concatenate([r, [float(s)]])
    sol = _lu_solve(lu, piv, rhs)
    return sol[:-1], float(sol[-1]), diag


def ensure_bordered_nonsingular(
    lam: float,
    T: np.ndarray,
    x: np.ndarray,
    rcond_threshold: float = RCOND_THRESHOLD,
    eps_base: float = EPS_BASE,
    eps_factor: float = EPS_FACTOR,
    eps_attempts: int = EPS_ATTEMPTS,
) -> tuple[float, SolveDiagnostics]:
    """Return a shift ``lam'`` whose bordered matrix is not flagged singular.

    When the matrix at ``lam`` is (near-)singular, tries
    ``lam + max(1, |lam|) * eps_base * eps_factor**j`` for
    ``j = 0, 1, ...``.  The bordered determinant is a polynomial of degree
    n-1 in the shift, so only finitely many shifts are bad; the schedule is
    still bounded and raises :class:`PerturbationExhausted` if every
    candidate fails.
    """
    T = np.asarray(T, dtype=float)
    x = np.asarray(x, dtype=float)
    rcond = bordered_rcond(lam, T, x)
    if rcond >= rcond_threshold:
        return float(lam), SolveDiagnostics(rcond=rcond, singular=False)
    scale = max(1.0, abs(lam))
    for j in range(eps_attempts):
        eps = scale * eps_base * eps_factor**j
        candidate = lam + eps
        rcond = bordered_rcond(candidate, T, x)
        if rcond >= rcond_threshold:
            return float(candidate), SolveDiagnostics(
                rcond=rcond, singular=False, perturbation=eps
            )
    raise PerturbationExhausted(
        f"no shift perturbation of lam={lam!r} in {eps_attempts} attempts made the "
        f"bordered matrix nonsingular (last rcond={rcond:.3e})",
        diagnostics=SolveDiagnostics(rcond=rcond, singular=True, perturbation=eps),
    )
