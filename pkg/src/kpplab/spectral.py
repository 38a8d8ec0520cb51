"""Perron roots and principal eigenvalues for coupled KPP linearizations.

Three solvers live here:

* :func:`perron_frobenius` -- Perron root/vector of an essentially
  nonnegative irreducible matrix by shifted power iteration,
* :func:`dirichlet_principal_eigenvalue` -- principal eigenvalue of
  ``-D d2/dxi2 - c d/dxi - L`` on a truncated interval with Dirichlet ends,
* :func:`generalized_lambda1` -- the whole-line principal eigenvalue
  ``max_{mu >= 0} (kappa_mu + mu c)`` where ``kappa_mu = -lambda_PF(mu^2 D + L)``.

All three only assume the interaction matrix is essentially nonnegative
(off-diagonal entries >= 0) and irreducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .errors import HypothesisViolation, NoConvergence

__all__ = [
    "SpectralPair",
    "DirichletResult",
    "check_essentially_nonnegative_irreducible",
    "perron_frobenius",
    "dirichlet_principal_eigenvalue",
    "generalized_lambda1",
    "golden_max",
]


@dataclass(frozen=True)
class SpectralPair:
    """Perron root and unit Perron vector of an essentially nonnegative matrix.

    Attributes
    ----------
    value : float
        The Perron root (eigenvalue of maximal real part).
    vector : numpy.ndarray
        Associated eigenvector, strictly positive, unit Euclidean norm.
    residual : float
        ``|A v - value * v|_2`` at return time.
    applications : int
        Number of (equivalent single-) matrix applications spent.
    """

    value: float
    vector: np.ndarray
    residual: float
    applications: int


@dataclass(frozen=True)
class DirichletResult:
    """Principal Dirichlet eigenpair of ``-D d2 - c d1 - L`` on ``(-R, R)``.

    ``profile`` has shape ``(N, M)`` and includes the boundary columns,
    which are exactly zero.
    """

    value: float
    x: np.ndarray
    profile: np.ndarray
    residual: float
    grid_size: int
    solves: int


def _as_square_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise HypothesisViolation("interaction matrix must be square, got shape %r"
                                  % (A.shape,))
    if not np.all(np.isfinite(A)):
        raise HypothesisViolation("interaction matrix contains non-finite entries")
    return A


def _is_irreducible(A: np.ndarray) -> bool:
    """Strong connectivity of the sparsity digraph (off-diagonal entries)."""
    n = A.shape[0]
    if n == 1:
        return True
    mask = A != 0.0
    np.fill_diagonal(mask, False)

    def reaches_all(adj) -> bool:
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        frontier = [0]
        while frontier:
            nxt = []
            for j in frontier:
                # adj[i, j] != 0 means j feeds i
                for i in np.nonzero(adj[:, j])[0]:
                    if not seen[i]:
                        seen[i] = True
                        nxt.append(i)
            frontier = nxt
        return bool(seen.all())

    return reaches_all(mask) and reaches_all(mask.T)


def check_essentially_nonnegative_irreducible(A) -> bool:
    """True iff ``A`` is essentially nonnegative (Metzler) and irreducible."""
    A = _as_square_matrix(A)
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    if off.min(initial=0.0) < 0.0:
        return False
    return _is_irreducible(A)


def _require_admissible(A: np.ndarray) -> None:
    off = A.copy()
    np.fill_diagonal(off, 0.0)
    if off.min(initial=0.0) < 0.0:
        i, j = np.unravel_index(np.argmin(off), off.shape)
        raise HypothesisViolation(
            "interaction matrix has a negative off-diagonal entry "
            f"L[{i},{j}] = {off[i, j]!r}; essential nonnegativity is required")
    if not _is_irreducible(A):
        raise HypothesisViolation(
            "interaction matrix is reducible; a fully coupled (irreducible) "
            "matrix is required")


def perron_frobenius(A, tol: float = 1e-12,
                     max_applications: int | None = None) -> SpectralPair:
    """Perron root and vector of an essentially nonnegative irreducible matrix.

    Power iteration on ``B = A - (min_i a_ii - 1) I``.  The shift makes ``B``
    entrywise nonnegative with positive diagonal, hence primitive, so the
    iteration converges for every positive start.  To keep large sweeps cheap
    the normalized iteration matrix is repeatedly squared: each step then
    applies ``B^(2^q)``, which is still plain power iteration, just with a
    coarser step.  Convergence is declared on the residual of the *original*
    matrix, ``|A v - lambda v|_2 <= tol * max(1, |A|_inf)`` (the max keeps
    the criterion meaningful when |A| is large; for order-one matrices it is
    the plain absolute test).

    Parameters
    ----------
    A : array_like, shape (n, n)
        Essentially nonnegative irreducible matrix.
    tol : float
        Residual tolerance, default 1e-12.
    max_applications : int, optional
        Budget in equivalent single-matrix applications.  Defaults to
        ``100 n ln(1/tol)``.

    Raises
    ------
    HypothesisViolation
        If ``A`` is not essentially nonnegative or not irreducible.
    NoConvergence
        If the residual does not meet tolerance within the budget.
    """
    A = _as_square_matrix(A)
    _require_admissible(A)
    n = A.shape[0]
    if n == 1:
        return SpectralPair(float(A[0, 0]), np.ones(1), 0.0, 0)

    anorm = max(1.0, float(np.linalg.norm(A, np.inf)))
    B = A - (float(A.diagonal().min()) - 1.0) * np.eye(n)
    P = B / np.linalg.norm(B, np.inf)
    squarings = 5 if n <= 256 else 2
    for _ in range(squarings):
        P = P @ P
        P /= np.linalg.norm(P, np.inf)
    step = 1 << squarings

    if max_applications is None:
        max_applications = int(100 * n * math.log(1.0 / tol)) + step
    v = np.full(n, 1.0 / math.sqrt(n))
    applied = 0
    lam = 0.0
    res = math.inf
    while applied < max_applications:
        w = P @ v
        nw = float(np.linalg.norm(w))
        if nw == 0.0 or not math.isfinite(nw):
            raise NoConvergence("power iteration degenerated (zero or "
                                "non-finite iterate)")
        v = w / nw
        applied += step
        Av = A @ v
        lam = float(v @ Av)
        res = float(np.linalg.norm(Av - lam * v))
        if res <= tol * anorm:
            if v.min() <= 0.0:
                # primitivity guarantees positivity in exact arithmetic; a
                # few more mixing steps repair an underflowed entry
                for _ in range(n):
                    v = P @ v
                    v /= np.linalg.norm(v)
                applied += n * step
                Av = A @ v
                lam = float(v @ Av)
                res = float(np.linalg.norm(Av - lam * v))
            return SpectralPair(lam, v, res, applied)
    raise NoConvergence(
        f"Perron residual {res:.3e} above {tol * anorm:.3e} after "
        f"{applied} matrix applications (spectral gap too small?)")


# ---------------------------------------------------------------------------
# truncated-interval principal eigenvalue
# ---------------------------------------------------------------------------

def _dirichlet_operator(d, c, L, R, M):
    """Banded storage + matvec for the interior discretization.

    Unknown ordering interleaves components within a grid point
    (index = point * N + component), which keeps the matrix bandwidth at N.
    Returns (ab, apply, x, h) where ``ab`` is solve_banded storage of the
    operator itself.
    """
    N = L.shape[0]
    x = np.linspace(-R, R, M)
    h = x[1] - x[0]
    mi = M - 2
    K = mi * N
    co_lo = -d / h**2 + c / (2.0 * h)   # coupling to the left neighbor
    co_hi = -d / h**2 - c / (2.0 * h)   # coupling to the right neighbor
    diag_d = 2.0 * d / h**2

    ab = np.zeros((2 * N + 1, K))
    # within-point block: -L  (diagonal of the block merged below)
    for i in range(N):
        for ip in range(N):
            off = i - ip            # row index i, column index ip
            vals = -L[i, ip] if i != ip else diag_d[i] - L[i, i]
            ab[N + off, ip::N] = vals
    # neighbor blocks: diagonal in the components, offset N in the unknowns
    for i in range(N):
        ab[0, :][N + i::N] = co_hi[i]       # super-diagonal N (columns k+N)
        ab[2 * N, :][i:K - N:N] = co_lo[i]  # sub-diagonal N  (columns k-N)
    # solve_banded layout: ab[u + r - col, col]; entries beyond the matrix
    # edge are ignored, but zero them for cleanliness
    # (already zero by construction)

    LT = L.T.copy()

    def apply(vflat: np.ndarray) -> np.ndarray:
        U = vflat.reshape(mi, N)
        out = U * diag_d - U @ LT
        out[1:] += U[:-1] * co_lo
        out[:-1] += U[1:] * co_hi
        return out.reshape(K)

    return ab, apply, x, h


def dirichlet_principal_eigenvalue(d, c, L, R, M: int = 0,
                                   tol: float = 1e-10,
                                   max_solves: int = 400) -> DirichletResult:
    """Principal eigenvalue of ``-D d2 - c d1 - L`` on ``(-R, R)``, zero ends.

    Second-order central differences on a uniform grid; the grid is refined
    (doubled) until the cell Peclet number ``|c| h / min(d)`` drops below 2,
    which keeps the discretization inverse-positive.  The eigenpair is found
    by inverse iteration with a certified below-the-spectrum shift: for any
    positive vector ``w``, ``min_i (T w)_i / w_i`` is a lower bound on the
    principal eigenvalue (Collatz bound for the negated Metzler operator),
    so shifting there keeps ``T - sigma I`` an M-matrix and each solve stays
    sign-definite.  The shift tracks the bound, giving superlinear
    convergence near the end.

    Parameters
    ----------
    d : array_like, shape (N,)
        Positive diffusivities.
    c : float
        Drift (frame speed).
    L : array_like, shape (N, N)
        Essentially nonnegative irreducible coupling matrix.
    R : float
        Half-width of the interval.
    M : int
        Requested number of grid nodes including the ends; 0 picks
        ``max(17, round(40 R))``.  Refined automatically if the Peclet
        condition asks for it.
    tol : float
        Absolute residual tolerance on the discrete eigenpair.

    Returns
    -------
    DirichletResult
        ``value``, grid, positive eigenfunction (zero boundary columns),
        residual, final grid size, number of banded solves.
    """
    L = _as_square_matrix(L)
    _require_admissible(L)
    d = np.asarray(d, dtype=float).ravel()
    N = L.shape[0]
    if d.shape != (N,) or np.any(d <= 0.0) or not np.all(np.isfinite(d)):
        raise HypothesisViolation("diffusivities must be positive, finite and "
                                  "match the coupling matrix size")
    if R <= 0.0:
        raise HypothesisViolation("interval half-width R must be positive")
    c = float(c)
    if M <= 0:
        M = max(17, int(round(40 * R)))
    M = max(int(M), 16)
    while abs(c) * (2.0 * R / (M - 1)) / d.min() >= 2.0:
        M = 2 * M - 1

    ab, apply, x, h = _dirichlet_operator(d, c, L, R, M)
    mi = M - 2
    K = mi * N

    # analytic-flavored start: per-component drift-tilted half sine times the
    # Perron vector of L; exact for equal diffusivities, decent otherwise
    nL = perron_frobenius(L, tol=1e-10).vector
    s = np.sin(np.pi * (x[1:-1] + R) / (2.0 * R))
    v0 = np.empty((mi, N))
    for i in range(N):
        tilt = np.exp(np.clip(-c * (x[1:-1] + R) / (2.0 * d[i]), -700.0, 0.0))
        v0[:, i] = np.maximum(s * tilt * nL[i], 1e-290)
    v = v0.reshape(K)
    v /= np.linalg.norm(v)

    sigma = -float(np.linalg.norm(L, np.inf)) - 1.0
    lam = sigma
    res = math.inf
    solves = 0
    for _ in range(max_solves):
        Tv = apply(v)
        lam = float(v @ Tv)
        res = float(np.linalg.norm(Tv - lam * v))
        if res <= tol:
            break
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            ratios = Tv / v
        ratios = ratios[np.isfinite(ratios)]
        if ratios.size:
            bound = float(ratios.min())
            if math.isfinite(bound):
                sigma = max(sigma, bound - max(20.0 * res, 1e-12))
        abs_sigma = ab.copy()
        abs_sigma[N, :] -= sigma
        w = solve_banded((N, N), abs_sigma, v)
        solves += 1
        nw = float(np.linalg.norm(w))
        if nw == 0.0 or not math.isfinite(nw):
            raise NoConvergence("inverse iteration produced a degenerate "
                                "iterate (shift too close to the spectrum)")
        w = w / nw
        if w.sum() < 0.0:
            w = -w
        # the shifted operator is inverse-positive, so negative entries can
        # only be roundoff; fold them back and floor away exact zeros
        v = np.abs(w)
        v[v == 0.0] = 1e-300
        v /= float(np.linalg.norm(v))
    else:
        raise NoConvergence(
            f"Dirichlet eigensolve residual {res:.3e} above {tol:.3e} after "
            f"{max_solves} solves (R={R!r}, M={M})")

    prof = np.zeros((N, M))
    prof[:, 1:-1] = v.reshape(mi, N).T
    return DirichletResult(lam, x, prof, res, M, solves)


# ---------------------------------------------------------------------------
# whole-line principal eigenvalue
# ---------------------------------------------------------------------------

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(f, a: float, b: float, xtol: float, max_iter: int = 200):
    """Golden-section maximization of a unimodal function on [a, b].

    Returns (x, f(x)).  Plain bracketing; never evaluates outside [a, b].
    """
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    it = 0
    while (b - a) > xtol and it < max_iter:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
        it += 1
    if f1 >= f2:
        return x1, f1
    return x2, f2


def generalized_lambda1(d, c, L, xtol: float = 1e-8) -> float:
    """Whole-line principal eigenvalue ``max_{mu} (kappa_mu + mu c)``.

    Here ``kappa_mu = -lambda_PF(mu^2 D + L)``.  Since kappa is even in mu,
    the maximum over all real mu equals the maximum over mu >= 0 with ``c``
    replaced by ``|c|`` -- the eigenvalue is even in the drift (conjugating
    by x -> -x flips its sign), and computing through ``|c|`` keeps that
    symmetry exact.  The maximand is concave in mu (the Perron root of
    ``mu^2 D + L`` is convex), tends to -inf as ``mu -> inf``, and has
    one-sided derivative ``|c|`` at 0, so a doubling scan brackets the
    maximum and golden section finishes the job.  The value at mu = 0
    (which is ``-lambda_PF(L)``) is always compared against the interior
    candidate, covering the boundary-maximum case c = 0.
    """
    L = _as_square_matrix(L)
    d = np.asarray(d, dtype=float).ravel()
    D = np.diag(d)
    c = abs(float(c))

    def g(mu: float) -> float:
        return -perron_frobenius(D * mu * mu + L).value + mu * c

    g0 = g(0.0)
    b = 1.0
    gb, gh = g(b), g(0.5)
    doublings = 0
    while gb >= gh and doublings < 60:
        b *= 2.0
        gh = gb
        gb = g(b)
        doublings += 1
    if doublings >= 60:
        raise NoConvergence("maximum of kappa_mu + mu c not bracketed after "
                            "60 doublings")
    _, val = golden_max(g, 0.0, b, xtol * max(1.0, b))
    return max(val, g0)
