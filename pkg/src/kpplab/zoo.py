"""Ready-made model families.

Three builders produce fully assembled :class:`~kpplab.model.Model` objects:

* :func:`toads_local` -- motility-structured invasion with nearest-neighbor
  trait mutation (discrete Laplacian) and uniform competition,
* :func:`toads_nonlocal` -- same population but with kernel-based mutation
  jumps between arbitrary traits,
* :func:`gurtin_maccamy` -- an age-structured population with aging
  transport, maturation-gated birth, age-dependent mortality and
  overcrowding; its coupling matrix is strongly asymmetric.

:func:`laplacian_matrix` exposes the nearest-neighbor mutation matrix on its
own (zero row and column sums; Perron root exactly 0).
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import HypothesisViolation
from .model import LotkaVolterra, Model

__all__ = [
    "laplacian_matrix",
    "toads_local",
    "toads_nonlocal",
    "gurtin_maccamy",
]


def laplacian_matrix(n: int) -> np.ndarray:
    """Nearest-neighbor mutation matrix on ``n`` trait classes.

    Symmetric, zero row sums (corner diagonal -1, interior -2, off-diagonal
    couplings +1), so its Perron root is exactly zero and adding ``r I``
    shifts the root to ``r``.
    """
    if n < 2:
        raise HypothesisViolation("at least two trait classes are required")
    M = np.zeros((n, n))
    idx = np.arange(n - 1)
    M[idx, idx + 1] = 1.0
    M[idx + 1, idx] = 1.0
    M[0, 0] = M[n - 1, n - 1] = -1.0
    if n >= 3:
        M[idx[1:], idx[1:]] = -2.0
    return M


def toads_local(n: int, theta_min: float = 1.0, theta_max: float | None = None,
                r: float = 1.0, alpha: float = 1.0) -> Model:
    """Motility-structured model with nearest-neighbor mutations.

    Trait ``i`` diffuses in space at rate ``theta_min + (i-1) h`` where
    ``h = (theta_max - theta_min)/(n-1)``; every class grows at ``r`` and
    mutates to neighbors at rate ``alpha / h^2``; competition is uniform
    with weight ``h`` (the trait-space cell width).  The Perron root of the
    coupling matrix is exactly ``r``.
    """
    if theta_max is None:
        theta_max = float(n)
    if not (0.0 < theta_min < theta_max):
        raise HypothesisViolation("need 0 < theta_min < theta_max")
    if r <= 0.0 or alpha <= 0.0:
        raise HypothesisViolation("growth and mutation rates must be positive")
    h = (theta_max - theta_min) / (n - 1)
    d = theta_min + h * np.arange(n)
    L = r * np.eye(n) + (alpha / h**2) * laplacian_matrix(n)
    C = np.full((n, n), h)
    return Model(d, L, LotkaVolterra(C))


def _gauss_kernel(width: float) -> Callable[[np.ndarray], np.ndarray]:
    def K(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * (x / width) ** 2) / (width * math.sqrt(2 * math.pi))
    return K


def toads_nonlocal(n: int, theta_min: float = 1.0,
                   theta_max: float | None = None, r: float = 1.0,
                   alpha: float = 0.5,
                   kernel: Callable[[np.ndarray], np.ndarray] | None = None,
                   kernel_width: float = 1.0) -> Model:
    """Motility-structured model with kernel mutation jumps.

    Coupling ``L = (r - alpha) I + alpha h K((i - j) h)`` where ``h`` is the
    trait step; the default kernel is a normalized Gaussian of the given
    width.  The Perron root is at least ``r - alpha``, so the default rates
    keep it positive.  The kernel must be positive on the sampled
    differences (irreducibility).
    """
    if theta_max is None:
        theta_max = float(n)
    if not (0.0 < theta_min < theta_max):
        raise HypothesisViolation("need 0 < theta_min < theta_max")
    if r <= 0.0 or alpha <= 0.0:
        raise HypothesisViolation("growth and mutation rates must be positive")
    h = (theta_max - theta_min) / (n - 1)
    traits = theta_min + h * np.arange(n)
    if kernel is None:
        kernel = _gauss_kernel(kernel_width)
    diffs = traits[:, None] - traits[None, :]
    Kmat = np.asarray(kernel(diffs), dtype=float)
    if Kmat.min() <= 0.0:
        raise HypothesisViolation("mutation kernel must be positive on the "
                                  "sampled trait differences")
    L = (r - alpha) * np.eye(n) + alpha * h * Kmat
    C = np.full((n, n), h)
    return Model(traits.copy(), L, LotkaVolterra(C))


def gurtin_maccamy(n: int = 16, age_max: float = 2.0, age_mature: float = 0.5,
                   mortality: Callable[[np.ndarray], np.ndarray] | None = None,
                   birth: Callable[[np.ndarray], np.ndarray] | None = None,
                   competition: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
                   diffusivity: Callable[[np.ndarray], np.ndarray] | None = None) -> Model:
    """Age-structured population with diffusion and overcrowding.

    Age classes sit at ``a_i = (i-1) A/n``.  The coupling matrix is the sum
    of aging transport (sub-diagonal +1/h, diagonal -1/h except the first
    row, which instead receives birth terms), maturation-gated birth
    (``h * birth(a_j)`` for ages past ``age_mature``), and mortality
    ``-diag(mortality(a_i))``.  Interior column sums of the transport part
    vanish; the first and last carry the boundary fluxes.  Default rates
    give a strongly asymmetric matrix with a positive Perron root.
    """
    if n < 3:
        raise HypothesisViolation("need at least three age classes")
    if not (0.0 <= age_mature < age_max):
        raise HypothesisViolation("need 0 <= age_mature < age_max")
    h = age_max / n
    ages = h * np.arange(n)
    if mortality is None:
        mortality = lambda a: 0.05 + 0.1 * np.asarray(a, dtype=float)
    if birth is None:
        birth = lambda a: np.full_like(np.asarray(a, dtype=float), 1.2)
    if diffusivity is None:
        diffusivity = lambda a: np.ones_like(np.asarray(a, dtype=float))

    jm = int(np.argmax(ages >= age_mature))
    if ages[jm] < age_mature:
        raise HypothesisViolation("no age class is past the maturation age")
    bvals = np.asarray(birth(ages[jm:]), dtype=float)
    if bvals.min() < 0.0 or bvals[-1] <= 0.0:
        # a positive birth rate at the oldest class closes the cycle
        # oldest -> newborn, which is what makes the matrix irreducible
        raise HypothesisViolation("birth rates past maturation must be "
                                  "nonnegative, with the last one positive")
    L = np.zeros((n, n))
    L[0, jm:] += h * bvals
    rows = np.arange(1, n)
    L[rows, rows - 1] += 1.0 / h
    L[rows, rows] += -1.0 / h
    L -= np.diag(np.asarray(mortality(ages), dtype=float))

    d = np.asarray(diffusivity(ages), dtype=float)
    if competition is None:
        C = np.full((n, n), h)
    else:
        C = h * np.asarray(competition(ages[:, None], ages[None, :]),
                           dtype=float)
    return Model(d, L, LotkaVolterra(C))
