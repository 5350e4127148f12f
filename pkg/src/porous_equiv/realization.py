"""Controllability/observability analysis and input-output descriptions.

The input-output map of a realization ``(a, e1, e1')`` is characterized by
its Markov parameters ``m_j = c a^j b`` or, equivalently, by its coprime
transfer function ``T(z) = c (zI - a)^{-1} b``.  Markov parameters are the
primary equivalence oracle (plain linear algebra); transfer-function
coefficients are the reported artefact, since polynomial GCD removal is the
numerically delicate step.

Characteristic polynomial and numerator are produced from the eigenvalues
of the volume-weighted symmetrization whenever the matrix is a valid
network (sums of same-sign products: full relative accuracy even when
exchange rates span many decades).  Matrices without that structure fall
back to the Faddeev-LeVerrier recursion, which is exact on integer input
but loses relative accuracy in low-order coefficients for badly scaled
systems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import linalg, network
from .errors import ModelError, PoleOnAxisError

#: Relative tolerance for cancelling shared numerator/denominator roots.
GCD_TOL = 1e-8
#: Rates closer than this (relative to the largest) count as duplicates.
RATE_SEP_TOL = 1e-8
#: A pole with |Re| at or below this is treated as sitting on the axis.
POLE_AXIS_TOL = 1e-9


#: Eigenvalue-group weights below this (relative, 2-norm) count as zero in
#: the structured rank computation.
WEIGHT_RANK_TOL = 1e-9


def _system_matrix(system) -> np.ndarray:
    if isinstance(system, network.StateSpace):
        return system.a
    return linalg.as_matrix(system, square=True)


def immobile_eigensystem(a: np.ndarray, volumes: np.ndarray):
    """Diagonalize the immobile block through its symmetric similarity.

    With ``W`` the orthonormal eigenvectors of
    ``S = V~^{1/2} A~ V~^{-1/2}``, the matrix ``P = V~^{-1/2} W``
    diagonalizes the immobile block ``A~`` and the mode weights
    ``w = W' V~^{1/2} a[1:, 0]`` coincide for the input and output channels,
    which is what makes the recovered star parameters ``-w_i^2 / lambda_i``
    positive.

    Returns ``(lam, w, p)`` with eigenvalues ascending.
    """
    tail = a[1:, 1:]
    root_v = np.sqrt(volumes[1:])
    sym = (root_v[:, None] * tail) / root_v[None, :]
    lam, vectors = linalg.sym_eigen(sym)
    w = vectors.T @ (root_v * a[1:, 0])
    p = vectors / root_v[:, None]
    return lam, w, p


def _eigenvalue_groups(lam: np.ndarray) -> list[list[int]]:
    """Indices of (ascending) eigenvalues clustered within ``RATE_SEP_TOL``."""
    sep = RATE_SEP_TOL * float(np.max(np.abs(lam)))
    groups = [[0]]
    for idx in range(1, lam.size):
        if lam[idx] - lam[groups[-1][-1]] <= sep:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return groups


def _group_rank(lam: np.ndarray, weights: np.ndarray) -> int:
    """Krylov dimension of the immobile part: eigenvalue groups the coupling
    vector actually reaches."""
    total = float(np.linalg.norm(weights))
    if total == 0.0:
        return 0
    count = 0
    for group in _eigenvalue_groups(lam):
        mass = float(np.linalg.norm(weights[group]))
        if mass > WEIGHT_RANK_TOL * total:
            count += 1
    return count


def krylov_ranks(system) -> tuple[int, int] | None:
    """Structured (controllability, observability) ranks of a network system.

    Raw Krylov matrices of networks with widely spread rates are hopelessly
    ill-conditioned (columns scale like ``|a|^k``), so their singular values
    cannot certify rank.  For a valid network the ranks are instead exactly
    ``1 + (number of distinct immobile eigenvalue groups with nonzero
    coupling weight)``, with independent input-side and output-side weight
    vectors; both are computed here through the well-conditioned symmetric
    eigensolve.  Returns ``None`` when the matrix lacks the network
    structure (no volume assignment exists).
    """
    a = _system_matrix(system)
    try:
        dec = network.recover_volumes(a)
    except ModelError:
        return None
    if a.shape[0] == 1:
        return 1, 1
    lam, w, p = immobile_eigensystem(a, dec.volumes)
    root_v = np.sqrt(dec.volumes[1:])
    vectors = root_v[:, None] * p
    obs_w = vectors.T @ (root_v * a[0, 1:])
    return 1 + _group_rank(lam, w), 1 + _group_rank(lam, obs_w)


def controllability_matrix(system) -> np.ndarray:
    """Columns ``b, a b, ..., a^{n-1} b`` for the mobile-zone input."""
    a = _system_matrix(system)
    n = a.shape[0]
    cols = np.zeros((n, n))
    v = np.zeros(n)
    v[0] = 1.0
    for k in range(n):
        cols[:, k] = v
        v = a @ v
    return cols


def observability_matrix(system) -> np.ndarray:
    """Rows ``c, c a, ..., c a^{n-1}`` for the mobile-zone output."""
    a = _system_matrix(system)
    n = a.shape[0]
    rows = np.zeros((n, n))
    v = np.zeros(n)
    v[0] = 1.0
    for k in range(n):
        rows[k, :] = v
        v = a.T @ v
    return rows


def markov_parameters(system, count: int) -> np.ndarray:
    """First ``count`` Markov parameters ``c a^j b`` (``m_0 = c b = 1``).

    Two realizations of dimensions n1 and n2 define the same input-output
    map exactly when their first n1 + n2 Markov parameters agree.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    a = _system_matrix(system)
    v = np.zeros(a.shape[0])
    v[0] = 1.0
    out = np.zeros(count)
    for j in range(count):
        out[j] = v[0]
        v = a @ v
    return out


def markov_deviation(sys_a, sys_b, count: int | None = None) -> float:
    """Largest per-parameter relative deviation between two realizations."""
    a = _system_matrix(sys_a)
    b = _system_matrix(sys_b)
    if count is None:
        count = a.shape[0] + b.shape[0]
    ma = markov_parameters(a, count)
    mb = markov_parameters(b, count)
    scale = np.maximum(np.maximum(np.abs(ma), np.abs(mb)), 1.0)
    return float(np.max(np.abs(ma - mb) / scale))


@dataclass(frozen=True)
class MinimalityReport:
    """Rank diagnostics behind a minimality decision.

    ``singular_values`` of the controllability matrix expose the gap around
    the rank threshold; ``duplicate_rate_groups`` lists groups of immobile
    zones sharing an exchange rate when the matrix has star structure (the
    structural cause of rank deficiency for star networks).
    """

    minimal: bool
    dimension: int
    rank: int
    singular_values: tuple[float, ...]
    duplicate_rate_groups: tuple[tuple[int, ...], ...] | None = None

    def __bool__(self) -> bool:
        return self.minimal

    def to_dict(self) -> dict:
        return {
            "minimal": self.minimal,
            "dimension": self.dimension,
            "rank": self.rank,
            "singular_values": list(self.singular_values),
            "duplicate_rate_groups": (
                None
                if self.duplicate_rate_groups is None
                else [list(g) for g in self.duplicate_rate_groups]
            ),
        }


def _star_rate_groups(a: np.ndarray) -> tuple[tuple[int, ...], ...] | None:
    """Duplicate-rate groups when the immobile block is diagonal, else None."""
    n = a.shape[0]
    if n <= 2:
        return ()
    tail = a[1:, 1:]
    off = tail - np.diag(np.diag(tail))
    if linalg.max_abs(off) > network.STATE_SPACE_TOL * max(1.0, linalg.max_abs(a)):
        return None
    rates = -np.diag(tail)
    order = np.argsort(rates)
    tol = RATE_SEP_TOL * max(float(rates.max()), 1e-300)
    groups = []
    current = [int(order[0])]
    for idx in order[1:]:
        if rates[idx] - rates[current[-1]] <= tol:
            current.append(int(idx))
        else:
            if len(current) > 1:
                groups.append(tuple(i + 2 for i in current))  # 1-based zone labels
            current = [int(idx)]
    if len(current) > 1:
        groups.append(tuple(i + 2 for i in current))
    return tuple(groups)


def is_minimal(system, rank_tol: float | None = None) -> MinimalityReport:
    """Kalman minimality test: full controllability rank.

    For these single-input single-output networks controllability and
    observability coincide, so the realization is minimal exactly when the
    controllability rank equals the dimension.  Valid networks use the
    structured rank of :func:`krylov_ranks`; matrices without network
    structure, or calls with an explicit ``rank_tol`` override, fall back to
    the singular-value threshold on the raw controllability matrix.  The
    raw singular values are always reported so borderline decisions can be
    audited.
    """
    a = _system_matrix(system)
    ctrl = controllability_matrix(a)
    sv = linalg.singular_values(ctrl)
    structured = krylov_ranks(a) if rank_tol is None else None
    if structured is None:
        rank = linalg.numerical_rank(ctrl, tol=rank_tol)
    else:
        rank = structured[0]
    return MinimalityReport(
        minimal=rank == a.shape[0],
        dimension=a.shape[0],
        rank=rank,
        singular_values=tuple(float(s) for s in sv),
        duplicate_rate_groups=_star_rate_groups(a),
    )


@dataclass(frozen=True)
class TransferFunction:
    """Strictly proper rational function ``num(z)/den(z)``.

    Coefficients are stored ascending in degree; the denominator is monic
    and the pair is coprime after root cancellation at the construction
    tolerance.
    """

    num: tuple[float, ...]
    den: tuple[float, ...]

    def __post_init__(self):
        num = tuple(float(x) for x in self.num)
        den = tuple(float(x) for x in self.den)
        if not den or len(num) >= len(den):
            raise ValueError("transfer function must be strictly proper")
        if abs(den[-1] - 1.0) > 1e-9:
            raise ValueError("denominator must be monic")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __call__(self, z):
        return npoly.polyval(z, self.num) / npoly.polyval(z, self.den)

    @property
    def dc_gain(self) -> float:
        return self.num[0] / self.den[0]

    def poles(self) -> np.ndarray:
        return npoly.polyroots(self.den)

    def to_dict(self) -> dict:
        return {"num": list(self.num), "den": list(self.den)}


def _faddeev_leverrier(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Characteristic polynomial and first adjugate entry, both ascending.

    Returns ``(den, num)`` with ``den`` the monic characteristic polynomial
    of ``a`` and ``num`` the (1,1) entry of ``adj(zI - a)``, which equals
    ``c adj(zI - a) b`` for the fixed mobile-zone channels.
    """
    n = a.shape[0]
    den_desc = [1.0]
    num_desc = []
    m = np.eye(n)
    for k in range(1, n + 1):
        num_desc.append(float(m[0, 0]))
        am = a @ m
        ck = -float(np.trace(am)) / k
        den_desc.append(ck)
        m = am + ck * np.eye(n)
    return np.array(den_desc[::-1]), np.array(num_desc[::-1])


def _eigen_num_den(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalue-product route.

    Requires a valid network matrix: the volume weighting makes
    ``V^{1/2} a V^{-1/2}`` symmetric, so eigenvalues are real and the
    numerator is a sum of shifted products with nonnegative weights.  All
    coefficient accumulations involve same-sign terms, so the coefficients
    come out with full relative accuracy.
    """
    dec = network.recover_volumes(a)
    root_v = np.sqrt(dec.volumes)
    sym = (root_v[:, None] * a) / root_v[None, :]
    values, vectors = linalg.sym_eigen(sym)
    den = npoly.polyfromroots(values).real
    weights = vectors[0, :] ** 2
    num = np.zeros(a.shape[0])
    for i, mu in enumerate(values):
        others = npoly.polyfromroots(np.delete(values, i)).real
        num[: others.size] += weights[i] * others
    return den, num


def _cancel_common_roots(num: np.ndarray, den: np.ndarray, tol: float):
    """Remove shared roots at relative tolerance ``tol`` (polynomial GCD)."""
    lead = num[-1]
    roots_n = list(npoly.polyroots(num)) if num.size > 1 else []
    roots_d = list(npoly.polyroots(den))
    kept_n = []
    for rn in roots_n:
        dists = [abs(rn - rd) for rd in roots_d]
        j = int(np.argmin(dists)) if dists else -1
        if j >= 0 and dists[j] <= tol * max(1.0, abs(roots_d[j])):
            roots_d.pop(j)
        else:
            kept_n.append(rn)
    if len(kept_n) == len(roots_n):
        return num, den
    new_num = lead * npoly.polyfromroots(kept_n)
    new_den = npoly.polyfromroots(roots_d)
    if linalg.max_abs(new_num.imag) > 1e-8 * max(1.0, linalg.max_abs(new_num.real)) \
            or linalg.max_abs(new_den.imag) > 1e-8 * max(1.0, linalg.max_abs(new_den.real)):
        # unmatched conjugate pairs: safer to keep the uncancelled form
        return num, den
    return new_num.real, new_den.real


def transfer_function(system, gcd_tol: float = GCD_TOL) -> TransferFunction:
    """Coprime transfer function ``c (zI - a)^{-1} b`` of a realization."""
    a = _system_matrix(system)
    try:
        den, num = _eigen_num_den(a)
    except ModelError:
        den, num = _faddeev_leverrier(a)
    num, den = _cancel_common_roots(num, den, gcd_tol)
    lead = den[-1]
    return TransferFunction(num=tuple(num / lead), den=tuple(den / lead))


def frequency_response(tf: TransferFunction, omegas) -> np.ndarray:
    """Evaluate ``T(i w)`` on a frequency grid.

    Raises :class:`PoleOnAxisError` when a denominator root lies within
    ``POLE_AXIS_TOL`` of the imaginary axis (stable network realizations
    never do).
    """
    poles = tf.poles()
    nearest = float(np.min(np.abs(poles.real))) if poles.size else np.inf
    if nearest <= POLE_AXIS_TOL:
        raise PoleOnAxisError(
            f"pole with |Re| = {nearest:.3e} lies on the imaginary axis"
        )
    w = np.asarray(omegas, dtype=float)
    return tf(1j * w)
