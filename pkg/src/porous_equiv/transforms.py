"""Equivalent star (MRMT) and chain (MINC) realizations.

Any controllable network realization admits a similarity transform that
preserves the input/output channels and the compartmental sign structure
while reshaping the immobile part into either

* a star: every immobile zone exchanges only with the mobile zone, so the
  immobile block is diagonal (multi-rate mass transfer form), or
* a chain: the immobile zones form a series hanging off the mobile zone, so
  the full matrix is tridiagonal (multiple-interacting-continua form).

Both constructions are explicit.  The star form diagonalizes the immobile
block through its volume-weighted symmetrization, which keeps the spectrum
real and produces provably positive recovered volumes and rates.  The chain
form starts from the star, runs the Lanczos recurrence on the diagonal rate
matrix, rescales by a Cholesky factor of the rotated volume matrix, and
finally by the positive vector that maps the all-ones equilibrium onto
itself.  Output systems are assembled exactly from their recovered physical
parameters; the numerically computed similarity is kept only as a residual.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import linalg, network, realization
from .errors import (
    NotControllableError,
    NumericallyDegenerateError,
    PositivityViolationError,
)
from .network import NetworkSpec, StateSpace, build_state_space, recover_volumes
from .realization import immobile_eigensystem

#: Two immobile eigenvalues closer than this (relative to the largest
#: magnitude) make the star construction numerically degenerate.
EIG_SEP_TOL = 1e-8
#: A mode weight below this (relative to the largest) contradicts the rank
#: test and aborts the construction.
WEIGHT_TOL = 1e-12
#: Entries of the equilibrium preimage must exceed this to count as positive.
POS_TOL = 1e-10
#: Tolerance for asserting structural zeros when verifying assembled forms.
STRUCT_TOL = 1e-9

MRMT = "MRMT"
MINC = "MINC"


@dataclass(frozen=True)
class EquivalentRealization:
    """A transformed realization together with its physical reading.

    ``transform`` semantics depend on ``transform_kind``:

    * ``"similarity"`` (star/chain constructions): square invertible ``R``
      with ``system.a == R^{-1} a R``, ``R^{-1} b == b`` and ``c R == c``;
      reduced-coordinate states map to original ones via ``x = R @ x_new``.
    * ``"lumping"`` (exact aggregation): rectangular ``L`` with
      ``x_new = L @ x`` and ``L a == system.a L``.
    * ``"selection"`` (truncation): rectangular row-selection matrix; the
      result is an approximation, not an equivalent realization.

    ``params`` are the recovered volumes and exchange rates of the
    equivalent network; ``residuals`` is a map of named verification norms.
    """

    structure: str
    transform: np.ndarray
    transform_kind: str
    system: StateSpace
    params: NetworkSpec
    residuals: Mapping[str, float]

    def to_dict(self) -> dict:
        return {
            "structure": self.structure,
            "n": self.system.n,
            "transform": [list(map(float, row)) for row in self.transform],
            "transform_kind": self.transform_kind,
            "system": self.system.to_dict(),
            "params": self.params.to_dict(),
            "residuals": {k: float(v) for k, v in self.residuals.items()},
        }


def _trivial_realization(ss: StateSpace, structure: str) -> EquivalentRealization:
    params = NetworkSpec(volumes=(1.0,), edges=(), flow=1.0)
    system, _ = build_state_space(params)
    return EquivalentRealization(
        structure=structure,
        transform=np.eye(1),
        transform_kind="similarity",
        system=system,
        params=params,
        residuals={"similarity": 0.0, "input_channel": 0.0,
                   "output_channel": 0.0, "volume_conservation": 0.0},
    )


def _require_minimal(ss: StateSpace, rank_tol: float | None):
    report = realization.is_minimal(ss, rank_tol=rank_tol)
    if not report.minimal:
        raise NotControllableError(
            f"realization is not controllable: rank {report.rank} < {report.dimension}",
            rank=report.rank,
            dimension=report.dimension,
            singular_values=report.singular_values,
        )
    return report


def _residuals(original: StateSpace, r: np.ndarray, result: StateSpace,
               volumes_in: np.ndarray, volumes_out: np.ndarray) -> dict:
    n = original.n
    e1 = np.zeros(n)
    e1[0] = 1.0
    back = linalg.solve(r, original.a @ r)
    sim = linalg.max_abs(back - result.a) / max(1.0, linalg.max_abs(result.a))
    total_in = float(np.sum(volumes_in))
    total_out = float(np.sum(volumes_out))
    return {
        "similarity": float(sim),
        "input_channel": float(linalg.max_abs(linalg.solve(r, e1) - e1)),
        "output_channel": float(linalg.max_abs(r[0, :] - e1)),
        "row_sums": float(linalg.max_abs(result.a @ np.ones(n) + e1)),
        "volume_conservation": abs(total_in - total_out) / max(total_in, 1e-300),
    }


def _star_params(rates: np.ndarray, vols: np.ndarray) -> NetworkSpec:
    edges = tuple(
        (1, k + 2, float(rates[k] * vols[k])) for k in range(rates.size)
    )
    return NetworkSpec(volumes=(1.0, *map(float, vols)), edges=edges, flow=1.0)


def to_mrmt(ss: StateSpace, rank_tol: float | None = None) -> EquivalentRealization:
    """Equivalent star realization of a controllable network system.

    The immobile zones of the result each exchange only with the mobile
    zone; they are ordered by ascending exchange rate ``-lambda_i``.  The
    recovered star parameters are ``d_i = -w_i^2 / lambda_i`` and
    ``V_i = w_i^2 / lambda_i^2`` for the eigenvalues ``lambda_i`` and mode
    weights ``w_i`` of the immobile block.

    Raises:
        NotControllableError: the rank test fails (or a mode weight is
            numerically zero, which contradicts it).
        NumericallyDegenerateError: two immobile eigenvalues coincide
            within ``EIG_SEP_TOL``.
    """
    if ss.n == 1:
        return _trivial_realization(ss, MRMT)
    dec = recover_volumes(ss.a)
    _require_minimal(ss, rank_tol)
    lam, w, p = immobile_eigensystem(ss.a, dec.volumes)

    gaps = np.diff(lam)
    sep = EIG_SEP_TOL * float(np.max(np.abs(lam)))
    if gaps.size and float(np.min(gaps)) <= sep:
        raise NumericallyDegenerateError(
            f"immobile eigenvalues separated by {float(np.min(gaps)):.3e} "
            f"(threshold {sep:.3e})"
        )
    w_scale = float(np.max(np.abs(w)))
    if float(np.min(np.abs(w))) <= WEIGHT_TOL * w_scale:
        raise NotControllableError(
            "a mode weight is numerically zero although the rank test passed",
            rank=int(np.sum(np.abs(w) > WEIGHT_TOL * w_scale)) + 1,
            dimension=ss.n,
        )

    rates = -lam
    order = np.argsort(rates, kind="stable")
    rates = rates[order]
    w = w[order]
    lam = lam[order]
    p = p[:, order]

    vols = w**2 / lam**2
    params = _star_params(rates, vols)
    system, _ = build_state_space(params)

    r = np.eye(ss.n)
    r[1:, 1:] = p @ np.diag(-w / lam)
    residuals = _residuals(ss, r, system, dec.volumes, np.asarray(params.volumes))
    return EquivalentRealization(
        structure=MRMT,
        transform=r,
        transform_kind="similarity",
        system=system,
        params=params,
        residuals=residuals,
    )


def to_minc(ss: StateSpace, rank_tol: float | None = None) -> EquivalentRealization:
    """Equivalent chain realization of a controllable network system.

    Pipeline: reduce to the star form, tridiagonalize the diagonal rate
    matrix by the Lanczos recurrence started from the normalized mobile
    coupling column, symmetrize volumes through the Cholesky factor of the
    rotated volume matrix, and rescale by the positive equilibrium preimage
    ``x = T^{-1} 1``.  The recovered chain volumes are ``x_i^2``.  The chain
    form is canonical: its ordering is forced by the construction.

    Raises everything :func:`to_mrmt` raises, plus
    :class:`~porous_equiv.errors.LanczosBreakdown` (recurrence breakdown,
    contradicting minimality) and :class:`PositivityViolationError` when a
    provably positive quantity is lost to round-off.
    """
    if ss.n == 1:
        return _trivial_realization(ss, MINC)
    star = to_mrmt(ss, rank_tol=rank_tol)
    a_star = star.system.a
    m = ss.n - 1
    rates = a_star[1:, 0].copy()
    delta = np.diag(-rates)
    q1 = rates / float(np.linalg.norm(rates))
    lz = linalg.lanczos(delta, q1)

    star_vols = np.asarray(star.params.volumes)
    rotated_vols = lz.q.T @ (star_vols[1:, None] * lz.q)
    u = linalg.cholesky_upper(rotated_vols)
    # tail transform QU^{-1} and its inverse UQ'
    t_tail = linalg.solve_triangular(u.T, lz.q.T, lower=True).T
    t_tail_inv = u @ lz.q.T

    x = np.ones(ss.n)
    x[1:] = t_tail_inv @ np.ones(m)
    if float(np.min(x)) <= POS_TOL:
        raise PositivityViolationError(
            f"equilibrium preimage has entry {float(np.min(x)):.3e}; "
            "expected strictly positive"
        )

    t = np.eye(ss.n)
    t[1:, 1:] = t_tail
    t_inv = np.eye(ss.n)
    t_inv[1:, 1:] = t_tail_inv
    a_tri = t_inv @ a_star @ t
    a_chain = a_tri / x[:, None] * x[None, :]

    chain_vols = x**2
    chain_rates = np.array(
        [chain_vols[k] * a_chain[k, k + 1] for k in range(ss.n - 1)]
    )
    if np.any(chain_rates <= 0):
        raise PositivityViolationError(
            "chain construction produced a non-positive exchange rate"
        )
    params = NetworkSpec(
        volumes=tuple(map(float, chain_vols)),
        edges=tuple((k + 1, k + 2, float(chain_rates[k])) for k in range(ss.n - 1)),
        flow=1.0,
    )
    system, _ = build_state_space(params)

    r = star.transform @ (t * x[None, :])
    dec_in = recover_volumes(ss.a)
    residuals = _residuals(ss, r, system, dec_in.volumes, np.asarray(params.volumes))
    residuals["lanczos_orthogonality"] = float(
        linalg.max_abs(lz.q.T @ lz.q - np.eye(m))
    )
    return EquivalentRealization(
        structure=MINC,
        transform=r,
        transform_kind="similarity",
        system=system,
        params=params,
        residuals=residuals,
    )


@dataclass(frozen=True)
class EquivalenceReport:
    """Input-output comparison of two realizations.

    ``markov_deviation`` is the primary criterion (largest per-parameter
    relative deviation over the first ``dim_a + dim_b`` Markov parameters);
    the transfer-function coefficient deviations are reported alongside.
    """

    dim_a: int
    dim_b: int
    markov_count: int
    markov_deviation: float
    tf_num_deviation: float
    tf_den_deviation: float

    @property
    def max_deviation(self) -> float:
        return max(self.markov_deviation, self.tf_num_deviation,
                   self.tf_den_deviation)

    def equivalent(self, tol: float = 1e-6) -> bool:
        return self.markov_deviation < tol

    def to_dict(self) -> dict:
        return {
            "dim_a": self.dim_a,
            "dim_b": self.dim_b,
            "markov_count": self.markov_count,
            "markov_deviation": self.markov_deviation,
            "tf_num_deviation": self.tf_num_deviation,
            "tf_den_deviation": self.tf_den_deviation,
        }


def coefficient_deviation(p, q) -> float:
    """Max absolute difference of two ascending coefficient lists, padded,
    relative to the largest coefficient magnitude (floored at 1)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    size = max(p.size, q.size)
    pp = np.zeros(size)
    qq = np.zeros(size)
    pp[: p.size] = p
    qq[: q.size] = q
    scale = max(1.0, linalg.max_abs(pp), linalg.max_abs(qq))
    return float(np.max(np.abs(pp - qq)) / scale)


def verify_equivalence(sys_a, sys_b) -> EquivalenceReport:
    """Compare two realizations by Markov parameters and transfer functions."""
    a = sys_a.a if isinstance(sys_a, StateSpace) else linalg.as_matrix(sys_a, square=True)
    b = sys_b.a if isinstance(sys_b, StateSpace) else linalg.as_matrix(sys_b, square=True)
    count = a.shape[0] + b.shape[0]
    dev = realization.markov_deviation(a, b, count)
    tf_a = realization.transfer_function(a)
    tf_b = realization.transfer_function(b)
    return EquivalenceReport(
        dim_a=a.shape[0],
        dim_b=b.shape[0],
        markov_count=count,
        markov_deviation=dev,
        tf_num_deviation=coefficient_deviation(tf_a.num, tf_b.num),
        tf_den_deviation=coefficient_deviation(tf_a.den, tf_b.den),
    )
