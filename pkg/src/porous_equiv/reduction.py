"""Model reduction: exact lumping and threshold truncation.

Two distinct operations live here.  :func:`minimal_mrmt` is exact: it drops
immobile modes that the mobile zone cannot reach (zero mode weight) and
merges modes sharing an exchange rate by volume-weighted aggregation,
producing the minimal star realization with identical Markov parameters.
:func:`truncate` is approximate: it removes star zones (or cuts the chain)
failing an explicit criterion while keeping the surviving volumes and rates
unchanged, and reports how far the input-output behaviour moved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg, realization
from .errors import EmptyModelError
from .network import NetworkSpec, StateSpace, build_state_space, recover_volumes
from .realization import immobile_eigensystem
from .transforms import (
    EIG_SEP_TOL,
    MINC,
    MRMT,
    EquivalentRealization,
    _star_params,
    _trivial_realization,
    coefficient_deviation,
)

#: Mode weights below this (relative to the largest) count as unreachable.
MODE_TOL = 1e-8
#: Frequency grid for truncation deviation reports: (min, max, points),
#: logarithmically spaced.
DEVIATION_GRID = (1e-2, 1e2, 100)


def minimal_mrmt(ss: StateSpace, mode_tol: float = MODE_TOL) -> EquivalentRealization:
    """Minimal star realization of a (possibly non-minimal) network system.

    Immobile modes with weight magnitude at or below ``mode_tol`` (relative)
    are unreachable from the mobile zone and dropped; modes sharing an
    eigenvalue are merged into one zone with volume ``sum(V_i)`` and rate
    parameter ``-lambda * sum(V_i)``.  The result has dimension equal to the
    rank of the controllability matrix and exactly the same input-output
    map; total volume is conserved.

    The returned ``transform`` is the lumping matrix ``L`` (``x_new = L x``,
    ``L a == a_new L``), rectangular when the dimension shrinks.
    """
    if ss.n == 1:
        return _trivial_realization(ss, MRMT)
    dec = recover_volumes(ss.a)
    lam, w, p = immobile_eigensystem(ss.a, dec.volumes)

    w_scale = float(np.max(np.abs(w)))
    kept = np.flatnonzero(np.abs(w) > mode_tol * w_scale)
    lam_k = lam[kept]
    w_k = w[kept]

    # group near-equal eigenvalues (lam is ascending)
    sep = EIG_SEP_TOL * float(np.max(np.abs(lam)))
    groups: list[list[int]] = [[0]]
    for idx in range(1, lam_k.size):
        if lam_k[idx] - lam_k[groups[-1][-1]] <= sep:
            groups[-1].append(idx)
        else:
            groups.append([idx])

    root_v = np.sqrt(dec.volumes[1:])
    p_inv = (root_v[:, None] * p).T * root_v[None, :]

    mode_vols = w_k**2 / lam_k**2
    merged = []
    for group in groups:
        vols = mode_vols[group]
        v_g = float(np.sum(vols))
        lam_g = float(np.sum(vols * lam_k[group]) / v_g)
        row = np.zeros(ss.n)
        for idx in group:
            coeff = -w_k[idx] / lam_k[idx]
            row[1:] += coeff * p_inv[kept[idx], :]
        merged.append((-lam_g, v_g, row / v_g))
    merged.sort(key=lambda item: item[0])

    rates = np.array([rate for rate, _, _ in merged])
    vols = np.array([vol for _, vol, _ in merged])
    params = _star_params(rates, vols)
    system, _ = build_state_space(params)

    lump = np.zeros((1 + len(merged), ss.n))
    lump[0, 0] = 1.0
    for k, (_, _, row) in enumerate(merged):
        lump[k + 1] = row

    residuals = {
        "lumping": float(
            linalg.max_abs(lump @ ss.a - system.a @ lump)
            / max(1.0, linalg.max_abs(ss.a))
        ),
        "markov": realization.markov_deviation(ss, system),
        "volume_conservation": abs(
            float(np.sum(dec.volumes)) - float(np.sum(params.volumes))
        ) / float(np.sum(dec.volumes)),
    }
    return EquivalentRealization(
        structure=MRMT,
        transform=lump,
        transform_kind="lumping",
        system=system,
        params=params,
        residuals=residuals,
    )


@dataclass(frozen=True)
class ReductionReport:
    """Approximation error introduced by truncating compartments.

    ``tf_coefficient_deviation`` compares coprime transfer-function
    coefficients (padded to a common degree); ``max_frequency_deviation`` is
    the sup of ``|T(iw) - T_reduced(iw)|`` over the logarithmic grid.
    """

    structure: str
    criterion: str
    threshold: float | int | None
    kept: tuple[int, ...]
    dropped: tuple[int, ...]
    tf_coefficient_deviation: float
    max_frequency_deviation: float
    grid: tuple[float, float, int] = DEVIATION_GRID

    def to_dict(self) -> dict:
        return {
            "structure": self.structure,
            "criterion": self.criterion,
            "threshold": self.threshold,
            "kept": list(self.kept),
            "dropped": list(self.dropped),
            "tf_coefficient_deviation": self.tf_coefficient_deviation,
            "max_frequency_deviation": self.max_frequency_deviation,
            "grid": {
                "omega_min": self.grid[0],
                "omega_max": self.grid[1],
                "points": self.grid[2],
            },
        }


def _star_components(params: NetworkSpec):
    """Immobile (volume, rate) pairs of a star network, in stored order."""
    vols = list(params.volumes[1:])
    d = {j: rate for i, j, rate in params.edges}
    return vols, [d[k + 2] for k in range(len(vols))]


def _chain_components(params: NetworkSpec):
    vols = list(params.volumes)
    d = {min(i, j): rate for i, j, rate in params.edges}
    return vols, [d[k + 1] for k in range(len(vols) - 1)]


def _select_star(params: NetworkSpec, criterion: str, value) -> list[int]:
    vols, rates = _star_components(params)
    if criterion == "volume_floor":
        return [k for k, v in enumerate(vols) if v >= value]
    if criterion == "rate_floor":
        return [k for k, r in enumerate(rates) if r >= value]
    # keep the (value - 1) largest-volume zones, preserving stored order
    count = max(int(value) - 1, 0)
    order = sorted(range(len(vols)), key=lambda k: -vols[k])[:count]
    return sorted(order)


def _select_chain(params: NetworkSpec, criterion: str, value) -> int:
    """Number of compartments (mobile included) kept from the chain head."""
    vols, rates = _chain_components(params)
    if criterion == "volume_floor":
        passing = [k for k, v in enumerate(vols) if v >= value]
        return max(passing) + 1 if passing else 0
    if criterion == "rate_floor":
        last = 0
        for k, r in enumerate(rates):
            if r >= value:
                last = k + 1
        return last + 1
    return min(int(value), len(vols))


def truncate(eq: EquivalentRealization, volume_floor: float | None = None,
             rate_floor: float | None = None, keep: int | None = None,
             allow_mobile_only: bool = False,
             grid: tuple[float, float, int] = DEVIATION_GRID,
             ) -> tuple[EquivalentRealization, ReductionReport]:
    """Drop compartments of a star or chain realization by a criterion.

    Exactly one of ``volume_floor`` (keep zones with volume >= floor),
    ``rate_floor`` (keep zones whose exchange-rate parameter >= floor), or
    ``keep`` (total compartment count) must be given.  Star zones are
    removed individually; a chain is cut after the last compartment that
    passes.  Surviving volumes and rates are kept unchanged, so the result
    is an approximation; the report quantifies the deviation.

    Raises :class:`EmptyModelError` when every immobile zone fails the
    criterion, unless ``allow_mobile_only`` is set.
    """
    if eq.structure not in (MRMT, MINC):
        raise ValueError(f"cannot truncate structure {eq.structure!r}")
    chosen = [
        (name, value)
        for name, value in (
            ("volume_floor", volume_floor),
            ("rate_floor", rate_floor),
            ("keep_k", keep),
        )
        if value is not None
    ]
    if len(chosen) != 1:
        raise ValueError("give exactly one of volume_floor, rate_floor, keep")
    criterion, value = chosen[0]

    n = eq.system.n
    if eq.structure == MRMT:
        kept_zones = _select_star(eq.params, criterion, value)
        kept = [0] + [k + 1 for k in kept_zones]
    else:
        head = _select_chain(eq.params, criterion, value)
        kept = list(range(max(head, 1)))

    if len(kept) == 1 and not allow_mobile_only:
        raise EmptyModelError(
            f"criterion {criterion}={value} removed every immobile zone"
        )
    dropped = [k for k in range(n) if k not in kept]

    if eq.structure == MRMT:
        vols, rates = _star_components(eq.params)
        params = NetworkSpec(
            volumes=(1.0, *(vols[k - 1] for k in kept[1:])),
            edges=tuple(
                (1, pos + 2, rates[k - 1]) for pos, k in enumerate(kept[1:])
            ),
            flow=1.0,
        )
    else:
        vols, rates = _chain_components(eq.params)
        m = len(kept)
        params = NetworkSpec(
            volumes=tuple(vols[:m]),
            edges=tuple((k + 1, k + 2, rates[k]) for k in range(m - 1)),
            flow=1.0,
        )
    system, _ = build_state_space(params)

    selection = np.zeros((len(kept), n))
    for row, k in enumerate(kept):
        selection[row, k] = 1.0

    tf_full = realization.transfer_function(eq.system)
    tf_red = realization.transfer_function(system)
    coeff_dev = max(
        coefficient_deviation(tf_full.num, tf_red.num),
        coefficient_deviation(tf_full.den, tf_red.den),
    )
    omegas = np.geomspace(grid[0], grid[1], int(grid[2]))
    resp_full = realization.frequency_response(tf_full, omegas)
    resp_red = realization.frequency_response(tf_red, omegas)
    freq_dev = float(np.max(np.abs(resp_full - resp_red)))

    report = ReductionReport(
        structure=eq.structure,
        criterion=criterion,
        threshold=value,
        kept=tuple(k + 1 for k in kept),
        dropped=tuple(k + 1 for k in dropped),
        tf_coefficient_deviation=coeff_dev,
        max_frequency_deviation=freq_dev,
        grid=grid,
    )
    reduced = EquivalentRealization(
        structure=eq.structure,
        transform=selection,
        transform_kind="selection",
        system=system,
        params=params,
        residuals={"tf_coefficient_deviation": coeff_dev,
                   "max_frequency_deviation": freq_dev},
    )
    return reduced, report
