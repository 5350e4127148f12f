"""Compartment networks: parsing, validation, and the normalized realization.

A network is one mobile zone (compartment 1, flushed by an advective flow Q)
plus immobile zones exchanging solute by diffusion.  This module turns a
user-facing :class:`NetworkSpec` into the normalized state-space triple
``(A, e1, e1')`` (time rescaled so Q/V1 = 1, volumes rescaled so V1 = 1) and
goes back: it recovers the diagonal volume matrix ``V`` and the symmetric
exchange matrix ``M`` with ``A = -B B' - V^{-1} M`` from a bare matrix, and
extracts physical volumes/rates from a decomposition.

Structural requirements on a valid ``A`` (referred to as "the network
assumptions" throughout): Metzler sign pattern, rows summing to ``-B``,
existence of positive volumes making ``V A`` symmetric, and an irreducible
exchange graph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, InitVar

import numpy as np

from . import linalg
from .errors import (
    AssumptionViolationError,
    DisconnectedGraphError,
    InconsistentSymmetryError,
    NonPositiveParameterError,
    SpecFormatError,
)

#: Absolute scale-aware tolerance for the Metzler and row-sum invariants.
STATE_SPACE_TOL = 1e-12
#: Relative tolerance on the symmetry of V A (equivalently, on agreement of
#: volumes recovered along different paths).
SYMMETRY_TOL = 1e-8
#: Entries of M smaller than this (relative to the largest) are treated as
#: structural zeros when extracting edges.
EDGE_TOL = 1e-12


@dataclass(frozen=True)
class NetworkSpec:
    """User-facing network description.

    ``volumes[0]`` is the mobile zone; ``edges`` hold 1-based compartment
    indices ``(i, j, d)`` with ``d`` the diffusive exchange rate between
    compartments ``i`` and ``j`` (symmetric, volume/time).  ``flow`` is the
    advective flow through the mobile zone.
    """

    volumes: tuple[float, ...]
    edges: tuple[tuple[int, int, float], ...] = ()
    flow: float = 1.0

    def __post_init__(self):
        volumes = tuple(float(v) for v in self.volumes)
        object.__setattr__(self, "volumes", volumes)
        if not volumes:
            raise SpecFormatError("a network needs at least one compartment")
        if any(v <= 0 or not np.isfinite(v) for v in volumes):
            raise NonPositiveParameterError("all volumes must be positive and finite")
        if self.flow <= 0 or not np.isfinite(self.flow):
            raise NonPositiveParameterError("flow must be positive and finite")
        object.__setattr__(self, "flow", float(self.flow))
        n = len(volumes)
        seen = set()
        canonical = []
        for i, j, d in self.edges:
            i, j, d = int(i), int(j), float(d)
            if i == j:
                raise SpecFormatError(f"self-loop edge on compartment {i}")
            if not (1 <= i <= n and 1 <= j <= n):
                raise SpecFormatError(f"edge ({i},{j}) out of range 1..{n}")
            if d <= 0 or not np.isfinite(d):
                raise NonPositiveParameterError(
                    f"edge ({i},{j}) has non-positive rate {d}"
                )
            key = (min(i, j), max(i, j))
            if key in seen:
                raise SpecFormatError(f"duplicate edge between {key[0]} and {key[1]}")
            seen.add(key)
            canonical.append((key[0], key[1], d))
        object.__setattr__(self, "edges", tuple(canonical))

    @property
    def n(self) -> int:
        return len(self.volumes)

    def to_dict(self) -> dict:
        return {
            "volumes": list(self.volumes),
            "flow": self.flow,
            "edges": [{"i": i, "j": j, "d": d} for i, j, d in self.edges],
        }


@dataclass(frozen=True)
class StateSpace:
    """Normalized single-input single-output realization.

    ``a`` is the n-by-n system matrix; the input and output channels are
    structurally fixed to the mobile zone (``b = e1``, ``c = e1'``), so the
    matrix alone determines the realization.  On construction the matrix is
    checked to be Metzler with rows summing to ``-b``.
    """

    a: np.ndarray
    validate: InitVar[bool] = True

    def __post_init__(self, validate: bool):
        a = linalg.as_matrix(self.a, square=True)
        a.flags.writeable = False
        object.__setattr__(self, "a", a)
        if validate:
            problems = state_space_violations(a)
            if problems:
                raise AssumptionViolationError("; ".join(problems))

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def b(self) -> np.ndarray:
        e1 = np.zeros(self.n)
        e1[0] = 1.0
        return e1

    @property
    def c(self) -> np.ndarray:
        return self.b

    def to_dict(self) -> dict:
        return {
            "a": [list(map(float, row)) for row in self.a],
            "b": list(map(float, self.b)),
            "c": list(map(float, self.c)),
        }


def state_space_violations(a: np.ndarray) -> list[str]:
    """Human-readable list of Metzler/row-sum violations (empty if valid)."""
    tol = STATE_SPACE_TOL * max(1.0, linalg.max_abs(a))
    problems = []
    off = a - np.diag(np.diag(a))
    worst = float(off.min()) if off.size else 0.0
    if worst < -tol:
        problems.append(f"negative off-diagonal entry {worst:.3e}")
    n = a.shape[0]
    b = np.zeros(n)
    b[0] = 1.0
    dev = linalg.max_abs(a @ np.ones(n) + b)
    if dev > tol:
        problems.append(f"row sums deviate from -b by {dev:.3e}")
    return problems


@dataclass(frozen=True)
class VMDecomposition:
    """Volume/exchange split ``a = -b b' - V^{-1} M`` of a normalized system.

    ``volumes`` is the diagonal of the positive matrix ``V`` (``volumes[0]``
    is 1 after normalization) and ``exchange`` the symmetric matrix ``M``
    with zero row sums, positive diagonal, and non-positive off-diagonal
    entries.  ``time_scale``/``volume_scale`` record the normalization
    applied to the original input (physical time = normalized time /
    time_scale; physical volumes = volumes * volume_scale); they are carried
    as metadata only.
    """

    volumes: np.ndarray
    exchange: np.ndarray
    time_scale: float = 1.0
    volume_scale: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.volumes, dtype=float).copy()
        m = linalg.as_matrix(self.exchange, square=True)
        if v.ndim != 1 or v.size != m.shape[0]:
            raise ValueError("volumes and exchange matrix sizes disagree")
        if np.any(v <= 0):
            raise NonPositiveParameterError("recovered volumes must be positive")
        v.flags.writeable = False
        m.flags.writeable = False
        object.__setattr__(self, "volumes", v)
        object.__setattr__(self, "exchange", m)

    @property
    def n(self) -> int:
        return self.volumes.size

    def system_matrix(self) -> np.ndarray:
        """Rebuild ``a = -b b' - V^{-1} M``."""
        n = self.n
        bbt = np.zeros((n, n))
        bbt[0, 0] = 1.0
        return -bbt - self.exchange / self.volumes[:, None]

    def to_dict(self) -> dict:
        return {
            "volumes": list(map(float, self.volumes)),
            "exchange": [list(map(float, row)) for row in self.exchange],
            "time_scale": self.time_scale,
            "volume_scale": self.volume_scale,
        }


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the structural checks on a system matrix."""

    checks: tuple[CheckResult, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.checks
            ],
        }


def _undirected_components(n: int, neighbors) -> list[int]:
    """Nodes unreachable from node 0 when following ``neighbors``."""
    seen = [False] * n
    stack = [0]
    seen[0] = True
    while stack:
        i = stack.pop()
        for j in neighbors(i):
            if not seen[j]:
                seen[j] = True
                stack.append(j)
    return [i for i, s in enumerate(seen) if not s]


def build_state_space(spec: NetworkSpec) -> tuple[StateSpace, VMDecomposition]:
    """Assemble the normalized realization of a network description.

    Normalization rescales time so the mobile-zone turnover Q/V1 equals 1
    and volumes so V1 = 1; the applied factors are recorded on the returned
    :class:`VMDecomposition`.  Raises :class:`DisconnectedGraphError` when
    some compartment cannot exchange with the mobile zone.
    """
    n = spec.n
    adjacency: dict[int, list[tuple[int, float]]] = {i: [] for i in range(n)}
    for i, j, d in spec.edges:
        adjacency[i - 1].append((j - 1, d))
        adjacency[j - 1].append((i - 1, d))
    unreachable = _undirected_components(n, lambda i: (j for j, _ in adjacency[i]))
    if unreachable:
        raise DisconnectedGraphError([i + 1 for i in unreachable])

    v = np.array(spec.volumes) / spec.volumes[0]
    a = np.zeros((n, n))
    m = np.zeros((n, n))
    for i, j, d in spec.edges:
        i, j = i - 1, j - 1
        rate = d / spec.flow
        a[i, j] = rate / v[i]
        a[j, i] = rate / v[j]
        m[i, j] = m[j, i] = -rate
    np.fill_diagonal(m, -m.sum(axis=1))
    b = np.zeros(n)
    b[0] = 1.0
    np.fill_diagonal(a, 0.0)
    np.fill_diagonal(a, -(a.sum(axis=1) + b))
    dec = VMDecomposition(
        volumes=v,
        exchange=m,
        time_scale=spec.flow / spec.volumes[0],
        volume_scale=spec.volumes[0],
    )
    return StateSpace(a), dec


def _bfs_volumes(a: np.ndarray) -> np.ndarray:
    """Volumes along a breadth-first tree from the mobile zone.

    The defining ratio ``V_j = V_i * a[i, j] / a[j, i]`` is applied along
    tree edges; consistency across non-tree edges is established afterwards
    by the symmetry check on ``V A``.
    """
    n = a.shape[0]
    tol = STATE_SPACE_TOL * max(1.0, linalg.max_abs(a))
    v = np.full(n, np.nan)
    v[0] = 1.0
    queue = [0]
    while queue:
        i = queue.pop(0)
        for j in range(n):
            if i == j or not np.isnan(v[j]):
                continue
            if a[i, j] > tol and a[j, i] > tol:
                v[j] = v[i] * a[i, j] / a[j, i]
                queue.append(j)
            elif (a[i, j] > tol) != (a[j, i] > tol):
                raise InconsistentSymmetryError(
                    f"one-sided coupling between compartments {i + 1} and {j + 1}"
                )
    missing = np.flatnonzero(np.isnan(v))
    if missing.size:
        raise DisconnectedGraphError([int(i) + 1 for i in missing])
    return v


def recover_volumes(a, symmetry_tol: float = SYMMETRY_TOL) -> VMDecomposition:
    """Reconstruct the (V, M) decomposition from a bare system matrix.

    Volumes are propagated from the mobile zone (fixed at 1) along a
    breadth-first tree; ``M = -V (a + b b')``.  Raises
    :class:`InconsistentSymmetryError` when no volume assignment makes
    ``V a`` symmetric within ``symmetry_tol`` (relative), which also covers
    disagreement between volumes recovered along different paths.
    """
    a = linalg.as_matrix(a, square=True)
    problems = state_space_violations(a)
    if problems:
        raise AssumptionViolationError("; ".join(problems))
    v = _bfs_volumes(a)
    va = v[:, None] * a
    dev = linalg.max_abs(va - va.T)
    if dev > symmetry_tol * max(1.0, linalg.max_abs(va)):
        raise InconsistentSymmetryError(
            f"V A deviates from symmetry by {dev:.3e}; "
            "no consistent volume assignment exists"
        )
    n = a.shape[0]
    bbt = np.zeros((n, n))
    bbt[0, 0] = 1.0
    m = -v[:, None] * (a + bbt)
    m = 0.5 * (m + m.T)
    return VMDecomposition(volumes=v, exchange=m)


def _irreducible(a: np.ndarray) -> bool:
    """Strong connectivity of the off-diagonal support graph."""
    n = a.shape[0]
    if n == 1:
        return True
    tol = STATE_SPACE_TOL * max(1.0, linalg.max_abs(a))
    support = np.abs(a) > tol
    np.fill_diagonal(support, False)
    forward = _undirected_components(n, lambda i: np.flatnonzero(support[:, i]))
    backward = _undirected_components(n, lambda i: np.flatnonzero(support[i, :]))
    return not forward and not backward


def check_assumptions(a) -> ValidationReport:
    """Run the structural network checks on a matrix; never raises.

    Checks, in order: Metzler sign pattern; row-sum identity ``a 1 = -b``;
    irreducibility of the exchange graph; existence of a consistent volume
    assignment; symmetry of ``V a`` under that assignment.
    """
    a = linalg.as_matrix(a, square=True)
    checks = []
    problems = state_space_violations(a)
    metzler = [p for p in problems if "off-diagonal" in p]
    rowsum = [p for p in problems if "row sums" in p]
    checks.append(CheckResult("metzler", not metzler, "; ".join(metzler)))
    checks.append(CheckResult("row_sums", not rowsum, "; ".join(rowsum)))
    irreducible = _irreducible(a)
    checks.append(
        CheckResult(
            "irreducible",
            irreducible,
            "" if irreducible else "exchange graph is not strongly connected",
        )
    )
    if problems:
        detail = "not evaluated: structural checks failed"
        checks.append(CheckResult("volume_recovery", False, detail))
        checks.append(CheckResult("weighted_symmetry", False, detail))
        return ValidationReport(tuple(checks))
    try:
        v = _bfs_volumes(a)
        checks.append(CheckResult("volume_recovery", True))
    except (InconsistentSymmetryError, DisconnectedGraphError) as exc:
        checks.append(CheckResult("volume_recovery", False, str(exc)))
        checks.append(CheckResult("weighted_symmetry", False, "no volumes available"))
        return ValidationReport(tuple(checks))
    va = v[:, None] * a
    dev = linalg.max_abs(va - va.T)
    ok = dev <= SYMMETRY_TOL * max(1.0, linalg.max_abs(va))
    checks.append(
        CheckResult(
            "weighted_symmetry", ok,
            "" if ok else f"V A deviates from symmetry by {dev:.3e}",
        )
    )
    return ValidationReport(tuple(checks))


def extract_physical_parameters(dec: VMDecomposition) -> NetworkSpec:
    """Read volumes and exchange rates back out of a (V, M) decomposition.

    Entries of ``M`` below ``EDGE_TOL`` (relative to the largest) are
    treated as structural zeros.  The returned spec is in normalized units
    (V1 = 1, flow = 1) and round-trips through :func:`build_state_space`.
    """
    m = dec.exchange
    n = dec.n
    tol = EDGE_TOL * linalg.max_abs(m)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            d = -m[i, j]
            if d > tol:
                edges.append((i + 1, j + 1, float(d)))
    return NetworkSpec(
        volumes=tuple(float(v) for v in dec.volumes),
        edges=tuple(edges),
        flow=float(dec.volumes[0]),
    )


_SPEC_KEYS = {"volumes", "flow", "edges"}
_EDGE_KEYS = {"i", "j", "d"}


def parse_network_spec(data) -> NetworkSpec:
    """Parse the strict JSON object form of a network description.

    Expected shape: ``{"volumes": [..], "flow": Q, "edges":
    [{"i": int, "j": int, "d": rate}, ..]}`` with 1-based indices and the
    mobile zone at index 1.  Unknown keys are rejected.
    """
    if not isinstance(data, dict):
        raise SpecFormatError("network description must be a JSON object")
    unknown = set(data) - _SPEC_KEYS
    if unknown:
        raise SpecFormatError(f"unknown keys in network description: {sorted(unknown)}")
    if "volumes" not in data:
        raise SpecFormatError("missing required key 'volumes'")
    volumes = data["volumes"]
    if not isinstance(volumes, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in volumes
    ):
        raise SpecFormatError("'volumes' must be a list of numbers")
    flow = data.get("flow", 1.0)
    if not isinstance(flow, (int, float)) or isinstance(flow, bool):
        raise SpecFormatError("'flow' must be a number")
    edges = []
    for entry in data.get("edges", []):
        if not isinstance(entry, dict) or set(entry) != _EDGE_KEYS:
            raise SpecFormatError("each edge must be an object with keys i, j, d")
        i, j, d = entry["i"], entry["j"], entry["d"]
        if not isinstance(i, int) or not isinstance(j, int) or isinstance(d, bool) \
                or not isinstance(d, (int, float)):
            raise SpecFormatError("edge indices must be integers and d a number")
        edges.append((i, j, float(d)))
    return NetworkSpec(volumes=tuple(volumes), edges=tuple(edges), flow=float(flow))


def load_network_spec(path) -> NetworkSpec:
    """Load a network description from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecFormatError(f"invalid JSON in {path}: {exc}") from exc
    return parse_network_spec(data)
