"""Dense complex-matrix foundation: labeled multipartite states, channels,
tensor algebra, metrics, and the canonical constructions the rest of the
package builds on.

Subsystems are always identified by label, never by index.  All values are
immutable after construction; every operation is a pure function.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

HERM_TOL = 1e-10
PSD_FLOOR = -1e-10
TRACE_TOL = 1e-10
PURE_TOL = 1e-12
SUPPORT_CUTOFF = 1e-12


class LayoutError(ValueError):
    """Bad subsystem labels or dimensions."""


class StateError(ValueError):
    """An operator violates a state invariant; the message carries residuals."""


def dim_cap() -> int:
    """Total-dimension cap for dense storage (QDEC_DIM_CAP overrides)."""
    return int(os.environ.get("QDEC_DIM_CAP", "256"))


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SystemLayout:
    """Ordered list of (label, dim) subsystems."""

    systems: tuple[tuple[str, int], ...]

    def __post_init__(self):
        systems = tuple((str(l), int(d)) for l, d in self.systems)
        object.__setattr__(self, "systems", systems)
        labels = [l for l, _ in systems]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate labels in layout: {labels}")
        if any(d < 1 for _, d in systems):
            raise LayoutError(f"dims must be >= 1: {systems}")
        if self.total_dim > dim_cap():
            raise LayoutError(
                f"total dimension {self.total_dim} exceeds cap {dim_cap()}"
            )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(l for l, _ in self.systems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.systems)

    @property
    def total_dim(self) -> int:
        n = 1
        for _, d in self.systems:
            n *= d
        return n

    def dim(self, label: str) -> int:
        for l, d in self.systems:
            if l == label:
                return d
        raise LayoutError(f"unknown label {label!r} (have {self.labels})")

    def position(self, label: str) -> int:
        for i, (l, _) in enumerate(self.systems):
            if l == label:
                return i
        raise LayoutError(f"unknown label {label!r} (have {self.labels})")

    def require(self, labels) -> None:
        for l in labels:
            self.dim(l)

    def subset(self, labels) -> "SystemLayout":
        """Sub-layout of the given labels, kept in this layout's order."""
        want = set(labels)
        self.require(labels)
        return SystemLayout(tuple(s for s in self.systems if s[0] in want))

    def complement(self, labels) -> tuple[str, ...]:
        want = set(labels)
        self.require(labels)
        return tuple(l for l in self.labels if l not in want)

    def concat(self, other: "SystemLayout") -> "SystemLayout":
        return SystemLayout(self.systems + other.systems)


def layout(*systems: tuple[str, int]) -> SystemLayout:
    return SystemLayout(tuple(systems))


@dataclass(frozen=True)
class HermitianOp:
    """Hermitian operator on a labeled layout; not necessarily PSD or unit trace."""

    layout: SystemLayout
    matrix: np.ndarray

    def __post_init__(self):
        m = _freeze(self.matrix)
        n = self.layout.total_dim
        if m.shape != (n, n):
            raise StateError(f"matrix shape {m.shape} != layout dim {n}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERM_TOL:
            raise StateError(f"not Hermitian: residual {herm:.3e} > {HERM_TOL}")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class MultiState:
    """Density operator on a labeled multipartite layout.

    Subnormalized operators (0 < trace <= 1) carry ``subnormalized=True``.
    """

    layout: SystemLayout
    matrix: np.ndarray
    subnormalized: bool = False

    def __post_init__(self):
        m = _freeze(self.matrix)
        n = self.layout.total_dim
        if m.shape != (n, n):
            raise StateError(f"matrix shape {m.shape} != layout dim {n}")
        herm = np.max(np.abs(m - m.conj().T))
        if herm > HERM_TOL:
            raise StateError(f"not Hermitian: residual {herm:.3e} > {HERM_TOL}")
        lo = float(np.min(np.linalg.eigvalsh(m)))
        if lo < PSD_FLOOR:
            raise StateError(f"not PSD: min eigenvalue {lo:.3e} < {PSD_FLOOR}")
        tr = float(np.real(np.trace(m)))
        if self.subnormalized:
            if not (0.0 < tr <= 1.0 + TRACE_TOL):
                raise StateError(f"subnormalized trace {tr:.6e} not in (0, 1]")
        elif abs(tr - 1.0) > TRACE_TOL:
            raise StateError(f"trace {tr!r} differs from 1 by {abs(tr-1):.3e}")
        object.__setattr__(self, "matrix", m)

    def marginal(self, labels) -> "MultiState":
        return partial_trace(self, labels)


@dataclass(frozen=True)
class PureState:
    """Unit vector on a labeled layout."""

    layout: SystemLayout
    vector: np.ndarray

    def __post_init__(self):
        v = _freeze(self.vector).reshape(-1)
        n = self.layout.total_dim
        if v.shape != (n,):
            raise StateError(f"vector length {v.shape} != layout dim {n}")
        nrm = float(np.linalg.norm(v))
        if abs(nrm - 1.0) > PURE_TOL:
            raise StateError(f"norm {nrm!r} differs from 1 by {abs(nrm-1):.3e}")
        object.__setattr__(self, "vector", v)

    def density(self) -> MultiState:
        return MultiState(self.layout, np.outer(self.vector, self.vector.conj()))


@dataclass(frozen=True)
class QChannel:
    """Completely positive map given by Kraus operators (out-dim x in-dim).

    ``factors`` declares a tensor-product structure T = T_1 (x) ... (x) T_k
    (one factor per input subsystem, in layout order); it is used by the
    tensorized contraction-coefficient formulas.
    """

    in_layout: SystemLayout
    out_layout: SystemLayout
    kraus: tuple[np.ndarray, ...]
    factors: tuple["QChannel", ...] | None = None
    name: str = ""

    def __post_init__(self):
        if not self.kraus:
            raise StateError("channel needs at least one Kraus operator")
        din, dout = self.in_layout.total_dim, self.out_layout.total_dim
        ks = tuple(_freeze(k) for k in self.kraus)
        for k in ks:
            if k.shape != (dout, din):
                raise StateError(f"Kraus shape {k.shape} != ({dout},{din})")
        object.__setattr__(self, "kraus", ks)
        if self.factors is not None:
            object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def trace_preserving(self) -> bool:
        return self.tp_residual() <= 1e-10

    def tp_residual(self) -> float:
        din = self.in_layout.total_dim
        acc = np.zeros((din, din), dtype=np.complex128)
        for k in self.kraus:
            acc += k.conj().T @ k
        return float(np.max(np.abs(acc - np.eye(din))))

    def unital_normalized_residual(self) -> float:
        """|T(1/|A|) - 1/|B||_max, the hypothesis of the Renyi-bound theorem."""
        din, dout = self.in_layout.total_dim, self.out_layout.total_dim
        out = apply_channel_matrix(self, np.eye(din) / din)
        return float(np.max(np.abs(out - np.eye(dout) / dout)))


# ---------------------------------------------------------------------------
# tensor-leg bookkeeping


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, PureState):
        return np.outer(x.vector, x.vector.conj())
    if isinstance(x, (MultiState, HermitianOp)):
        return x.matrix
    return np.asarray(x, dtype=np.complex128)


def _like(x, layout_: SystemLayout, matrix: np.ndarray):
    """Rewrap a matrix with the same kind as x (states may be subnormalized)."""
    if isinstance(x, MultiState):
        return MultiState(layout_, matrix, subnormalized=x.subnormalized)
    if isinstance(x, PureState):
        return MultiState(layout_, matrix)
    return HermitianOp(layout_, matrix)


def permute_systems(x, new_order):
    """Reorder subsystems to the given label order."""
    lay = x.layout
    new_order = tuple(new_order)
    if set(new_order) != set(lay.labels) or len(new_order) != len(lay.labels):
        raise LayoutError(f"new order {new_order} must permute {lay.labels}")
    k = len(lay.labels)
    perm = [lay.position(l) for l in new_order]
    dims = lay.dims
    new_layout = SystemLayout(tuple(lay.systems[p] for p in perm))
    if isinstance(x, PureState):
        v = x.vector.reshape(dims).transpose(perm).reshape(-1)
        return PureState(new_layout, v)
    m = _as_matrix(x).reshape(dims + dims)
    m = m.transpose(perm + [k + p for p in perm])
    n = lay.total_dim
    return _like(x, new_layout, m.reshape(n, n))


def tensor(a, b):
    """Tensor product on the concatenated layout (labels must stay unique)."""
    la, lb = a.layout, b.layout
    clash = set(la.labels) & set(lb.labels)
    if clash:
        raise LayoutError(f"duplicate labels in tensor product: {sorted(clash)}")
    new_layout = la.concat(lb)
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(new_layout, np.kron(a.vector, b.vector))
    ma, mb = _as_matrix(a), _as_matrix(b)
    m = np.kron(ma, mb)
    if isinstance(a, HermitianOp) or isinstance(b, HermitianOp):
        return HermitianOp(new_layout, m)
    sub = getattr(a, "subnormalized", False) or getattr(b, "subnormalized", False)
    return MultiState(new_layout, m, subnormalized=sub)


def partial_trace(x, keep):
    """Trace out every subsystem not in ``keep``; layout order is preserved."""
    lay = x.layout
    lay.require(keep)
    keep = set(keep)
    if keep == set(lay.labels):
        return _like(x, lay, _as_matrix(x))
    dims = lay.dims
    k = len(dims)
    m = _as_matrix(x).reshape(dims + dims)
    row = list(range(k))
    col = [i if lay.labels[i] not in keep else k + i for i in range(k)]
    out = [i for i in range(k) if lay.labels[i] in keep]
    out += [k + i for i in range(k) if lay.labels[i] in keep]
    m = np.einsum(m, row + col, out)
    new_layout = lay.subset(keep)
    n = new_layout.total_dim
    return _like(x, new_layout, m.reshape(n, n))


def depolarize_systems(x, labels):
    """Replace each listed subsystem by its maximally mixed state in place."""
    lay = x.layout
    lay.require(labels)
    out = x
    for label in labels:
        cur = out.layout
        rest = [l for l in cur.labels if l != label]
        reduced = partial_trace(out, rest)
        d = cur.dim(label)
        eye = MultiState(SystemLayout(((label, d),)), np.eye(d) / d)
        prod = tensor(eye, reduced)
        out = permute_systems(prod, cur.labels)
    return out


def apply_unitaries(x, unitaries: dict):
    """Apply local unitaries keyed by label."""
    lay = x.layout
    ops = []
    for l, d in lay.systems:
        if l in unitaries:
            u = np.asarray(unitaries[l], dtype=np.complex128)
            if u.shape != (d, d):
                raise LayoutError(f"unitary for {l!r} has shape {u.shape}, need ({d},{d})")
            ops.append(u)
        else:
            ops.append(np.eye(d))
    big = ops[0]
    for u in ops[1:]:
        big = np.kron(big, u)
    if isinstance(x, PureState):
        return PureState(lay, big @ x.vector)
    return _like(x, lay, big @ _as_matrix(x) @ big.conj().T)


def apply_channel_matrix(ch: QChannel, m: np.ndarray) -> np.ndarray:
    return sum(k @ m @ k.conj().T for k in ch.kraus)


def apply_channel(ch: QChannel, x, on=None):
    """Apply ``ch`` to the subsystems ``on`` (default: the channel's input
    labels); untouched subsystems ride along.  The result layout is the
    channel's output labels followed by the untouched labels in their
    original order.
    """
    lay = x.layout
    on = tuple(on) if on is not None else ch.in_layout.labels
    lay.require(on)
    dims_on = tuple(lay.dim(l) for l in on)
    if dims_on != ch.in_layout.dims:
        raise LayoutError(
            f"channel input dims {ch.in_layout.dims} do not match {on} dims {dims_on}"
        )
    rest = [l for l in lay.labels if l not in set(on)]
    clash = set(ch.out_layout.labels) & set(rest)
    if clash:
        raise LayoutError(f"channel output labels collide with bystanders: {sorted(clash)}")
    xp = permute_systems(x, tuple(on) + tuple(rest))
    m = _as_matrix(xp)
    d_rest = 1
    for l in rest:
        d_rest *= lay.dim(l)
    eye = np.eye(d_rest)
    out = sum(np.kron(k, eye) @ m @ np.kron(k, eye).conj().T for k in ch.kraus)
    new_layout = ch.out_layout.concat(lay.subset(rest))
    if isinstance(x, HermitianOp):
        return HermitianOp(new_layout, out)
    tr = float(np.real(np.trace(out)))
    if 0.0 < tr <= 1.0 + TRACE_TOL:
        try:
            return MultiState(new_layout, out, subnormalized=abs(tr - 1.0) > TRACE_TOL)
        except StateError:
            pass
    return HermitianOp(new_layout, out)


def swap_operator(d: int) -> np.ndarray:
    """F on two d-dimensional copies: F|i,j> = |j,i>."""
    if d < 1:
        raise LayoutError("swap needs d >= 1")
    f = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            f[j * d + i, i * d + j] = 1.0
    return f


def _primed(label: str, taken) -> str:
    cand = label + "'"
    while cand in taken:
        cand += "'"
    return cand


def choi(ch: QChannel) -> MultiState:
    """Choi state (id (x) T)(Phi) on in-labels (+) out-labels.

    Output labels clashing with input labels are primed.  Normalized
    convention: trace 1 for trace-preserving channels.
    """
    din = ch.in_layout.total_dim
    phi = np.zeros((din * din,), dtype=np.complex128)
    for i in range(din):
        phi[i * din + i] = 1.0 / np.sqrt(din)
    rho = np.outer(phi, phi.conj())
    dout = ch.out_layout.total_dim
    eye = np.eye(din)
    out = sum(np.kron(eye, k) @ rho @ np.kron(eye, k).conj().T for k in ch.kraus)
    taken = set(ch.in_layout.labels)
    out_sys = []
    for l, d in ch.out_layout.systems:
        nl = l if l not in taken else _primed(l, taken)
        taken.add(nl)
        out_sys.append((nl, d))
    lay = ch.in_layout.concat(SystemLayout(tuple(out_sys)))
    tr = float(np.real(np.trace(out)))
    return MultiState(lay, out, subnormalized=abs(tr - 1.0) > TRACE_TOL)


# ---------------------------------------------------------------------------
# metrics


def _check_same_layout(a, b):
    if a.layout.systems != b.layout.systems:
        raise LayoutError(f"layout mismatch: {a.layout.systems} vs {b.layout.systems}")


def trace_distance(rho, sigma) -> float:
    """Normalized trace distance (1/2)||rho - sigma||_1."""
    _check_same_layout(rho, sigma)
    eigs = np.linalg.eigvalsh(_as_matrix(rho) - _as_matrix(sigma))
    return float(0.5 * np.sum(np.abs(eigs)))


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity F = ||sqrt(rho) sqrt(sigma)||_1^2."""
    _check_same_layout(rho, sigma)
    a = _psd_sqrt(_as_matrix(rho))
    b = _psd_sqrt(_as_matrix(sigma))
    sv = np.linalg.svd(a @ b, compute_uv=False)
    return float(min(1.0, np.sum(sv) ** 2))


def purified_distance(rho, sigma) -> float:
    return float(np.sqrt(max(0.0, 1.0 - fidelity(rho, sigma))))


def schatten_norm(m, p) -> float:
    """Schatten p-norm for p >= 1 (or infinity)."""
    mat = _as_matrix(m)
    sv = np.linalg.svd(mat, compute_uv=False)
    if p == np.inf or p == "inf":
        return float(np.max(sv)) if sv.size else 0.0
    p = float(p)
    if p < 1.0:
        raise ValueError(f"Schatten norm needs p >= 1, got {p}")
    return float(np.sum(sv**p) ** (1.0 / p))


def hs_norm(m) -> float:
    mat = _as_matrix(m)
    return float(np.sqrt(np.real(np.sum(mat * mat.conj()))))


# ---------------------------------------------------------------------------
# builders


def maximally_entangled(d: int, labels=("A", "B")) -> PureState:
    la, lb = labels
    v = np.zeros(d * d, dtype=np.complex128)
    for i in range(d):
        v[i * d + i] = 1.0 / np.sqrt(d)
    return PureState(layout((la, d), (lb, d)), v)


def ghz(parties: int, d: int = 2, labels=None) -> PureState:
    if labels is None:
        labels = tuple(f"A{i+1}" for i in range(parties))
    if len(labels) != parties:
        raise LayoutError("need one label per party")
    v = np.zeros(d**parties, dtype=np.complex128)
    for i in range(d):
        idx = sum(i * d**j for j in range(parties))
        v[idx] = 1.0 / np.sqrt(d)
    return PureState(SystemLayout(tuple((l, d) for l in labels)), v)


def w_state(parties: int, labels=None) -> PureState:
    if labels is None:
        labels = tuple(f"A{i+1}" for i in range(parties))
    v = np.zeros(2**parties, dtype=np.complex128)
    for i in range(parties):
        v[1 << (parties - 1 - i)] = 1.0 / np.sqrt(parties)
    return PureState(SystemLayout(tuple((l, 2) for l in labels)), v)


def maximally_mixed(lay: SystemLayout) -> MultiState:
    n = lay.total_dim
    return MultiState(lay, np.eye(n) / n)


def purify(rho: MultiState, aux_label: str = "R") -> PureState:
    """Purification with auxiliary dimension equal to rank(rho)."""
    if aux_label in rho.layout.labels:
        aux_label = _primed(aux_label, set(rho.layout.labels))
    w, v = np.linalg.eigh(rho.matrix)
    keep = w > SUPPORT_CUTOFF
    w, v = w[keep], v[:, keep]
    r = int(w.size)
    vec = np.zeros(rho.layout.total_dim * r, dtype=np.complex128)
    for j in range(r):
        vec += np.sqrt(w[j]) * np.kron(v[:, j], _basis(r, j))
    vec /= np.linalg.norm(vec)
    lay = rho.layout.concat(SystemLayout(((aux_label, r),)))
    return PureState(lay, vec)


def _basis(d: int, i: int) -> np.ndarray:
    e = np.zeros(d, dtype=np.complex128)
    e[i] = 1.0
    return e


def measurement_channel(projectors, in_layout: SystemLayout, out_label: str = "X") -> QChannel:
    """qc-channel alpha -> sum_x |x><x| Tr[P_x alpha] from a projective resolution."""
    projectors = [np.asarray(p, dtype=np.complex128) for p in projectors]
    din = in_layout.total_dim
    acc = sum(projectors)
    if np.max(np.abs(acc - np.eye(din))) > 1e-9:
        raise StateError("projectors do not resolve the identity")
    t = len(projectors)
    kraus = []
    for x, p in enumerate(projectors):
        w, v = np.linalg.eigh(p)
        for j in np.flatnonzero(w > 0.5):
            kraus.append(np.outer(_basis(t, x), v[:, j].conj()))
    return QChannel(in_layout, layout((out_label, t)), tuple(kraus), name="measurement")


def block_dephasing_channel(projectors, lay: SystemLayout, out_labels=None) -> QChannel:
    """alpha -> sum_j P_j alpha P_j (projective instrument without readout)."""
    projectors = [np.asarray(p, dtype=np.complex128) for p in projectors]
    din = lay.total_dim
    if np.max(np.abs(sum(projectors) - np.eye(din))) > 1e-9:
        raise StateError("projectors do not resolve the identity")
    out = lay if out_labels is None else SystemLayout(
        tuple((l, d) for l, (_, d) in zip(out_labels, lay.systems))
    )
    return QChannel(lay, out, tuple(projectors), name="block-dephasing")


def depolarizing_channel(lay: SystemLayout, out_labels=None) -> QChannel:
    d = lay.total_dim
    kraus = tuple(
        np.outer(_basis(d, i), _basis(d, j)) / np.sqrt(d) for i in range(d) for j in range(d)
    )
    out = lay if out_labels is None else SystemLayout(
        tuple((l, dd) for l, (_, dd) in zip(out_labels, lay.systems))
    )
    return QChannel(lay, out, kraus, name="depolarize")


def constant_channel(sigma: MultiState, in_layout: SystemLayout) -> QChannel:
    """State-preparation channel P^sigma: rho -> sigma * Tr(rho)."""
    w, v = np.linalg.eigh(sigma.matrix)
    din = in_layout.total_dim
    kraus = []
    for m in np.flatnonzero(w > SUPPORT_CUTOFF):
        for j in range(din):
            kraus.append(np.sqrt(w[m]) * np.outer(v[:, m], _basis(din, j)))
    return QChannel(in_layout, sigma.layout, tuple(kraus), name="constant")


def identity_channel(lay: SystemLayout, out_labels=None) -> QChannel:
    out = lay if out_labels is None else SystemLayout(
        tuple((l, d) for l, (_, d) in zip(out_labels, lay.systems))
    )
    ch = QChannel(lay, out, (np.eye(lay.total_dim),), name="identity")
    if len(lay.systems) > 1:
        factors = tuple(
            identity_channel(SystemLayout((s,)), out_labels=(o,))
            for s, o in zip(lay.systems, out.labels)
        )
        object.__setattr__(ch, "factors", factors)
    return ch


def partial_trace_channel(in_layout: SystemLayout, keep) -> QChannel:
    """Channel tracing out every input subsystem not in ``keep``."""
    in_layout.require(keep)
    keepset = set(keep)
    out = in_layout.subset(keep)
    drop = [l for l in in_layout.labels if l not in keepset]
    d_drop = 1
    for l in drop:
        d_drop *= in_layout.dim(l)
    order = tuple(out.labels) + tuple(drop)
    # build permutation matrix sending layout order to keep-first order
    perm = _permutation_matrix(in_layout, order)
    kraus = tuple(
        np.kron(np.eye(out.total_dim), _basis(d_drop, j).conj()[None, :]) @ perm
        for j in range(d_drop)
    )
    return QChannel(in_layout, out, kraus, name="partial-trace")


def _permutation_matrix(lay: SystemLayout, new_order) -> np.ndarray:
    """Matrix P with (P v)_neworder = v_layout, i.e. P maps layout-ordered
    vectors to new_order-ordered vectors."""
    dims = lay.dims
    perm = [lay.position(l) for l in new_order]
    n = lay.total_dim
    moved = np.arange(n).reshape(dims).transpose(perm).reshape(-1)
    p = np.zeros((n, n))
    p[np.arange(n), moved] = 1.0
    return p


def restrict_channel(ch: QChannel, keep_inputs) -> QChannel:
    """T_I from T: feed every input subsystem outside ``keep_inputs`` with its
    maximally mixed state, so T_I(rho) = T(rho (x) 1/|A_{I^c}|).
    """
    lay = ch.in_layout
    lay.require(keep_inputs)
    keepset = set(keep_inputs)
    kept = lay.subset(keep_inputs)
    drop = [l for l in lay.labels if l not in keepset]
    if not drop:
        return ch
    d_drop = 1
    for l in drop:
        d_drop *= lay.dim(l)
    order = tuple(kept.labels) + tuple(drop)
    perm = _permutation_matrix(lay, order)
    scale = 1.0 / np.sqrt(d_drop)
    kraus = []
    for k in ch.kraus:
        base = k @ perm.T
        for j in range(d_drop):
            embed = np.kron(np.eye(kept.total_dim), _basis(d_drop, j)[:, None])
            kraus.append(scale * (base @ embed))
    return QChannel(kept, ch.out_layout, tuple(kraus), name=f"{ch.name}|restricted")


def random_density(lay: SystemLayout, rng: np.random.Generator, rank=None) -> MultiState:
    n = lay.total_dim
    r = n if rank is None else int(rank)
    g = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
    m = g @ g.conj().T
    return MultiState(lay, m / np.real(np.trace(m)))


def random_pure(lay: SystemLayout, rng: np.random.Generator) -> PureState:
    n = lay.total_dim
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return PureState(lay, v / np.linalg.norm(v))


def random_channel(in_layout: SystemLayout, out_layout: SystemLayout,
                   rng: np.random.Generator, env_dim=None) -> QChannel:
    """Random cptp map via a Haar isometry into out (x) environment."""
    din, dout = in_layout.total_dim, out_layout.total_dim
    denv = env_dim if env_dim is not None else din
    g = rng.standard_normal((dout * denv, din)) + 1j * rng.standard_normal((dout * denv, din))
    q, r = np.linalg.qr(g)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    kraus = tuple(q.reshape(dout, denv, din)[:, e, :] for e in range(denv))
    return QChannel(in_layout, out_layout, kraus, name="random")
