"""Random and exact unitary ensembles: Haar samples via Ginibre + QR, the
24-element single-qubit Clifford group as an exact 2-design, per-party
product sampling with counter-derived streams, and 2-design verification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import SystemLayout, swap_operator

_MASK64 = (1 << 64) - 1


def stream(seed: int, lane: int = 0, index: int = 0) -> np.random.Generator:
    """Counter-based generator for (seed, lane, index).

    Streams are independent by construction (Philox key/counter derivation),
    so sampling order and worker count never affect the draws.
    """
    key = np.array([seed & _MASK64, lane & _MASK64], dtype=np.uint64)
    counter = np.array([index & _MASK64, 0, 0, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from a complex Ginibre matrix and QR with the
    R-diagonal phases normalized to positive real.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True)
class UnitaryEnsemble:
    """A distribution over unitaries: Haar, the 1-qubit Cliffords, or an
    explicit list (uniform over members)."""

    kind: str  # haar | clifford1q | explicit-list
    dim: int
    members: tuple[np.ndarray, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("haar", "clifford1q", "explicit-list"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.members is not None:
            ms = tuple(np.asarray(m, dtype=np.complex128) for m in self.members)
            if not ms:
                raise ValueError("explicit ensemble must be nonempty")
            for m in ms:
                if m.shape != (self.dim, self.dim):
                    raise ValueError("member shape mismatch")
                if np.max(np.abs(m.conj().T @ m - np.eye(self.dim))) > 1e-12:
                    raise ValueError("member is not unitary at 1e-12")
            object.__setattr__(self, "members", ms)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "haar":
            return haar_unitary(self.dim, rng)
        return self.members[int(rng.integers(len(self.members)))]


# exact entry values occurring in the canonicalized 1-qubit Cliffords
_CLIFFORD_VALUES = (0.0, 0.5, 1.0 / np.sqrt(2.0), 1.0)


def _snap(z: complex) -> complex:
    re = min(_CLIFFORD_VALUES, key=lambda c: abs(abs(z.real) - c))
    im = min(_CLIFFORD_VALUES, key=lambda c: abs(abs(z.imag) - c))
    return complex(np.copysign(re, z.real) if re else 0.0,
                   np.copysign(im, z.imag) if im else 0.0)


def _canonical(u: np.ndarray) -> np.ndarray:
    flat = u.reshape(-1)
    k = int(np.flatnonzero(np.abs(flat) > 0.3)[0])
    u = u * (np.abs(flat[k]) / flat[k])
    return np.array([[_snap(complex(x)) for x in row] for row in u])


def clifford_group_1q() -> UnitaryEnsemble:
    """The 24 single-qubit Cliffords modulo global phase, with exact entries
    over {0, +-1, +-i, (+-1 +- i)/2, +-1/sqrt(2), ...}; an exact 2-design.
    """
    h = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
    s = np.array([[1, 0], [0, 1j]], dtype=np.complex128)
    seen = {}
    frontier = [_canonical(np.eye(2, dtype=np.complex128))]
    while frontier:
        nxt = []
        for u in frontier:
            key = tuple(np.round(u.reshape(-1), 9).tolist())
            if key in seen:
                continue
            seen[key] = u
            for g in (h, s):
                nxt.append(_canonical(g @ u))
        frontier = nxt
    members = tuple(seen.values())
    if len(members) != 24:
        raise RuntimeError(f"Clifford closure produced {len(members)} != 24 elements")
    return UnitaryEnsemble("clifford1q", 2, members)


def local_unitary_sample(layout: SystemLayout, parties, design: str,
                         seed: int, index: int = 0) -> dict[str, np.ndarray]:
    """One independent draw per party, from per-(party, index) streams."""
    if design not in ("haar", "clifford"):
        raise ValueError(f"unknown design {design!r}")
    cliff = clifford_group_1q() if design == "clifford" else None
    out = {}
    for lane, label in enumerate(parties):
        d = layout.dim(label)
        rng = stream(seed, lane, index)
        if design == "clifford":
            if d != 2:
                raise ValueError(f"clifford design needs qubit parties, {label!r} has dim {d}")
            out[label] = cliff.members[int(rng.integers(24))]
        else:
            out[label] = haar_unitary(d, rng)
    return out


def _second_moment_map(ensemble: UnitaryEnsemble, samples: int = 0, seed: int = 0) -> np.ndarray:
    """E[ (U (x) U) (x) conj(U (x) U) ] as a d^4 x d^4 matrix acting on vec(M)."""
    d = ensemble.dim
    acc = np.zeros((d**4, d**4), dtype=np.complex128)
    if ensemble.kind == "haar":
        if samples < 1:
            raise ValueError("haar ensemble needs samples >= 1")
        for i in range(samples):
            u2 = np.kron(*(2 * [haar_unitary(d, stream(seed, 0, i))]))
            acc += np.kron(u2, u2.conj())
        return acc / samples
    for u in ensemble.members:
        u2 = np.kron(u, u)
        acc += np.kron(u2, u2.conj())
    return acc / len(ensemble.members)


def _haar_prediction_map(d: int) -> np.ndarray:
    """Same map built from the exact Haar second moment: for each basis M,
    E[U (x) U M (U (x) U)^dag] = alpha 1 + beta F with Tr M = alpha d^2 + beta d
    and Tr M F = alpha d + beta d^2.
    """
    f = swap_operator(d)
    eye = np.eye(d * d)
    sys = np.array([[d * d, d], [d, d * d]], dtype=float)
    cols = np.zeros((d**4, d**4), dtype=np.complex128)
    for j in range(d**4):
        m = np.zeros((d * d, d * d), dtype=np.complex128)
        m.reshape(-1)[j] = 1.0
        rhs = np.array([np.trace(m), np.trace(m @ f)])
        alpha, beta = np.linalg.solve(sys, rhs)
        cols[:, j] = (alpha * eye + beta * f).reshape(-1)
    return cols


def verify_2design(ensemble: UnitaryEnsemble, tol: float,
                   samples: int = 10000, seed: int = 0) -> dict:
    """Compare the ensemble's second-moment map against the Haar prediction
    over a full operator basis; returns max deviation and a pass flag.
    """
    got = _second_moment_map(ensemble, samples=samples, seed=seed)
    want = _haar_prediction_map(ensemble.dim)
    dev = float(np.max(np.abs(got - want)))
    return {
        "kind": ensemble.kind,
        "dim": ensemble.dim,
        "max_deviation": dev,
        "tol": float(tol),
        "passed": dev <= tol,
        "samples": samples if ensemble.kind == "haar" else len(ensemble.members),
    }
