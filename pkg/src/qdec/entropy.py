"""Entropic quantities in bits: von Neumann, sandwiched Renyi (fixed and
optimized conditioning), min/max entropies via the dominating-trace SDP and
purification duality, smoothed variants with one-sided certificates, and
coherent information.

Certification conventions: optimized Renyi entropies and smoothed
min-entropies return certified *lower* bounds (the achiever state is the
certificate); smoothed max-entropies return certified *upper* bounds.
Every downstream bound in this package consumes the safe direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qcore, sdp
from .qcore import MultiState, PureState, partial_trace, permute_systems, purify

NEG_INF_SENTINEL = -1.0e6
_LOG2 = np.log(2.0)


def negative_part(x: float) -> float:
    """(x)_- = min{0, x}."""
    return min(0.0, float(x))


@dataclass(frozen=True)
class EntropyValue:
    kind: str
    value_bits: float
    alpha: float | None = None
    a_labels: tuple[str, ...] = ()
    b_labels: tuple[str, ...] = ()
    sigma_desc: str = ""
    certified: str = "exact"  # exact | lower-bound | upper-bound
    achiever: object = None
    minus_infinity: bool = False
    epsilon: float | None = None

    def __float__(self):
        return self.value_bits


def _reduce(state, a_labels, b_labels):
    """Reduce to A (+) B and return (matrix with A legs first, dA, dB)."""
    a_labels, b_labels = tuple(a_labels), tuple(b_labels)
    rho = state.density() if isinstance(state, PureState) else state
    keep = a_labels + b_labels
    reduced = partial_trace(rho, keep)
    ordered = permute_systems(reduced, keep)
    da = int(np.prod([ordered.layout.dim(l) for l in a_labels])) if a_labels else 1
    db = int(np.prod([ordered.layout.dim(l) for l in b_labels])) if b_labels else 1
    return ordered, da, db


def _eig_entropy_bits(matrix: np.ndarray) -> float:
    w = np.linalg.eigvalsh(matrix)
    w = w[w > 1e-14]
    return float(-np.sum(w * np.log(w)) / _LOG2)


def von_neumann(state, labels) -> EntropyValue:
    """S(rho_labels) in bits."""
    reduced, _, _ = _reduce(state, tuple(labels), ())
    return EntropyValue("vonNeumann", _eig_entropy_bits(reduced.matrix),
                        a_labels=tuple(labels))


def cond_von_neumann(state, a_labels, b_labels) -> EntropyValue:
    """S(A|B) = S(AB) - S(B)."""
    a_labels, b_labels = tuple(a_labels), tuple(b_labels)
    s_ab = von_neumann(state, a_labels + b_labels).value_bits
    s_b = von_neumann(state, b_labels).value_bits if b_labels else 0.0
    return EntropyValue("vonNeumann", s_ab - s_b, a_labels=a_labels, b_labels=b_labels)


def coherent_information(state, a_labels, b_labels) -> EntropyValue:
    """I(A>B) = -S(A|B)."""
    s = cond_von_neumann(state, a_labels, b_labels)
    return EntropyValue("coherentInfo", -s.value_bits,
                        a_labels=tuple(a_labels), b_labels=tuple(b_labels))


def _power_on_support(matrix: np.ndarray, p: float, cutoff: float = qcore.SUPPORT_CUTOFF):
    """Matrix power with eigenvalues below cutoff treated as exact zeros.

    Returns (power, support projector)."""
    w, v = np.linalg.eigh(matrix)
    on = w > cutoff
    pw = np.zeros_like(w)
    pw[on] = w[on] ** p
    proj = (v * on.astype(float)) @ v.conj().T
    return (v * pw) @ v.conj().T, proj


def renyi_sandwiched_fixed(state, a_labels, b_labels, alpha: float, sigma_b) -> EntropyValue:
    """H_alpha(A|B)_{rho|sigma} for alpha in [1/2, 1) u (1, inf), sigma on B.

    Returns the -inf sentinel when the support condition fails.
    """
    if not (0.5 <= alpha < 1.0 or alpha > 1.0):
        raise ValueError(f"alpha {alpha} outside [1/2,1) u (1,inf)")
    ordered, da, db = _reduce(state, a_labels, b_labels)
    rho = ordered.matrix
    sig = sigma_b.matrix if isinstance(sigma_b, MultiState) else np.asarray(sigma_b, complex)
    if sig.shape != (db, db):
        raise ValueError(f"sigma shape {sig.shape} != ({db},{db})")
    p = (1.0 - alpha) / (2.0 * alpha)
    sig_p, proj = _power_on_support(sig, p)
    desc = f"fixed sigma on {tuple(b_labels)}"
    if alpha > 1.0:
        off = np.eye(db) - proj
        leak = float(np.real(np.trace(rho @ np.kron(np.eye(da), off))))
        if leak > 1e-10:
            return EntropyValue("renyiFixed", NEG_INF_SENTINEL, alpha=alpha,
                                a_labels=tuple(a_labels), b_labels=tuple(b_labels),
                                sigma_desc=desc, minus_infinity=True)
    else:
        overlap = float(np.real(np.trace(rho @ np.kron(np.eye(da), sig))))
        if overlap <= 1e-14:
            return EntropyValue("renyiFixed", NEG_INF_SENTINEL, alpha=alpha,
                                a_labels=tuple(a_labels), b_labels=tuple(b_labels),
                                sigma_desc=desc, minus_infinity=True)
    big = np.kron(np.eye(da), sig_p)
    x = big @ rho @ big
    w = np.clip(np.linalg.eigvalsh(x), 0.0, None)
    total = float(np.sum(w[w > 0] ** alpha))
    if total <= 0:
        return EntropyValue("renyiFixed", NEG_INF_SENTINEL, alpha=alpha,
                            a_labels=tuple(a_labels), b_labels=tuple(b_labels),
                            sigma_desc=desc, minus_infinity=True)
    val = np.log2(total) / (1.0 - alpha)
    return EntropyValue("renyiFixed", float(val), alpha=alpha,
                        a_labels=tuple(a_labels), b_labels=tuple(b_labels),
                        sigma_desc=desc)


def hmin_fixed(state, a_labels, b_labels, sigma_b) -> EntropyValue:
    """H_inf(A|B)_{rho|sigma} = -log2 min{mu : rho <= mu 1 (x) sigma}."""
    ordered, da, db = _reduce(state, a_labels, b_labels)
    rho = ordered.matrix
    sig = sigma_b.matrix if isinstance(sigma_b, MultiState) else np.asarray(sigma_b, complex)
    sig_m, proj = _power_on_support(sig, -0.5)
    off = np.eye(db) - proj
    leak = float(np.real(np.trace(rho @ np.kron(np.eye(da), off))))
    if leak > 1e-10:
        return EntropyValue("hmin", NEG_INF_SENTINEL, alpha=np.inf,
                            a_labels=tuple(a_labels), b_labels=tuple(b_labels),
                            sigma_desc="fixed sigma", minus_infinity=True)
    big = np.kron(np.eye(da), sig_m)
    mu = float(np.max(np.linalg.eigvalsh(big @ rho @ big)))
    return EntropyValue("hmin", -np.log2(mu), alpha=np.inf,
                        a_labels=tuple(a_labels), b_labels=tuple(b_labels),
                        sigma_desc="fixed sigma")


# ---------------------------------------------------------------------------
# optimized conditioning


def _expm_hermitian(h: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    w = w - np.max(w)
    e = (v * np.exp(w)) @ v.conj().T
    return e / np.real(np.trace(e))


_RESTART_SEED = 0x5EED_0F_2DE5  # fixed so restarts are deterministic


def renyi_optimized(state, a_labels, b_labels, alpha: float, restarts: int = 5,
                    max_iter: int = 300, grad_tol: float = 1e-12) -> EntropyValue:
    """max_sigma H_alpha(A|B)_{rho|sigma} by exponential-coordinate ascent.

    Certified lower bound for the maximization; the achiever sigma* is
    returned.  Starts: sigma = rho_B plus seeded random restarts.
    """
    ordered, da, db = _reduce(state, a_labels, b_labels)
    rho_b = partial_trace(ordered, tuple(b_labels)).matrix if b_labels else np.ones((1, 1))

    basis = sdp._herm_basis(db)

    def objective(h):
        ev = renyi_sandwiched_fixed(ordered, a_labels, b_labels, alpha, _expm_hermitian(h))
        return NEG_INF_SENTINEL if ev.minus_infinity else ev.value_bits

    w, v = np.linalg.eigh(rho_b + 1e-9 * np.eye(db))
    starts = [(v * np.log(np.clip(w, 1e-12, None))) @ v.conj().T]
    for r in range(restarts):
        rng = np.random.Generator(np.random.Philox(key=np.array(
            [_RESTART_SEED, r], dtype=np.uint64)))
        g = rng.standard_normal((db, db)) + 1j * rng.standard_normal((db, db))
        starts.append(0.5 * (g + g.conj().T))

    best_val, best_h = -np.inf, None
    for h0 in starts:
        h = h0.copy()
        f = objective(h)
        step = 0.5
        for _ in range(max_iter):
            grad = np.zeros(len(basis))
            eps = 1e-6
            for j, e in enumerate(basis):
                grad[j] = (objective(h + eps * e) - objective(h - eps * e)) / (2 * eps)
            gnorm = float(np.linalg.norm(grad))
            if gnorm < grad_tol:
                break
            direction = sum(g * e for g, e in zip(grad, basis))
            improved = False
            while step > 1e-12:
                cand = h + step * direction
                fc = objective(cand)
                if fc > f + 1e-15:
                    h, f = cand, fc
                    step = min(step * 2.0, 64.0)
                    improved = True
                    break
                step *= 0.5
            if not improved:
                break
        if f > best_val:
            best_val, best_h = f, h
    sig = _expm_hermitian(best_h)
    return EntropyValue("renyiOpt", float(best_val), alpha=alpha,
                        a_labels=tuple(a_labels), b_labels=tuple(b_labels),
                        sigma_desc="optimized", certified="lower-bound",
                        achiever=sig)


# ---------------------------------------------------------------------------
# min/max entropies


def hmin(state, a_labels, b_labels, tol: float = 1e-8) -> EntropyValue:
    """H_min(A|B) via the dominating-trace SDP (-log2 of the optimal trace)."""
    a_labels, b_labels = tuple(a_labels), tuple(b_labels)
    if not b_labels:
        ordered, _, _ = _reduce(state, a_labels, ())
        lmax = float(np.max(np.linalg.eigvalsh(ordered.matrix)))
        return EntropyValue("hmin", -np.log2(lmax), alpha=np.inf, a_labels=a_labels)
    rho = state.density() if isinstance(state, PureState) else state
    sol = sdp.solve_dominating_trace_min(rho, a_labels, b_labels, tol=tol)
    cert = "exact" if sol.converged else "lower-bound"
    return EntropyValue("hmin", -np.log2(sol.primal_value), alpha=np.inf,
                        a_labels=a_labels, b_labels=b_labels,
                        sigma_desc="optimized (SDP)", certified=cert,
                        achiever=sol)


def hmax(state, a_labels, b_labels, tol: float = 1e-8) -> EntropyValue:
    """H_max(A|B) = -H_min(A|C) on a purification, by the duality relation."""
    a_labels, b_labels = tuple(a_labels), tuple(b_labels)
    ordered, _, _ = _reduce(state, a_labels, b_labels)
    psi = purify(ordered, aux_label="_C")
    aux = psi.layout.labels[-1]
    inner = hmin(psi.density(), a_labels, (aux,), tol=tol)
    cert = "exact" if inner.certified == "exact" else "upper-bound"
    return EntropyValue("hmax", -inner.value_bits, alpha=0.5,
                        a_labels=a_labels, b_labels=b_labels,
                        sigma_desc="duality via purification", certified=cert)


# ---------------------------------------------------------------------------
# smoothing


_SMOOTH_MIX_GRID = (0.02, 0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0)
_SMOOTH_ROT_GRID = (0.05, 0.1, 0.2, 0.4, 0.8)
_SMOOTH_SEED = 0x5A007  # fixed rotation-direction seed


def _smooth_candidates(rho: MultiState, a_labels, b_labels, eps: float, budget: int):
    """Deterministic candidate states inside the purified-distance eps-ball.

    Fixed parameter grids (filtered by the exact ball test) keep the returned
    optimum monotone nondecreasing in eps.
    """
    yield rho
    if eps <= 0:
        return
    da_sys = rho.layout.subset(a_labels)
    mixed_a = qcore.maximally_mixed(da_sys)
    rho_rest = partial_trace(rho, rho.layout.complement(a_labels)) \
        if set(a_labels) != set(rho.layout.labels) else None
    targets = [qcore.maximally_mixed(rho.layout)]
    if rho_rest is not None:
        prod = qcore.tensor(mixed_a, rho_rest)
        targets.append(permute_systems(prod, rho.layout.labels))
    for tgt in targets:
        for t in _SMOOTH_MIX_GRID:
            cand = MultiState(rho.layout, (1 - t) * rho.matrix + t * tgt.matrix)
            if qcore.purified_distance(rho, cand) <= eps + 1e-12:
                yield cand
    # purification rotations: e^{-itG} on the purified space, traced back
    psi = purify(rho, aux_label="_S")
    aux = psi.layout.labels[-1]
    n = psi.layout.total_dim
    ndir = 2 + max(0, budget)
    for r in range(ndir):
        rng = np.random.Generator(np.random.Philox(key=np.array(
            [_SMOOTH_SEED, r], dtype=np.uint64)))
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        g = 0.5 * (g + g.conj().T)
        g = g / np.linalg.norm(g)
        w, v = np.linalg.eigh(g)
        for t in _SMOOTH_ROT_GRID:
            u = (v * np.exp(-1j * t * w * n)) @ v.conj().T
            vec = u @ psi.vector
            rot = PureState(psi.layout, vec / np.linalg.norm(vec))
            cand = partial_trace(rot, rho.layout.labels)
            if qcore.purified_distance(rho, cand) <= eps + 1e-12:
                yield cand


def hmin_smooth(state, a_labels, b_labels, eps: float, budget: int = 2,
                tol: float = 1e-8) -> EntropyValue:
    """Certified lower bound on H_min^eps(A|B): the best H_min over explicit
    candidate states verified to lie in the purified-distance eps-ball.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps {eps} outside [0,1)")
    a_labels, b_labels = tuple(a_labels), tuple(b_labels)
    ordered, _, _ = _reduce(state, a_labels, b_labels)
    best = None
    best_state = None
    for cand in _smooth_candidates(ordered, a_labels, b_labels, eps, budget):
        ev = hmin(cand, a_labels, b_labels, tol=tol)
        if best is None or ev.value_bits > best.value_bits:
            best, best_state = ev, cand
    return EntropyValue("hminSmooth", best.value_bits, alpha=np.inf,
                        a_labels=a_labels, b_labels=b_labels,
                        sigma_desc="optimized (SDP)", certified="lower-bound",
                        achiever=best_state, epsilon=eps)


def hmax_smooth(state, a_labels, b_labels, eps: float, budget: int = 2,
                tol: float = 1e-8) -> EntropyValue:
    """Certified upper bound on H_max^eps(A|B) = -H_min^eps(A|C) by duality
    on a purification; the negated lower-bound certificate flips direction.
    """
    a_labels, b_labels = tuple(a_labels), tuple(b_labels)
    ordered, _, _ = _reduce(state, a_labels, b_labels)
    psi = purify(ordered, aux_label="_C")
    aux = psi.layout.labels[-1]
    inner = hmin_smooth(psi.density(), a_labels, (aux,), eps, budget=budget, tol=tol)
    return EntropyValue("hmaxSmooth", -inner.value_bits, alpha=0.5,
                        a_labels=a_labels, b_labels=b_labels,
                        sigma_desc="duality via purification",
                        certified="upper-bound", achiever=inner.achiever,
                        epsilon=eps)
