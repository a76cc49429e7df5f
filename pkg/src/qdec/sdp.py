"""Dense barrier-method solver for the single SDP family the package needs:

    minimize   Tr sigma_B
    subject to 1_A (x) sigma_B  >=  rho_AB,

whose optimal value p* gives the conditional min-entropy -log2(p*).
Logarithmic-barrier Newton iterations on the Hermitian coordinates of
sigma, feasible start sigma_0 = (lmax(rho) + tol) * 1_B, barrier parameter
scaled by 10 per outer step, backtracking line search that never leaves the
strictly feasible cone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qcore import MultiState, permute_systems


@dataclass(frozen=True)
class SdpSolution:
    sigma_star: np.ndarray
    primal_value: float
    dual_certificate: np.ndarray
    gap: float
    iterations: int
    converged: bool
    feasibility_residual: float


class SdpError(RuntimeError):
    pass


def _herm_basis(d: int) -> list[np.ndarray]:
    """Orthonormal (HS) real basis of d x d Hermitian matrices."""
    basis = []
    for i in range(d):
        e = np.zeros((d, d), dtype=np.complex128)
        e[i, i] = 1.0
        basis.append(e)
    s = 1.0 / np.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=np.complex128)
            e[i, j] = s
            e[j, i] = s
            basis.append(e)
            e = np.zeros((d, d), dtype=np.complex128)
            e[i, j] = 1j * s
            e[j, i] = -1j * s
            basis.append(e)
    return basis


def _lift(e: np.ndarray, da: int) -> np.ndarray:
    return np.kron(np.eye(da), e)


def minimize_dominating_trace(rho: np.ndarray, dim_a: int, dim_b: int,
                              tol: float = 1e-8, max_iter: int = 400) -> SdpSolution:
    """Core solve on a raw PSD matrix rho of shape (dim_a*dim_b,)^2."""
    if not 1e-10 <= tol <= 1e-4:
        raise ValueError(f"tol {tol} outside [1e-10, 1e-4]")
    rho = np.asarray(rho, dtype=np.complex128)
    n = dim_a * dim_b
    if rho.shape != (n, n):
        raise ValueError(f"rho shape {rho.shape} != ({n},{n})")
    lmax = float(np.max(np.linalg.eigvalsh(rho)))
    sigma = (lmax + max(tol, 1e-6)) * np.eye(dim_b, dtype=np.complex128)

    basis = _herm_basis(dim_b)
    tr_e = np.array([np.real(np.trace(e)) for e in basis])
    e_flat = np.stack([e.reshape(-1) for e in basis])

    def slack(sig):
        return np.kron(np.eye(dim_a), sig) - rho

    t = max(1.0, n / max(abs(np.real(np.trace(sigma))) * dim_b, 1.0))
    target_gap = max(min(tol, 1e-8), 1e-10)
    iters = 0
    converged = False
    while iters < max_iter:
        # Newton steps for f_t(sigma) = t Tr sigma - logdet(1 (x) sigma - rho)
        for _ in range(60):
            iters += 1
            s = slack(sigma)
            w, v = np.linalg.eigh(s)
            if w[0] <= 0:
                raise SdpError("lost strict feasibility")
            s_inv = (v / w) @ v.conj().T
            y = s_inv.reshape(dim_a, dim_b, dim_a, dim_b)
            ytr = np.einsum("xpxq->pq", y)
            grad = t * tr_e - np.real(e_flat.conj() @ ytr.reshape(-1))
            # H_jk = Tr[S^-1 (1 (x) E_j) S^-1 (1 (x) E_k)] via one B^2 x B^2 kernel
            g2 = np.einsum("xpyq,yrxs->qrsp", y, y, optimize=True)
            g2 = g2.reshape(dim_b * dim_b, dim_b * dim_b)
            hess = np.real(e_flat @ g2 @ e_flat.T)
            try:
                step = np.linalg.solve(hess, -grad)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(hess, -grad, rcond=None)[0]
            decrement = float(-grad @ step)
            delta = sum(c * e for c, e in zip(step, basis))
            # backtracking: stay strictly feasible, then Armijo decrease
            f0 = t * np.real(np.trace(sigma)) - np.sum(np.log(w))
            alpha = 1.0
            while alpha > 1e-14:
                cand = sigma + alpha * delta
                wc = np.linalg.eigvalsh(slack(cand))
                if wc[0] > 0:
                    fc = t * np.real(np.trace(cand)) - np.sum(np.log(wc))
                    if fc <= f0 - 0.25 * alpha * decrement + 1e-14:
                        break
                alpha *= 0.5
            if alpha <= 1e-14:
                break
            sigma = sigma + alpha * delta
            if decrement / 2.0 < 1e-12 * max(1.0, abs(t)):
                break
            if iters >= max_iter:
                break
        gap_bound = n / t
        if gap_bound <= target_gap * max(1.0, abs(np.real(np.trace(sigma)))):
            converged = True
            break
        t *= 10.0

    primal = float(np.real(np.trace(sigma)))
    s = slack(sigma)
    w, v = np.linalg.eigh(s)
    x = (v / w) @ v.conj().T / t
    # project the barrier certificate onto Tr_A X = 1_B, then floor to PSD
    tra = x.reshape(dim_a, dim_b, dim_a, dim_b)
    tra = np.einsum("abad->bd", tra)
    x = x + np.kron(np.eye(dim_a) / dim_a, np.eye(dim_b) - tra)
    wx, vx = np.linalg.eigh(x)
    x = (vx * np.clip(wx, 0.0, None)) @ vx.conj().T
    dual = float(np.real(np.sum(x.conj() * rho)))
    gap = max(primal - dual, 0.0)
    feas = float(max(0.0, -np.min(w)))
    return SdpSolution(
        sigma_star=sigma,
        primal_value=primal,
        dual_certificate=x,
        gap=gap,
        iterations=iters,
        converged=converged,
        feasibility_residual=feas,
    )


def solve_dominating_trace_min(state: MultiState, a_labels, b_labels,
                               tol: float = 1e-8) -> SdpSolution:
    """Solve min Tr sigma_B s.t. 1_A (x) sigma_B >= rho_AB for a labeled state.

    Systems outside A and B are traced out first; H_min(A|B) = -log2(primal).
    """
    a_labels, b_labels = tuple(a_labels), tuple(b_labels)
    from .qcore import partial_trace

    reduced = partial_trace(state, a_labels + b_labels)
    ordered = permute_systems(reduced, a_labels + b_labels)
    da = int(np.prod([ordered.layout.dim(l) for l in a_labels])) if a_labels else 1
    db = int(np.prod([ordered.layout.dim(l) for l in b_labels])) if b_labels else 1
    return minimize_dominating_trace(ordered.matrix, da, db, tol=tol)
