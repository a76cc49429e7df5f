"""Exact second-moment calculus for local 2-designs: the single-system twirl,
the multipartite coefficient system, the exact expected Hilbert-Schmidt norm
of telescoping terms, and expected-contractive coefficients.

The module's defining oracle is exactness: on qubit instances every analytic
moment here equals the corresponding brute-force average over the 24-element
Clifford group to 1e-10.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import entropy, qcore
from .qcore import (
    MultiState,
    QChannel,
    choi,
    hs_norm,
    partial_trace,
    restrict_channel,
    swap_operator,
)


def _subsets(items):
    items = tuple(items)
    for r in range(len(items) + 1):
        yield from combinations(items, r)


def _nonempty_subsets(items):
    for s in _subsets(items):
        if s:
            yield s


@dataclass(frozen=True)
class TwirlMoment:
    """Coefficients c_L of E[U^(x2) M U^(x2)+] = sum_L c_L (F_L (x) 1)."""

    dims: tuple[int, ...]
    coefficients: dict
    condition_number: float

    def reconstruction(self) -> np.ndarray:
        k = len(self.dims)
        out = None
        for subset, c in self.coefficients.items():
            term = _swap_on(set(subset), self.dims)
            out = c * term if out is None else out + c * term
        return out


@dataclass(frozen=True)
class ContractiveCoeff:
    subset: tuple[str, ...]
    lam: float
    d_constant: float
    tensor_product: bool
    choi_hs_norm: float


def _swap_on(indices, dims) -> np.ndarray:
    """F_{A_L} (x) 1 on (x)_i A_i^(x2), party copies adjacent."""
    out = np.array([[1.0 + 0j]])
    for i, d in enumerate(dims):
        f = swap_operator(d) if i in indices else np.eye(d * d)
        out = np.kron(out, f)
    return out


def haar_second_moment(m: np.ndarray, d: int):
    """(alpha, beta, reconstruction) with E[U^(x2) M U^(x2)+] = alpha 1 + beta F."""
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (d * d, d * d):
        raise ValueError(f"M shape {m.shape} != ({d*d},{d*d})")
    if d == 1:
        return float(np.real(m[0, 0])), 0.0, m.copy()
    f = swap_operator(d)
    rhs = np.array([np.trace(m), np.trace(m @ f)])
    sys = np.array([[d * d, d], [d, d * d]], dtype=float)
    alpha, beta = np.linalg.solve(sys, rhs)
    recon = alpha * np.eye(d * d) + beta * f
    return complex(alpha), complex(beta), recon


def local_second_moment(m: np.ndarray, dims) -> TwirlMoment:
    """Coefficient system of the product twirl over independent local 2-designs.

    Solves Tr[M (F_L (x) 1)] = sum_T c_T |A_{T xor L}| |A_{(T xor L)^c}|^2 over
    all subsets L; party copies are adjacent in M's leg ordering.
    """
    dims = tuple(int(d) for d in dims)
    k = len(dims)
    if k > 3:
        raise ValueError("coefficient systems are limited to k <= 3")
    if any(d < 2 for d in dims):
        raise ValueError("dimension-1 parties are rejected by the twirl calculus")
    n = 1
    for d in dims:
        n *= d * d
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (n, n):
        raise ValueError(f"M shape {m.shape} != ({n},{n})")
    subsets = list(_subsets(range(k)))
    nsub = len(subsets)
    gram = np.zeros((nsub, nsub))
    for a, l_set in enumerate(subsets):
        for b, t_set in enumerate(subsets):
            sym = set(l_set) ^ set(t_set)
            w = 1.0
            for i, d in enumerate(dims):
                w *= d if i in sym else d * d
            gram[a, b] = w
    rhs = np.array([np.trace(m @ _swap_on(set(l), dims)) for l in subsets])
    cond = float(np.linalg.cond(gram))
    coeff = np.linalg.solve(gram, rhs)
    coeffs = {subsets[i]: complex(coeff[i]) for i in range(nsub)}
    return TwirlMoment(dims, coeffs, cond)


def _tr_square(m: np.ndarray) -> float:
    return float(np.real(np.sum(m * m.T)))


def expected_hs_norm_sq(rho, ch: QChannel, subset) -> float:
    """Exact E_{U_I} Tr[((T_I o Theta_I) rho_{A_I E})^2].

    Equals c_I * sum_{J subseteq I} (-1)^{|I\\J|} Tr[rho_{A_J E}^2] / |A_{I\\J}|
    with c_I assembled from the squared Choi marginals of T_I.
    """
    subset = tuple(subset)
    parties = ch.in_layout.labels
    if not subset or any(s not in parties for s in subset):
        raise ValueError(f"subset {subset} not within channel inputs {parties}")
    if any(ch.in_layout.dim(s) < 2 for s in subset):
        raise ValueError("dimension-1 parties are rejected by the twirl calculus")
    rho = rho.density() if isinstance(rho, qcore.PureState) else rho
    env = [l for l in rho.layout.labels if l not in set(parties)]

    t_i = restrict_channel(ch, subset)
    tau = choi(t_i)
    b_labels = [l for l in tau.layout.labels if l not in set(subset)]

    dims = {s: ch.in_layout.dim(s) for s in subset}
    prod_term = 1.0
    for s in subset:
        prod_term *= 1.0 - 1.0 / dims[s] ** 2

    c_i = 0.0
    for l_set in _subsets(subset):
        rest = [s for s in subset if s not in set(l_set)]
        d_rest = 1
        for s in rest:
            d_rest *= dims[s]
        tau_marg = partial_trace(tau, tuple(l_set) + tuple(b_labels))
        c_i += (-1.0) ** len(rest) / d_rest * _tr_square(tau_marg.matrix)
    c_i /= prod_term

    bracket = 0.0
    for j_set in _subsets(subset):
        rest = [s for s in subset if s not in set(j_set)]
        d_rest = 1
        for s in rest:
            d_rest *= dims[s]
        rho_marg = partial_trace(rho, tuple(j_set) + tuple(env))
        bracket += (-1.0) ** len(rest) / d_rest * _tr_square(rho_marg.matrix)
    return float(c_i * bracket)


def d_constant(dims, tensor_product: bool) -> float:
    """D_I: 2^(|I|-1) prod (1-1/d^2)^(-1/2), or prod sqrt(1-1/d^2) for
    declared tensor-product maps."""
    dims = tuple(int(d) for d in dims)
    if any(d < 2 for d in dims):
        raise ValueError("D_I needs every party dimension >= 2")
    prod = 1.0
    for d in dims:
        prod *= np.sqrt(1.0 - 1.0 / d**2)
    if tensor_product:
        return float(prod)
    return float(2.0 ** (len(dims) - 1) / prod)


def lambda_coefficient(ch: QChannel, subset, tensor_product: bool = False) -> ContractiveCoeff:
    """Expected-contractive coefficient of T_I o Theta_I.

    General maps: lambda_I = 2^(|I|-1) prod(1-1/d^2)^(-1/2) ||tau_{A_I B}||_2.
    Tensor-product maps (declared, or any |I| = 1 map, which is trivially a
    one-factor product): lambda_I = prod_i sqrt(1-1/d_i^2) ||tau_{A_i B_i}||_2.
    """
    subset = tuple(subset)
    parties = ch.in_layout.labels
    if any(s not in parties for s in subset):
        raise ValueError(f"subset {subset} not within channel inputs {parties}")
    dims = [ch.in_layout.dim(s) for s in subset]
    dc = d_constant(dims, tensor_product)
    if tensor_product and len(subset) > 1:
        if ch.factors is None:
            raise ValueError("tensor flag set but channel declares no factor structure")
        by_label = {f.in_layout.labels[0]: f for f in ch.factors}
        norm = 1.0
        for s in subset:
            norm *= hs_norm(choi(by_label[s]).matrix)
        lam = dc * norm
        return ContractiveCoeff(subset, float(lam), dc, True, float(norm))
    tau = choi(restrict_channel(ch, subset))
    norm = hs_norm(tau.matrix)
    return ContractiveCoeff(subset, float(dc * norm), dc, tensor_product, float(norm))


def collision_identity_check(ch: QChannel) -> tuple[float, float]:
    """(lhs, rhs) of log|B| + log Tr tau^2 = -H2(A|B)_{tau|tau_B} for
    unital-normalized channels; the two sides are computed by independent
    routes (trace algebra vs the generic sandwiched-entropy code)."""
    res = ch.unital_normalized_residual()
    if res > 1e-9:
        raise ValueError(f"channel is not unital-normalized: residual {res:.3e}")
    tau = choi(ch)
    dout = ch.out_layout.total_dim
    lhs = float(np.log2(dout) + np.log2(_tr_square(tau.matrix)))
    a_labels = ch.in_layout.labels
    b_labels = [l for l in tau.layout.labels if l not in set(a_labels)]
    h2 = entropy.renyi_sandwiched_fixed(tau, a_labels, b_labels, 2.0,
                                        np.eye(dout) / dout)
    rhs = -h2.value_bits
    return lhs, rhs
