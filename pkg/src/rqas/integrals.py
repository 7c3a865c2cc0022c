"""Gaussian integrals over s/p contracted functions (McMurchie-Davidson).

Two-electron integrals leave this module in physicists' order,
``eri[p, q, r, s] = <pq|rs> = (pr|qs)``. The chemists' tensor is built first
and converted exactly once in :func:`build_tables`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma, gammainc

from .chem_core import ContractedGaussian, Geometry, UnsupportedAngularMomentum  # noqa: F401


# --- Boys function ------------------------------------------------------------

_SERIES_CUTOFF = 0.5
_SERIES_TERMS = 30


def _boys_top(m: int, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    small = x < _SERIES_CUTOFF
    if np.any(small):
        xs = x[small]
        # F_m(x) = e^{-x} sum_k (2x)^k / ((2m+1)(2m+3)...(2m+2k+1)), all terms positive
        term = np.full_like(xs, 1.0 / (2 * m + 1))
        acc = term.copy()
        for k in range(1, _SERIES_TERMS):
            term = term * 2 * xs / (2 * m + 2 * k + 1)
            acc += term
        out[small] = np.exp(-xs) * acc
    big = ~small
    if np.any(big):
        xb = x[big]
        a = m + 0.5
        out[big] = gamma(a) * gammainc(a, xb) / (2 * xb**a)
    return out


def boys_array(m_max: int, x) -> np.ndarray:
    """F_0 .. F_{m_max} at ``x``; shape ``(m_max + 1,) + x.shape``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("Boys function argument must be finite and >= 0")
    flat = x.reshape(-1)
    out = np.empty((m_max + 1, flat.size))
    out[m_max] = _boys_top(m_max, flat)
    ex = np.exp(-flat)
    for m in range(m_max, 0, -1):
        out[m - 1] = (2 * flat * out[m] + ex) / (2 * m - 1)
    return out.reshape((m_max + 1,) + x.shape)


def boys_function(m: int, x: float) -> float:
    if m < 0 or int(m) != m:
        raise ValueError("Boys order must be a non-negative integer")
    if x < 0:
        raise ValueError(f"Boys function argument must be >= 0, got {x}")
    return float(boys_array(int(m), np.array([x]))[int(m), 0])


# --- Hermite expansion machinery --------------------------------------------


def _hermite_e(i: int, j: int, xpa, xpb, inv2p, k0) -> list:
    """Coefficients E^{ij}_t, t = 0..i+j, each an array over primitive pairs."""
    table = {(0, 0): [k0]}

    def get(ii, jj):
        if (ii, jj) in table:
            return table[(ii, jj)]
        if jj > 0:
            prev = get(ii, jj - 1)
            shift = xpb
        else:
            prev = get(ii - 1, jj)
            shift = xpa
        n = len(prev)
        cur = []
        for t in range(n + 1):
            val = 0.0
            if t > 0:
                val = val + inv2p * prev[t - 1]
            if t < n:
                val = val + shift * prev[t]
            if t + 1 < n:
                val = val + (t + 1) * prev[t + 1]
            cur.append(val)
        table[(ii, jj)] = cur
        return cur

    return get(i, j)


def _hermite_r(big_l: int, alpha, pc) -> dict:
    """R^0_{tuv} for t+u+v <= big_l; ``pc`` has a trailing xyz axis."""
    x, y, z = pc[..., 0], pc[..., 1], pc[..., 2]
    boys = boys_array(big_l, alpha * (x * x + y * y + z * z))
    base = [(-2 * alpha) ** n * boys[n] for n in range(big_l + 1)]
    memo: dict = {}

    def r(t, u, v, n):
        key = (t, u, v, n)
        if key in memo:
            return memo[key]
        if t == u == v == 0:
            val = base[n]
        elif t > 0:
            val = x * r(t - 1, u, v, n + 1)
            if t > 1:
                val = val + (t - 1) * r(t - 2, u, v, n + 1)
        elif u > 0:
            val = y * r(t, u - 1, v, n + 1)
            if u > 1:
                val = val + (u - 1) * r(t, u - 2, v, n + 1)
        else:
            val = z * r(t, u, v - 1, n + 1)
            if v > 1:
                val = val + (v - 1) * r(t, u, v - 2, n + 1)
        memo[key] = val
        return val

    return {
        (t, u, v): r(t, u, v, 0)
        for t in range(big_l + 1)
        for u in range(big_l + 1 - t)
        for v in range(big_l + 1 - t - u)
    }


class _Pair:
    """Primitive-pair data of two contracted functions, flattened over primitives."""

    def __init__(self, a: ContractedGaussian, b: ContractedGaussian, extra_j: int = 0):
        for g in (a, b):
            if g.l_total > 1:
                raise UnsupportedAngularMomentum("angular momentum above p is not supported")
        alpha = np.repeat(np.asarray(a.exponents, float), len(b.exponents))
        beta = np.tile(np.asarray(b.exponents, float), len(a.exponents))
        self.weight = np.outer(a.norm_coefficients, b.norm_coefficients).reshape(-1)
        self.alpha, self.beta = alpha, beta
        self.p = p = alpha + beta
        A, B = a.origin, b.origin
        self.P = (alpha[:, None] * A + beta[:, None] * B) / p[:, None]
        mu = alpha * beta / p
        inv2p = 0.5 / p
        self.lmn_a, self.lmn_b = a.angular_momentum, b.angular_momentum
        self._args = []
        for d in range(3):
            k0 = np.exp(-mu * (A[d] - B[d]) ** 2)
            self._args.append((self.P[:, d] - A[d], self.P[:, d] - B[d], inv2p, k0))
        # E^{ij}_t per dimension for the actual angular momenta
        self.E = [
            _hermite_e(self.lmn_a[d], self.lmn_b[d], *self._args[d]) for d in range(3)
        ]
        self.L = a.l_total + b.l_total

    def e1d(self, d: int, i: int, j: int) -> list:
        return _hermite_e(i, j, *self._args[d])

    def hermite_products(self) -> dict:
        """(t, u, v) -> weighted E^x_t E^y_u E^z_v."""
        ex, ey, ez = self.E
        return {
            (t, u, v): self.weight * ex[t] * ey[u] * ez[v]
            for t in range(len(ex))
            for u in range(len(ey))
            for v in range(len(ez))
        }


def _overlap_pair(pair: _Pair) -> float:
    s = np.sqrt(np.pi / pair.p)
    ex, ey, ez = pair.E
    return float(np.sum(pair.weight * ex[0] * ey[0] * ez[0] * s**3))


def _kinetic_pair(pair: _Pair) -> float:
    sq = np.sqrt(np.pi / pair.p)
    b = pair.beta
    s1d, t1d = [], []
    for d in range(3):
        i, j = pair.lmn_a[d], pair.lmn_b[d]
        s_ij = pair.E[d][0] * sq
        s_up = pair.e1d(d, i, j + 2)[0] * sq
        t = -0.5 * (-2 * b * (2 * j + 1) * s_ij + 4 * b * b * s_up)
        if j >= 2:
            t = t - 0.5 * j * (j - 1) * pair.e1d(d, i, j - 2)[0] * sq
        s1d.append(s_ij)
        t1d.append(t)
    total = t1d[0] * s1d[1] * s1d[2] + s1d[0] * t1d[1] * s1d[2] + s1d[0] * s1d[1] * t1d[2]
    return float(np.sum(pair.weight * total))


def _nuclear_pair(pair: _Pair, nuclei) -> float:
    herm = pair.hermite_products()
    total = 0.0
    for nuc in nuclei:
        pc = pair.P - nuc.xyz
        r = _hermite_r(pair.L, pair.p, pc)
        acc = sum(coef * r[key] for key, coef in herm.items())
        total += -nuc.charge * float(np.sum(2 * np.pi / pair.p * acc))
    return total


def _eri_pairs(bra: _Pair, ket: _Pair, herm_bra=None, herm_ket=None) -> float:
    herm_bra = herm_bra if herm_bra is not None else bra.hermite_products()
    herm_ket = herm_ket if herm_ket is not None else ket.hermite_products()
    p = bra.p[:, None]
    q = ket.p[None, :]
    alpha = p * q / (p + q)
    pq = bra.P[:, None, :] - ket.P[None, :, :]
    r = _hermite_r(bra.L + ket.L, alpha, pq)
    acc = 0.0
    for (t, u, v), eb in herm_bra.items():
        inner = 0.0
        for (tau, nu, phi), ek in herm_ket.items():
            sign = -1.0 if (tau + nu + phi) % 2 else 1.0
            inner = inner + sign * ek[None, :] * r[(t + tau, u + nu, v + phi)]
        acc = acc + eb[:, None] * inner
    pref = 2 * np.pi**2.5 / (p * q * np.sqrt(p + q))
    return float(np.sum(pref * acc))


def overlap(a: ContractedGaussian, b: ContractedGaussian) -> float:
    return _overlap_pair(_Pair(a, b))


def kinetic(a: ContractedGaussian, b: ContractedGaussian) -> float:
    return _kinetic_pair(_Pair(a, b))


def nuclear_attraction(a: ContractedGaussian, b: ContractedGaussian, nuclei) -> float:
    return _nuclear_pair(_Pair(a, b), nuclei)


def eri(a, b, c, d) -> float:
    """Chemists' (ab|cd) for a single quartet."""
    return _eri_pairs(_Pair(a, b), _Pair(c, d))


# --- full tables --------------------------------------------------------------


@dataclass(frozen=True)
class IntegralTables:
    S: np.ndarray
    T_kin: np.ndarray
    V_nuc: np.ndarray
    ERI: np.ndarray  # physicists' <pq|rs>
    E_nn: float

    @property
    def n(self) -> int:
        return self.S.shape[0]

    @property
    def h_core(self) -> np.ndarray:
        return self.T_kin + self.V_nuc

    def to_json(self) -> str:
        return json.dumps(
            {
                "convention": "physicists <pq|rs>",
                "S": self.S.tolist(),
                "T_kin": self.T_kin.tolist(),
                "V_nuc": self.V_nuc.tolist(),
                "ERI": self.ERI.tolist(),
                "E_nn": self.E_nn,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "IntegralTables":
        raw = json.loads(text)
        return cls(
            np.array(raw["S"]),
            np.array(raw["T_kin"]),
            np.array(raw["V_nuc"]),
            np.array(raw["ERI"]),
            float(raw["E_nn"]),
        )


def chemist_to_physicist(eri_chem: np.ndarray) -> np.ndarray:
    """(pr|qs) -> <pq|rs>."""
    return np.ascontiguousarray(eri_chem.transpose(0, 2, 1, 3))


def physicist_to_chemist(eri_phys: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(eri_phys.transpose(0, 2, 1, 3))


def nuclear_repulsion(nuclei) -> float:
    e = 0.0
    for i, a in enumerate(nuclei):
        for b in nuclei[i + 1:]:
            e += a.charge * b.charge / float(np.linalg.norm(a.xyz - b.xyz))
    return e


def build_tables(geometry: Geometry, basis: list[ContractedGaussian]) -> IntegralTables:
    n = len(basis)
    nuclei = geometry.nuclei
    pairs = {}
    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            pr = _Pair(basis[i], basis[j])
            pairs[(i, j)] = pr
            S[i, j] = S[j, i] = _overlap_pair(pr)
            T[i, j] = T[j, i] = _kinetic_pair(pr)
            V[i, j] = V[j, i] = _nuclear_pair(pr, nuclei)

    keys = list(pairs)
    herm = {k: pairs[k].hermite_products() for k in keys}
    chem = np.zeros((n, n, n, n))
    for a, (i, j) in enumerate(keys):
        for (k, l) in keys[: a + 1]:
            val = _eri_pairs(pairs[(i, j)], pairs[(k, l)], herm[(i, j)], herm[(k, l)])
            for p_, q_, r_, s_ in _eightfold(i, j, k, l):
                chem[p_, q_, r_, s_] = val
    return IntegralTables(S, T, V, chemist_to_physicist(chem), nuclear_repulsion(nuclei))


def _eightfold(i, j, k, l):
    return {
        (i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
        (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i),
    }
