"""Fermionic Hamiltonian, Jordan-Wigner mapping and Pauli algebra.

Spin orbitals use blocked ordering: qubit ``p`` is alpha spatial orbital ``p``
and qubit ``p + n_orb`` is its beta partner. Basis-state index bit ``q`` holds
qubit ``q``.

Pauli strings are stored symplectically as integer masks ``(x, z)`` with
``P = i^{|x & z|} X^x Z^z``, so a qubit with both bits set is ``Y``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .scf import ActiveSpaceIntegrals

PRUNE_THRESHOLD = 1e-10
MAX_DENSE_QUBITS = 12

_POPCOUNT = np.array([bin(i).count("1") for i in range(1 << MAX_DENSE_QUBITS)], dtype=np.int64)


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=True)
class PauliString:
    n_qubits: int
    x: int = 0
    z: int = 0

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """``"XZYI"``: leftmost character acts on qubit 0. Whitespace ignored."""
        label = "".join(label.split())
        x = z = 0
        for q, ch in enumerate(label):
            if ch == "X":
                x |= 1 << q
            elif ch == "Z":
                z |= 1 << q
            elif ch == "Y":
                x |= 1 << q
                z |= 1 << q
            elif ch != "I":
                raise ValueError(f"bad Pauli label character {ch!r}")
        return cls(len(label), x, z)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, op: str) -> "PauliString":
        label = ["I"] * n_qubits
        label[qubit] = op
        return cls.from_label("".join(label))

    @property
    def label(self) -> str:
        out = []
        for q in range(self.n_qubits):
            xb, zb = (self.x >> q) & 1, (self.z >> q) & 1
            out.append("IXZY"[xb + 2 * zb])
        return "".join(out)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def __str__(self) -> str:
        return self.label


def pauli_multiply(a: PauliString, b: PauliString) -> tuple[PauliString, complex]:
    """Return ``(c, phase)`` with ``a * b = phase * c``."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("Pauli strings of different length")
    x, z = a.x ^ b.x, a.z ^ b.z
    k = _popcount(a.x & a.z) + _popcount(b.x & b.z) - _popcount(x & z) + 2 * _popcount(a.z & b.x)
    return PauliString(a.n_qubits, x, z), 1j ** (k % 4)


class PauliSum:
    """Real-weighted sum of Pauli strings plus an identity offset."""

    def __init__(self, n_qubits: int, terms=None, constant_offset: float = 0.0):
        self.n_qubits = n_qubits
        self.constant_offset = float(constant_offset)
        self.terms: dict[PauliString, float] = {}
        for p, c in (terms or {}).items():
            if isinstance(p, str):
                p = PauliString.from_label(p)
            if p.n_qubits != n_qubits:
                raise ValueError("term length does not match n_qubits")
            if abs(complex(c).imag) > PRUNE_THRESHOLD:
                raise ValueError(f"non-real coefficient {c} on {p}")
            c = float(complex(c).real)
            if not math.isfinite(c):
                raise ValueError(f"non-finite coefficient on {p}")
            if p.is_identity():
                self.constant_offset += c
            else:
                self.terms[p] = self.terms.get(p, 0.0) + c
        self.terms = {p: c for p, c in self.terms.items() if abs(c) >= PRUNE_THRESHOLD}

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"PauliSum(n_qubits={self.n_qubits}, n_terms={len(self)}, offset={self.constant_offset:.6f})"

    def items(self):
        return self.terms.items()

    def __add__(self, other: "PauliSum") -> "PauliSum":
        terms = dict(self.terms)
        for p, c in other.terms.items():
            terms[p] = terms.get(p, 0.0) + c
        return PauliSum(self.n_qubits, terms, self.constant_offset + other.constant_offset)

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + other.scaled(-1.0)

    def scaled(self, a: float) -> "PauliSum":
        return PauliSum(self.n_qubits, {p: a * c for p, c in self.terms.items()}, a * self.constant_offset)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scaled(float(other))
        return _as_complex_sum(self).multiply(_as_complex_sum(other)).to_pauli_sum()

    __rmul__ = __mul__

    def to_matrix(self) -> np.ndarray:
        return _ComplexPauliSum.from_real(self).to_matrix()

    def apply(self, state: np.ndarray) -> np.ndarray:
        """H |state> without building a matrix."""
        idx = np.arange(state.size)
        out = self.constant_offset * state
        for p, c in self.terms.items():
            out = out + c * _apply_pauli(p, state, idx)
        return out

    # --- text format: "<coeff> <label grouped by 4>" per line ---

    def to_text(self) -> str:
        lines = [
            f"# n_qubits {self.n_qubits}",
            "# coefficient (Hartree) then Pauli label, qubit 0 leftmost, groups of 4",
        ]
        ident = PauliString(self.n_qubits)
        for p, c in [(ident, self.constant_offset)] + sorted(self.terms.items(), key=lambda t: t[0].label):
            lab = p.label
            grouped = " ".join(lab[i:i + 4] for i in range(0, len(lab), 4))
            lines.append(f"{c:+.16e} {grouped}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PauliSum":
        n = None
        terms: dict = defaultdict(float)
        offset = 0.0
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "n_qubits":
                    n = int(parts[1])
                continue
            coeff, *label = line.split()
            p = PauliString.from_label("".join(label))
            if n is None:
                n = p.n_qubits
            if p.is_identity():
                offset += float(coeff)
            else:
                terms[p] += float(coeff)
        return cls(n, dict(terms), offset)


def _apply_pauli(p: PauliString, state: np.ndarray, idx: np.ndarray) -> np.ndarray:
    # (P psi)[i ^ x] = i^{|x&z|} (-1)^{|i&z|} psi[i]
    sign = 1 - 2 * (_POPCOUNT[idx & p.z] & 1) if idx.size <= _POPCOUNT.size else _slow_parity(idx & p.z)
    out = np.empty_like(state, dtype=complex)
    out[idx ^ p.x] = (1j ** (_popcount(p.x & p.z) % 4)) * sign * state
    return out


def _slow_parity(v: np.ndarray) -> np.ndarray:
    par = np.zeros_like(v)
    while np.any(v):
        par ^= v & 1
        v = v >> 1
    return 1 - 2 * par


class _ComplexPauliSum:
    """Intermediate with complex coefficients, used while expanding products."""

    def __init__(self, n_qubits: int, terms=None):
        self.n_qubits = n_qubits
        self.terms: dict[PauliString, complex] = dict(terms or {})

    @classmethod
    def from_real(cls, ps: PauliSum) -> "_ComplexPauliSum":
        terms = {p: complex(c) for p, c in ps.terms.items()}
        if ps.constant_offset:
            terms[PauliString(ps.n_qubits)] = complex(ps.constant_offset)
        return cls(ps.n_qubits, terms)

    def add(self, other: "_ComplexPauliSum", scale: complex = 1.0):
        for p, c in other.terms.items():
            self.terms[p] = self.terms.get(p, 0.0) + scale * c

    def multiply(self, other: "_ComplexPauliSum") -> "_ComplexPauliSum":
        out: dict = defaultdict(complex)
        for pa, ca in self.terms.items():
            for pb, cb in other.terms.items():
                pc, phase = pauli_multiply(pa, pb)
                out[pc] += phase * ca * cb
        return _ComplexPauliSum(self.n_qubits, out)

    def max_imag(self) -> float:
        return max((abs(c.imag) for c in self.terms.values()), default=0.0)

    def to_pauli_sum(self, tol: float = PRUNE_THRESHOLD) -> PauliSum:
        bad = self.max_imag()
        if bad > tol:
            raise ArithmeticError(f"residual imaginary coefficient {bad:.3e} above tolerance")
        return PauliSum(self.n_qubits, {p: c.real for p, c in self.terms.items()})

    def to_matrix(self) -> np.ndarray:
        n = self.n_qubits
        if n > MAX_DENSE_QUBITS:
            raise ValueError(f"{n} qubits exceeds the dense budget of {MAX_DENSE_QUBITS}")
        dim = 1 << n
        idx = np.arange(dim)
        M = np.zeros((dim, dim), dtype=complex)
        for p, c in self.terms.items():
            sign = 1 - 2 * (_POPCOUNT[idx & p.z] & 1)
            M[idx ^ p.x, idx] += c * (1j ** (_popcount(p.x & p.z) % 4)) * sign
        return M


def _as_complex_sum(ps) -> _ComplexPauliSum:
    return ps if isinstance(ps, _ComplexPauliSum) else _ComplexPauliSum.from_real(ps)


# --- fermionic operators ------------------------------------------------------


class FermionOperator:
    """Sum of products of ladder operators.

    A term key is a tuple of ``(mode, dagger)`` pairs read left to right, so
    ``((0, True), (1, False))`` is ``a_0^dagger a_1``.
    """

    def __init__(self, n_modes: int, terms=None, constant: float = 0.0):
        self.n_modes = n_modes
        self.constant = float(constant)
        self.terms: dict[tuple, float] = {}
        for key, c in (terms or {}).items():
            for mode, _ in key:
                if not 0 <= mode < n_modes:
                    raise ValueError(f"mode index {mode} outside 0..{n_modes - 1}")
            if key == ():
                self.constant += c
            else:
                self.terms[key] = self.terms.get(key, 0.0) + c

    def __len__(self):
        return len(self.terms)

    def __add__(self, other: "FermionOperator") -> "FermionOperator":
        out = FermionOperator(self.n_modes, self.terms, self.constant)
        for k, c in other.terms.items():
            out.terms[k] = out.terms.get(k, 0.0) + c
        out.constant += other.constant
        return out

    def adjoint(self) -> "FermionOperator":
        return FermionOperator(
            self.n_modes,
            {tuple((m, not d) for m, d in reversed(k)): c for k, c in self.terms.items()},
            self.constant,
        )

    def normal_ordered(self, tol: float = 1e-14) -> "FermionOperator":
        """Creators left (descending mode), annihilators right (descending mode).

        Anticommutation contractions are generated as needed; applying this
        twice gives the same operator.
        """
        acc: dict = defaultdict(float)
        const = self.constant
        stack = list(self.terms.items())
        while stack:
            key, c = stack.pop()
            key = list(key)
            done = False
            while not done:
                done = True
                for i in range(len(key) - 1):
                    (m1, d1), (m2, d2) = key[i], key[i + 1]
                    if (not d1 and d2) or (d1 == d2 and m1 < m2):
                        if m1 == m2 and d1 == d2:
                            c = 0.0  # a_p a_p = 0
                            break
                        if not d1 and d2 and m1 == m2:
                            # a_p a_p^dag = 1 - a_p^dag a_p
                            contracted = key[:i] + key[i + 2:]
                            stack.append((tuple(contracted), c))
                        key[i], key[i + 1] = key[i + 1], key[i]
                        c = -c
                        done = False
                        break
                    if d1 == d2 and m1 == m2:
                        c = 0.0
                        break
                if c == 0.0:
                    break
            if c == 0.0:
                continue
            if not key:
                const += c
            else:
                acc[tuple(key)] += c
        return FermionOperator(self.n_modes, {k: v for k, v in acc.items() if abs(v) > tol}, const)

    def is_close(self, other: "FermionOperator", tol: float = 1e-10) -> bool:
        a, b = self.normal_ordered(), other.normal_ordered()
        if abs(a.constant - b.constant) > tol:
            return False
        for k in set(a.terms) | set(b.terms):
            if abs(a.terms.get(k, 0.0) - b.terms.get(k, 0.0)) > tol:
                return False
        return True


def build_fermionic_hamiltonian(asi: ActiveSpaceIntegrals) -> FermionOperator:
    """Spin-orbital form of the active Hamiltonian.

    ``sum h_pq a+_p a_q + 1/2 sum <pq|rs> a+_p a+_q a_s a_r`` with spin summed
    over; the constant ``E_frozen`` rides along as ``constant``.
    """
    n = asi.n_active_orbitals
    h, g = asi.h_eff, asi.g
    terms: dict = defaultdict(float)
    for sigma in (0, 1):
        for p in range(n):
            for q in range(n):
                if abs(h[p, q]) > PRUNE_THRESHOLD:
                    terms[((p + sigma * n, True), (q + sigma * n, False))] += h[p, q]
    for sigma in (0, 1):
        for tau in (0, 1):
            for p in range(n):
                for q in range(n):
                    for r in range(n):
                        for s in range(n):
                            v = g[p, q, r, s]
                            if abs(v) <= PRUNE_THRESHOLD:
                                continue
                            P, Q = p + sigma * n, q + tau * n
                            R, S = r + sigma * n, s + tau * n
                            if P == Q or R == S:
                                continue
                            key = ((P, True), (Q, True), (S, False), (R, False))
                            terms[key] += 0.5 * v
    return FermionOperator(2 * n, dict(terms), asi.E_frozen)


def _jw_ladder(n: int, mode: int, dagger: bool) -> _ComplexPauliSum:
    zchain = (1 << mode) - 1
    bit = 1 << mode
    x_term = PauliString(n, bit, zchain)
    y_term = PauliString(n, bit, zchain | bit)
    # a^dag = (X - iY)/2 Z..., a = (X + iY)/2 Z...
    return _ComplexPauliSum(n, {x_term: 0.5, y_term: (-0.5j if dagger else 0.5j)})


def jordan_wigner(op: FermionOperator, n_qubits: int | None = None) -> PauliSum:
    n = n_qubits if n_qubits is not None else op.n_modes
    if op.n_modes > n:
        raise ValueError("operator acts on more modes than qubits available")
    ladders = {(m, d): _jw_ladder(n, m, d) for m in range(op.n_modes) for d in (True, False)}
    total = _ComplexPauliSum(n, {PauliString(n): complex(op.constant)} if op.constant else {})
    cache: dict = {}
    for key, c in op.terms.items():
        if key not in cache:
            prod = ladders[key[0]]
            for factor in key[1:]:
                prod = prod.multiply(ladders[factor])
            cache[key] = prod
        total.add(cache[key], c)
    return total.to_pauli_sum()


def number_operator(n_qubits: int) -> PauliSum:
    """JW image of sum_p a+_p a_p."""
    return PauliSum(
        n_qubits,
        {PauliString.single(n_qubits, q, "Z"): -0.5 for q in range(n_qubits)},
        0.5 * n_qubits,
    )


def sz_operator(n_qubits: int) -> PauliSum:
    """JW image of S_z for the blocked alpha/beta ordering."""
    half = n_qubits // 2
    terms = {}
    for q in range(n_qubits):
        # n_alpha/2 - n_beta/2 with n = (1 - Z)/2
        terms[PauliString.single(n_qubits, q, "Z")] = -0.25 if q < half else 0.25
    return PauliSum(n_qubits, terms)


def number_penalty(n_qubits: int, n_electrons: int, weight: float) -> PauliSum:
    """``weight * (N - n_electrons)^2`` as a Pauli sum."""
    shifted = number_operator(n_qubits) - PauliSum(n_qubits, {}, n_electrons)
    return (shifted * shifted).scaled(weight)


def commutator_norm(a: PauliSum, b: PauliSum) -> float:
    ca, cb = _as_complex_sum(a), _as_complex_sum(b)
    ab = ca.multiply(cb)
    ab.add(cb.multiply(ca), -1.0)
    return float(np.sqrt(sum(abs(c) ** 2 for c in ab.terms.values())))


def exact_ground_state(h: PauliSum, n_electrons: int | None = None) -> tuple[float, np.ndarray]:
    """Lowest eigenpair of the dense matrix.

    With ``n_electrons`` the search is restricted to basis states of that
    Hamming weight (exact when ``h`` conserves particle number).
    """
    if h.n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(
            f"dense diagonalisation refused: {h.n_qubits} qubits exceeds {MAX_DENSE_QUBITS}"
        )
    M = h.to_matrix()
    dim = M.shape[0]
    if n_electrons is None:
        w, v = np.linalg.eigh(M)
        return float(w[0]), v[:, 0]
    sel = np.flatnonzero(_POPCOUNT[:dim] == n_electrons)
    w, v = np.linalg.eigh(M[np.ix_(sel, sel)])
    vec = np.zeros(dim, dtype=complex)
    vec[sel] = v[:, 0]
    return float(w[0]), vec


def hf_bitstring(n_orbitals: int, n_electrons: int) -> int:
    """Occupation integer for the closed-shell reference in blocked ordering."""
    occ = (1 << (n_electrons // 2)) - 1
    return occ | (occ << n_orbitals)


def active_qubit_hamiltonian(asi: ActiveSpaceIntegrals) -> PauliSum:
    return jordan_wigner(build_fermionic_hamiltonian(asi), 2 * asi.n_active_orbitals)
