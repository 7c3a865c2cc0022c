"""Physical constants, unit conversions, model geometries and the STO-3G basis.

Everything electronic is kept in atomic units (Hartree, Bohr). Only the
kinetics layer converts to SI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BOHR_PER_ANGSTROM = 1.8897259886
KCALMOL_PER_HARTREE = 627.509474
AVOGADRO = 6.02214076e23


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants used by the tunnelling/thermal kinetics."""

    hbar: float = 1.054e-34  # J s
    k_B: float = 1.38e-23  # J/K
    m_proton: float = 1.67e-27  # kg, used as the reduced mass
    T_body: float = 310.0  # K
    bohr_per_angstrom: float = BOHR_PER_ANGSTROM
    kcalmol_per_hartree: float = KCALMOL_PER_HARTREE
    joule_per_kcalmol_molecule: float = 4184.0 / AVOGADRO


CONSTANTS = PhysicalConstants()


def angstrom_to_bohr(x):
    return x * BOHR_PER_ANGSTROM


def bohr_to_angstrom(x):
    return x / BOHR_PER_ANGSTROM


def hartree_to_kcalmol(e):
    return e * KCALMOL_PER_HARTREE


def kcalmol_to_hartree(e):
    return e / KCALMOL_PER_HARTREE


ATOMIC_NUMBERS = {"H": 1, "He": 2, "O": 8}


class GeometryError(ValueError):
    """Raised for coordinates outside the model's domain."""


class UnsupportedElementError(ValueError):
    pass


class UnsupportedAngularMomentum(ValueError):
    """Raised for shells above p."""


@dataclass(frozen=True)
class Nucleus:
    element: str
    charge: int
    position: tuple[float, float, float]  # Bohr

    def __post_init__(self):
        expected = ATOMIC_NUMBERS.get(self.element)
        if expected is not None and expected != self.charge:
            raise ValueError(f"{self.element} must carry charge {expected}, got {self.charge}")

    @property
    def xyz(self) -> np.ndarray:
        return np.asarray(self.position, dtype=float)


@dataclass(frozen=True)
class Geometry:
    nuclei: tuple[Nucleus, ...]
    total_charge: int = 0

    @property
    def n_electrons(self) -> int:
        return sum(n.charge for n in self.nuclei) - self.total_charge

    def translated(self, shift) -> "Geometry":
        shift = np.asarray(shift, dtype=float)
        return Geometry(
            tuple(Nucleus(n.element, n.charge, tuple(n.xyz + shift)) for n in self.nuclei),
            self.total_charge,
        )


def molecule(atoms, charge: int = 0, unit: str = "angstrom") -> Geometry:
    """Build a Geometry from ``[(symbol, (x, y, z)), ...]``."""
    scale = BOHR_PER_ANGSTROM if unit.lower().startswith("ang") else 1.0
    nuclei = []
    for symbol, pos in atoms:
        if symbol not in ATOMIC_NUMBERS:
            raise UnsupportedElementError(f"unsupported element: {symbol}")
        nuclei.append(
            Nucleus(symbol, ATOMIC_NUMBERS[symbol], tuple(float(c) * scale for c in pos))
        )
    return Geometry(tuple(nuclei), charge)


def build_geometry(d_oo: float, z_proton: float) -> Geometry:
    """Colinear [O-H-O]- model: donor O at the origin, acceptor at (0, 0, d_oo).

    Both arguments are in Angstrom; the returned positions are in Bohr.
    """
    if not (math.isfinite(d_oo) and 2.0 < d_oo < 5.0):
        raise GeometryError(f"d_OO = {d_oo} A outside (2.0, 5.0)")
    if not (math.isfinite(z_proton) and 0.0 < z_proton < d_oo):
        raise GeometryError(f"z_proton = {z_proton} A outside the O-O segment (0, {d_oo})")
    return molecule(
        [("O", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, z_proton)), ("O", (0.0, 0.0, d_oo))],
        charge=-1,
    )


# --- STO-3G -----------------------------------------------------------------

# Exponents (Bohr^-2) and contraction coefficients from the published tables.
_STO3G_1S_COEF = (0.15432897, 0.53532814, 0.44463454)
_STO3G_2S_COEF = (-0.09996723, 0.39951283, 0.70011547)
_STO3G_2P_COEF = (0.15591627, 0.60768372, 0.39195739)

STO3G = {
    "H": [("s", (3.42525091, 0.62391373, 0.16885540), _STO3G_1S_COEF)],
    "He": [("s", (6.36242139, 1.15892300, 0.31364979), _STO3G_1S_COEF)],
    "O": [
        ("s", (130.7093200, 23.8088610, 6.4436083), _STO3G_1S_COEF),
        ("s", (5.0331513, 1.1695961, 0.3803890), _STO3G_2S_COEF),
        ("p", (5.0331513, 1.1695961, 0.3803890), _STO3G_2P_COEF),
    ],
}

_CARTESIAN = {"s": [(0, 0, 0)], "p": [(1, 0, 0), (0, 1, 0), (0, 0, 1)]}


def _double_factorial(n: int) -> int:
    return 1 if n <= 0 else n * _double_factorial(n - 2)


def primitive_norm(alpha, lmn) -> np.ndarray:
    l, m, n = lmn
    big_l = l + m + n
    num = (2 * alpha / math.pi) ** 0.75 * (4 * alpha) ** (big_l / 2)
    den = math.sqrt(
        _double_factorial(2 * l - 1) * _double_factorial(2 * m - 1) * _double_factorial(2 * n - 1)
    )
    return num / den


@dataclass(frozen=True)
class ContractedGaussian:
    """Contracted Cartesian Gaussian.

    ``coefficients`` are the raw contraction coefficients; ``norm_coefficients``
    fold in primitive normalisation and the overall contraction normalisation so
    that the self-overlap is exactly one.
    """

    center: tuple[float, float, float]
    angular_momentum: tuple[int, int, int]
    exponents: tuple[float, ...]
    coefficients: tuple[float, ...]
    norm_coefficients: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if sum(self.angular_momentum) > 1:
            raise UnsupportedAngularMomentum(
                f"angular momentum {self.angular_momentum} above p is not supported"
            )
        alpha = np.asarray(self.exponents, dtype=float)
        d = np.asarray(self.coefficients, dtype=float) * primitive_norm(alpha, self.angular_momentum)
        # contraction normalisation
        l, m, n = self.angular_momentum
        big_l = l + m + n
        pref = (
            math.pi**1.5
            * _double_factorial(2 * l - 1)
            * _double_factorial(2 * m - 1)
            * _double_factorial(2 * n - 1)
            / 2**big_l
        )
        s = alpha[:, None] + alpha[None, :]
        self_overlap = pref * np.sum(np.outer(d, d) / s ** (big_l + 1.5))
        object.__setattr__(self, "norm_coefficients", d / math.sqrt(self_overlap))

    @property
    def primitives(self) -> list[tuple[float, float]]:
        return list(zip(self.exponents, self.coefficients))

    @property
    def origin(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    @property
    def l_total(self) -> int:
        return sum(self.angular_momentum)


def sto3g_basis(geometry: Geometry) -> list[ContractedGaussian]:
    """STO-3G functions in atom order; p shells ordered x, y, z."""
    basis = []
    for nuc in geometry.nuclei:
        shells = STO3G.get(nuc.element)
        if shells is None:
            raise UnsupportedElementError(f"no STO-3G parameters for element {nuc.element!r}")
        for kind, exps, coefs in shells:
            for lmn in _CARTESIAN[kind]:
                basis.append(ContractedGaussian(nuc.position, lmn, exps, coefs))
    return basis
