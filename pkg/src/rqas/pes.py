"""Proton-coordinate scans, barrier extraction and tunnelling kinetics."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .chem_core import CONSTANTS, PhysicalConstants, build_geometry, hartree_to_kcalmol, sto3g_basis
from .integrals import build_tables
from .qubit import active_qubit_hamiltonian, exact_ground_state, hf_bitstring, number_penalty
from .scf import run_rhf, select_active_space
from .vqe import hea_for_reference, run_vqe

log = logging.getLogger(__name__)

WIDTH_OFFSET_A = 1.9
LN10 = math.log(10.0)


class ScanError(RuntimeError):
    def __init__(self, z: float, stage: str, cause: Exception):
        super().__init__(f"scan failed at z = {z:.6f} A during {stage}: {cause}")
        self.z = z
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class ScanOptions:
    points: int = 25
    margin: float = 1.0  # Angstrom from each oxygen
    n_layers: int = 3
    iterations: int = 25
    step_size: float = 0.4
    seed: int = 0
    warm_start: bool = True
    return_best: bool = True
    penalty_weight: float = 1.0  # Hartree, on (N - 4)^2
    check_exact: bool = False


@dataclass
class PESCurve:
    d_oo: float
    z: list
    energies: list  # Hartree
    provenance: str = "ab-initio"
    hf_energies: list = field(default_factory=list)
    exact_energies: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "PESCurve":
        return cls(**raw)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["z_A", "E0_hartree", "E_hf_hartree"])
        for i, (z, e) in enumerate(zip(self.z, self.energies)):
            hf = self.hf_energies[i] if i < len(self.hf_energies) else ""
            w.writerow([repr(z), repr(e), repr(hf) if hf != "" else ""])
        return buf.getvalue()


def scan_grid(d_oo: float, margin: float, points: int) -> np.ndarray:
    if points < 3:
        raise ValueError("a scan needs at least 3 points")
    if d_oo - 2 * margin <= 0:
        raise ValueError(f"margin {margin} A leaves no room inside d_OO = {d_oo} A")
    return np.linspace(margin, d_oo - margin, points)


def scan_pes(d_oo: float, opts: ScanOptions | None = None) -> PESCurve:
    """Ground-state energy along the O-O axis, one RHF + active space + VQE per point.

    Each SCF is started both from the core Hamiltonian and from the previous
    point's density; the lower converged solution is kept. This keeps the
    curve on the RHF ground state where the anion has competing solutions.
    """
    opts = opts or ScanOptions()
    grid = scan_grid(d_oo, opts.margin, opts.points)
    energies, hf_energies, exact = [], [], []
    prev_density = None
    theta = None
    for z in grid:
        z = float(z)
        stage = "geometry"
        try:
            geom = build_geometry(d_oo, z)
            stage = "integrals"
            tables = build_tables(geom, sto3g_basis(geom))
            stage = "scf"
            scf = _lowest_rhf(tables, geom.n_electrons, prev_density)
            prev_density = scf.density
            stage = "active-space"
            asi = select_active_space(scf, tables)
            h = active_qubit_hamiltonian(asi)
            n_q = h.n_qubits
            h = h + number_penalty(n_q, asi.n_active_electrons, opts.penalty_weight)
            stage = "vqe"
            spec = hea_for_reference(
                n_q, opts.n_layers, hf_bitstring(asi.n_active_orbitals, asi.n_active_electrons)
            )
            ex = exact_ground_state(h)[0] if opts.check_exact else None
            trace = run_vqe(
                h,
                spec,
                iterations=opts.iterations,
                step_size=opts.step_size,
                seed=opts.seed,
                return_best=opts.return_best,
                theta0=theta if opts.warm_start else None,
                exact_energy=ex,
            )
        except Exception as exc:  # noqa: BLE001 - rewrapped with location
            raise ScanError(z, stage, exc) from exc
        if opts.warm_start:
            theta = trace.final_theta
        energies.append(trace.final_energy)
        hf_energies.append(scf.E_total)
        if ex is not None:
            exact.append(ex)
    return PESCurve(d_oo, [float(z) for z in grid], energies, "ab-initio", hf_energies, exact)


def _lowest_rhf(tables, n_electrons, prev_density):
    best = run_rhf(tables, n_electrons)
    if prev_density is not None:
        cont = run_rhf(tables, n_electrons, guess_density=prev_density)
        if cont.converged and (not best.converged or cont.E_total < best.E_total - 1e-9):
            best = cont
    if not best.converged:
        raise RuntimeError(f"RHF did not converge in {best.n_iterations} iterations")
    return best


# --- barrier ------------------------------------------------------------------


@dataclass(frozen=True)
class BarrierParams:
    V0: float  # kcal/mol
    w: float  # Angstrom
    d_oo: float
    z_at_max: float | None = None
    reference_energy: float | None = None  # Hartree
    degenerate: bool = False


def barrier_width(d_oo: float) -> float:
    w = d_oo - WIDTH_OFFSET_A
    if w <= 0:
        raise ValueError(f"d_OO = {d_oo} A gives non-positive barrier width")
    return w


def extract_barrier(curve: PESCurve, reference_energy: float | None = None) -> BarrierParams:
    """V0 = max(E) - reference, in kcal/mol; the reference defaults to min(E).

    Passing the wild-type minimum as ``reference_energy`` puts every variant on
    one energy axis anchored at the wild-type equilibrium.
    """
    e = np.asarray(curve.energies, dtype=float)
    if e.size < 3:
        raise ValueError("barrier extraction needs at least 3 samples")
    w = barrier_width(curve.d_oo)
    ref = float(e.min()) if reference_energy is None else float(reference_energy)
    k = int(np.argmax(e))
    degenerate = float(e.max() - e.min()) < 1e-6
    if degenerate:
        log.warning("flat PES at d_OO = %.3f A (max - min < 1e-6 Eh)", curve.d_oo)
    return BarrierParams(
        V0=hartree_to_kcalmol(float(e[k]) - ref),
        w=w,
        d_oo=curve.d_oo,
        z_at_max=float(curve.z[k]) if curve.z else None,
        reference_energy=ref,
        degenerate=degenerate,
    )


# --- kinetics -------------------------------------------------------------------


@dataclass(frozen=True)
class TransferProbabilities:
    """Natural-log probabilities; linear values may underflow to 0."""

    ln_P_tunnel: float
    ln_P_thermal: float
    kappa: float  # 1/m

    @property
    def ln_P_total(self) -> float:
        return float(np.logaddexp(self.ln_P_tunnel, self.ln_P_thermal))

    @property
    def log10_P_tunnel(self) -> float:
        return self.ln_P_tunnel / LN10

    @property
    def log10_P_thermal(self) -> float:
        return self.ln_P_thermal / LN10

    @property
    def log10_P_total(self) -> float:
        return self.ln_P_total / LN10

    @property
    def P_tunnel(self) -> float:
        return math.exp(self.ln_P_tunnel)

    @property
    def P_thermal(self) -> float:
        return math.exp(self.ln_P_thermal)

    @property
    def P_total(self) -> float:
        return math.exp(self.ln_P_total)


def decay_constant(V0_kcalmol: float, c: PhysicalConstants = CONSTANTS) -> float:
    """kappa = sqrt(2 mu V0) / hbar in 1/m."""
    v_j = V0_kcalmol * c.joule_per_kcalmol_molecule
    return math.sqrt(2.0 * c.m_proton * v_j) / c.hbar


def tunneling_probability(p: BarrierParams, c: PhysicalConstants = CONSTANTS) -> TransferProbabilities:
    return transfer_probabilities(p.V0, p.w, c)


def transfer_probabilities(V0_kcalmol: float, width_A: float, c: PhysicalConstants = CONSTANTS):
    """Rectangular-barrier WKB tunnelling plus Boltzmann over-barrier channel."""
    if not (V0_kcalmol > 0 and math.isfinite(V0_kcalmol)):
        raise ValueError(f"barrier height must be positive, got {V0_kcalmol}")
    if not (width_A >= 0 and math.isfinite(width_A)):
        raise ValueError(f"barrier width must be non-negative, got {width_A}")
    kappa = decay_constant(V0_kcalmol, c)
    ln_tunnel = -2.0 * (width_A * 1e-10) * kappa
    ln_thermal = -(V0_kcalmol * c.joule_per_kcalmol_molecule) / (c.k_B * c.T_body)
    return TransferProbabilities(ln_tunnel, ln_thermal, kappa)


def log10_rqas(mutant: TransferProbabilities, wildtype: TransferProbabilities) -> float:
    return (mutant.ln_P_total - wildtype.ln_P_total) / LN10


def rqas(mutant: TransferProbabilities, wildtype: TransferProbabilities) -> float:
    return 10.0 ** log10_rqas(mutant, wildtype)


def parametric_kinetics(rows, c: PhysicalConstants = CONSTANTS) -> list[TransferProbabilities]:
    """Kinetics straight from tabulated ``(variant, V0 kcal/mol, width A)`` rows."""
    return [transfer_probabilities(v0, width, c) for _, v0, width in rows]


def curve_to_json(curve: PESCurve) -> str:
    return json.dumps(curve.to_dict())
