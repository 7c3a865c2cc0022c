"""Closed-shell Hartree-Fock and (4e, 4o) active-space reduction."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .integrals import IntegralTables

log = logging.getLogger(__name__)


class LinearDependencyError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScfOptions:
    max_iter: int = 200
    density_damping: float = 0.3
    energy_threshold: float = 1e-8
    density_threshold: float = 1e-6
    diis: bool = True
    diis_space: int = 6


@dataclass(frozen=True)
class ScfResult:
    mo_coefficients: np.ndarray
    mo_energies: np.ndarray
    E_total: float
    E_electronic: float
    converged: bool
    n_iterations: int
    n_electrons: int
    density: np.ndarray = field(repr=False)
    energy_history: tuple = field(default=(), repr=False)

    @property
    def n_occupied(self) -> int:
        return self.n_electrons // 2


def _orthogonalizer(S: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(S)
    if w.min() <= 0 or w.max() / w.min() > 1e10:
        raise LinearDependencyError(f"overlap matrix ill-conditioned (cond = {w.max() / w.min():.3e})")
    return v @ np.diag(w**-0.5) @ v.T


def _diagonalize(F: np.ndarray, X: np.ndarray):
    e, c = np.linalg.eigh(X.T @ F @ X)
    return e, X @ c


def _fock(h: np.ndarray, eri_chem: np.ndarray, D: np.ndarray) -> np.ndarray:
    # D is the closed-shell density sum_i^{occ} 2 C_mi C_ni
    J = np.einsum("pqrs,rs->pq", eri_chem, D)
    K = np.einsum("prqs,rs->pq", eri_chem, D)
    return h + J - 0.5 * K


def run_rhf(
    tables: IntegralTables,
    n_electrons: int,
    opts: ScfOptions | None = None,
    guess_density: np.ndarray | None = None,
) -> ScfResult:
    """Roothaan iterations from a core-Hamiltonian guess.

    Damping mixes the new density with the previous one; with ``opts.diis`` the
    Fock matrix is extrapolated instead and damping is ignored. Non-convergence
    is reported through ``converged=False``, never raised.
    """
    opts = opts or ScfOptions()
    if n_electrons % 2:
        raise ValueError("closed-shell RHF needs an even electron count")
    n_occ = n_electrons // 2
    h = tables.h_core
    eri_chem = tables.ERI.transpose(0, 2, 1, 3)
    S = tables.S
    X = _orthogonalizer(S)
    if n_occ > S.shape[0]:
        raise ValueError("more occupied orbitals than basis functions")

    def density(C):
        Co = C[:, :n_occ]
        return 2.0 * Co @ Co.T

    if guess_density is None:
        eps, C = _diagonalize(h, X)
        D = density(C)
    else:
        D = np.array(guess_density, dtype=float)
    E_old = None
    history = []
    fock_hist: list = []
    err_hist: list = []
    converged = False
    it = 0
    for it in range(1, opts.max_iter + 1):
        F = _fock(h, eri_chem, D)
        E_el = 0.5 * float(np.sum(D * (h + F)))
        history.append(E_el + tables.E_nn)
        F_use = F
        if opts.diis:
            err = F @ D @ S - S @ D @ F
            fock_hist.append(F)
            err_hist.append(err)
            del fock_hist[: -opts.diis_space]
            del err_hist[: -opts.diis_space]
            if len(fock_hist) > 1:
                F_use = _diis_extrapolate(fock_hist, err_hist)
        eps, C = _diagonalize(F_use, X)
        D_new = density(C)
        if not opts.diis and opts.density_damping > 0 and it > 1:
            D_new = (1 - opts.density_damping) * D_new + opts.density_damping * D
        dD = float(np.max(np.abs(D_new - D)))
        dE = abs(E_el - E_old) if E_old is not None else np.inf
        D, E_old = D_new, E_el
        if dE < opts.energy_threshold and dD < opts.density_threshold:
            converged = True
            break

    # final consistent orbitals from the converged density
    F = _fock(h, eri_chem, D)
    eps, C = _diagonalize(F, X)
    E_el = 0.5 * float(np.sum(D * (h + F)))
    if not converged:
        log.warning("RHF not converged after %d iterations", it)
    return ScfResult(
        mo_coefficients=C,
        mo_energies=eps,
        E_total=E_el + tables.E_nn,
        E_electronic=E_el,
        converged=converged,
        n_iterations=it,
        n_electrons=n_electrons,
        density=D,
        energy_history=tuple(history),
    )


def _diis_extrapolate(focks, errs) -> np.ndarray:
    m = len(focks)
    B = -np.ones((m + 1, m + 1))
    B[m, m] = 0.0
    for i in range(m):
        for j in range(m):
            B[i, j] = float(np.sum(errs[i] * errs[j]))
    rhs = np.zeros(m + 1)
    rhs[m] = -1.0
    try:
        c = np.linalg.solve(B, rhs)[:m]
    except np.linalg.LinAlgError:
        return focks[-1]
    return sum(ci * Fi for ci, Fi in zip(c, focks))


# --- active space --------------------------------------------------------------


@dataclass(frozen=True)
class ActiveSpaceIntegrals:
    h_eff: np.ndarray
    g: np.ndarray  # physicists' <pq|rs> over active orbitals
    E_frozen: float
    n_active_electrons: int = 4
    n_active_orbitals: int = 4
    active_orbitals: tuple = ()
    core_orbitals: tuple = ()
    selection: str = "frontier"

    def rotated(self, U: np.ndarray) -> "ActiveSpaceIntegrals":
        """Apply an orthogonal rotation within the active block."""
        h = U.T @ self.h_eff @ U
        g = np.einsum("pqrs,pa,qb,rc,sd->abcd", self.g, U, U, U, U, optimize=True)
        return ActiveSpaceIntegrals(
            h, g, self.E_frozen, self.n_active_electrons, self.n_active_orbitals,
            self.active_orbitals, self.core_orbitals, self.selection,
        )

    def metadata(self) -> dict:
        return {
            "active_orbitals": list(self.active_orbitals),
            "core_orbitals": list(self.core_orbitals),
            "selection": self.selection,
            "E_frozen": self.E_frozen,
            "n_active_electrons": self.n_active_electrons,
            "n_active_orbitals": self.n_active_orbitals,
        }


def transform_eri(eri_phys: np.ndarray, C: np.ndarray) -> np.ndarray:
    """AO <pq|rs> -> MO, one index at a time."""
    g = np.einsum("pqrs,pa->aqrs", eri_phys, C, optimize=True)
    g = np.einsum("aqrs,qb->abrs", g, C, optimize=True)
    g = np.einsum("abrs,rc->abcs", g, C, optimize=True)
    return np.einsum("abcs,sd->abcd", g, C, optimize=True)


def select_active_space(
    scf: ScfResult,
    tables: IntegralTables,
    n_active_electrons: int = 4,
    n_active_orbitals: int = 4,
) -> ActiveSpaceIntegrals:
    """Frontier (HOMO-1, HOMO, LUMO, LUMO+1) active space with a frozen core."""
    if not scf.converged:
        raise ValueError("active-space reduction requires a converged SCF")
    n_mo = scf.mo_coefficients.shape[1]
    n_occ = scf.n_occupied
    n_act_occ = n_active_electrons // 2
    n_virt = n_mo - n_occ
    want_virt = n_active_orbitals - n_act_occ
    selection = "frontier"
    if n_virt < want_virt:
        # shift the window down so it still spans the frontier
        want_virt = n_virt
        n_act_occ = n_active_orbitals - n_virt
        selection = f"frontier-fallback ({n_virt} virtuals available)"
        log.warning("active space: only %d virtual orbitals, using %s", n_virt, selection)
    first = n_occ - n_act_occ
    active = tuple(range(first, n_occ + want_virt))
    core = tuple(range(first))
    n_core_elec = 2 * len(core)
    n_act_elec = scf.n_electrons - n_core_elec

    C = scf.mo_coefficients
    h_mo = C.T @ tables.h_core @ C
    g_mo = transform_eri(tables.ERI, C)

    h_eff = h_mo[np.ix_(active, active)].copy()
    E_frozen = tables.E_nn
    for i in core:
        h_eff += 2 * g_mo[np.ix_(active, [i], active, [i])][:, 0, :, 0]
        h_eff -= g_mo[np.ix_(active, [i], [i], active)][:, 0, 0, :]
        E_frozen += 2 * h_mo[i, i]
        for j in core:
            E_frozen += 2 * g_mo[i, j, i, j] - g_mo[i, j, j, i]
    g_act = g_mo[np.ix_(active, active, active, active)].copy()
    return ActiveSpaceIntegrals(
        h_eff=0.5 * (h_eff + h_eff.T),
        g=g_act,
        E_frozen=float(E_frozen),
        n_active_electrons=n_act_elec,
        n_active_orbitals=len(active),
        active_orbitals=active,
        core_orbitals=core,
        selection=selection,
    )


def active_hf_energy(asi: ActiveSpaceIntegrals) -> float:
    """Closed-shell determinant energy inside the active space, plus E_frozen."""
    occ = range(asi.n_active_electrons // 2)
    e = asi.E_frozen
    for i in occ:
        e += 2 * asi.h_eff[i, i]
        for j in occ:
            e += 2 * asi.g[i, j, i, j] - asi.g[i, j, j, i]
    return float(e)
