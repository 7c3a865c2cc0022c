"""Dense statevector simulator, hardware-efficient ansatz and Adam-driven VQE.

Basis-state index bit ``q`` is qubit ``q``. ``RY(t) = [[cos t/2, -sin t/2],
[sin t/2, cos t/2]]`` so ``RY(pi)|0> = |1>`` and ``RY(pi)|1> = -|0>``.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .qubit import PauliSum

# process-wide tallies, used to verify cache behaviour
EVALUATIONS: Counter = Counter()


class VqeDivergence(FloatingPointError):
    def __init__(self, iteration: int, message: str = "non-finite energy"):
        super().__init__(f"{message} at iteration {iteration}")
        self.iteration = iteration


def _n_qubits(state: np.ndarray) -> int:
    n = state.size.bit_length() - 1
    if 1 << n != state.size:
        raise ValueError("state length is not a power of two")
    return n


def _check_qubit(q: int, n: int):
    if not 0 <= q < n:
        raise IndexError(f"qubit {q} out of range for {n} qubits")


def basis_state(n_qubits: int, bits: int = 0) -> np.ndarray:
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[bits] = 1.0
    return psi


def apply_ry(state: np.ndarray, qubit: int, angle: float) -> np.ndarray:
    n = _n_qubits(state)
    _check_qubit(qubit, n)
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    v = state.reshape(1 << (n - qubit - 1), 2, 1 << qubit)
    out = np.empty_like(v)
    out[:, 0, :] = c * v[:, 0, :] - s * v[:, 1, :]
    out[:, 1, :] = s * v[:, 0, :] + c * v[:, 1, :]
    return out.reshape(-1)


def apply_x(state: np.ndarray, qubit: int) -> np.ndarray:
    n = _n_qubits(state)
    _check_qubit(qubit, n)
    return state[np.arange(state.size) ^ (1 << qubit)]


@lru_cache(maxsize=None)
def _cnot_permutation(n: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(1 << n)
    return idx ^ (((idx >> control) & 1) << target)


def apply_cnot(state: np.ndarray, control: int, target: int) -> np.ndarray:
    n = _n_qubits(state)
    _check_qubit(control, n)
    _check_qubit(target, n)
    if control == target:
        raise ValueError("control and target must differ")
    return state[_cnot_permutation(n, control, target)]


@dataclass(frozen=True)
class AnsatzSpec:
    """RY layer on every qubit, then CNOT chain q -> q+1, repeated ``n_layers`` times."""

    n_qubits: int = 8
    n_layers: int = 3
    initial_bitstring: int = 0
    final_rotation: bool = False

    @property
    def n_params(self) -> int:
        return self.n_qubits * (self.n_layers + int(self.final_rotation))


def _cnot_chain_bits(bits: int, n: int) -> int:
    for q in range(n - 1):
        if (bits >> q) & 1:
            bits ^= 1 << (q + 1)
    return bits


def _inverse_cnot_chain_bits(bits: int, n: int) -> int:
    for q in reversed(range(n - 1)):
        if (bits >> q) & 1:
            bits ^= 1 << (q + 1)
    return bits


def reference_preimage(target_bits: int, n_qubits: int, n_layers: int) -> int:
    """Bitstring that the ansatz at theta = 0 maps onto ``target_bits``.

    At theta = 0 every RY is the identity and each CNOT chain only permutes
    basis states, so the preimage is found by undoing the chains classically.
    """
    bits = target_bits
    for _ in range(n_layers):
        bits = _inverse_cnot_chain_bits(bits, n_qubits)
    return bits


def hea_for_reference(n_qubits: int, n_layers: int, reference_bits: int, final_rotation=False) -> AnsatzSpec:
    return AnsatzSpec(n_qubits, n_layers, reference_preimage(reference_bits, n_qubits, n_layers), final_rotation)


def prepare_ansatz(spec: AnsatzSpec, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.n_params,):
        raise ValueError(f"expected {spec.n_params} parameters, got {theta.size}")
    n = spec.n_qubits
    state = basis_state(n)
    for q in range(n):
        if (spec.initial_bitstring >> q) & 1:
            state = apply_x(state, q)
    k = 0
    for _ in range(spec.n_layers):
        for q in range(n):
            state = apply_ry(state, q, theta[k])
            k += 1
        for q in range(n - 1):
            state = apply_cnot(state, q, q + 1)
    if spec.final_rotation:
        for q in range(n):
            state = apply_ry(state, q, theta[k])
            k += 1
    return state


def expectation(h: PauliSum, state: np.ndarray) -> float:
    val = np.vdot(state, h.apply(state))
    if abs(val.imag) > 1e-10:
        raise ArithmeticError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


class _Energy:
    """Cached dense-matrix evaluator for one Hamiltonian/ansatz pair."""

    def __init__(self, h: PauliSum, spec: AnsatzSpec):
        self.matrix = h.to_matrix()
        self.spec = spec

    def __call__(self, theta) -> float:
        EVALUATIONS["energy"] += 1
        psi = prepare_ansatz(self.spec, theta)
        return float(np.vdot(psi, self.matrix @ psi).real)


def parameter_shift_gradient(h: PauliSum, spec: AnsatzSpec, theta, energy_fn=None) -> np.ndarray:
    """dE/dtheta_k = [E(theta_k + pi/2) - E(theta_k - pi/2)] / 2, exact for RY."""
    energy_fn = energy_fn or _Energy(h, spec)
    theta = np.asarray(theta, dtype=float)
    grad = np.empty_like(theta)
    for k in range(theta.size):
        shift = np.zeros_like(theta)
        shift[k] = math.pi / 2
        grad[k] = 0.5 * (energy_fn(theta + shift) - energy_fn(theta - shift))
    return grad


@dataclass
class AdamState:
    theta: np.ndarray
    step_size: float = 0.4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    m: np.ndarray = field(default=None)
    v: np.ndarray = field(default=None)
    t: int = 0

    def __post_init__(self):
        self.theta = np.array(self.theta, dtype=float)
        if self.m is None:
            self.m = np.zeros_like(self.theta)
        if self.v is None:
            self.v = np.zeros_like(self.theta)

    def step(self, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        self.theta = self.theta - self.step_size * m_hat / (np.sqrt(v_hat) + self.eps)
        return self.theta


@dataclass
class VqeTrace:
    energies: list
    gradient_norms: list
    final_theta: np.ndarray
    final_energy: float
    best_iteration: int
    exact_energy: float | None = None

    @property
    def gap_to_exact(self) -> float | None:
        return None if self.exact_energy is None else self.final_energy - self.exact_energy

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps({"iteration": i, "energy": e, "gradient_norm": g}) + "\n"
            for i, (e, g) in enumerate(zip(self.energies, self.gradient_norms))
        )


def initial_parameters(spec: AnsatzSpec, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(-0.01, 0.01, spec.n_params)


def run_vqe(
    h: PauliSum,
    spec: AnsatzSpec,
    iterations: int = 25,
    step_size: float = 0.4,
    seed: int = 0,
    return_best: bool = True,
    theta0=None,
    exact_energy: float | None = None,
) -> VqeTrace:
    """Minimise <psi(theta)|h|psi(theta)> with Adam and parameter-shift gradients.

    ``energies[k]`` is the energy at the parameters entering iteration ``k``.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    EVALUATIONS["vqe_runs"] += 1
    energy = _Energy(h, spec)
    theta = initial_parameters(spec, seed) if theta0 is None else np.array(theta0, dtype=float)
    opt = AdamState(theta, step_size=step_size)
    energies, gnorms = [], []
    best_e, best_theta, best_k = math.inf, opt.theta.copy(), 0
    for k in range(iterations):
        e = energy(opt.theta)
        if not math.isfinite(e):
            raise VqeDivergence(k)
        grad = parameter_shift_gradient(h, spec, opt.theta, energy)
        energies.append(e)
        gnorms.append(float(np.linalg.norm(grad)))
        if e < best_e:
            best_e, best_theta, best_k = e, opt.theta.copy(), k
        opt.step(grad)
    if return_best:
        final_theta, final_e = best_theta, best_e
    else:
        final_theta = opt.theta.copy()
        final_e = energy(final_theta)
        if not math.isfinite(final_e):
            raise VqeDivergence(iterations)
        best_k = iterations
    return VqeTrace(energies, gnorms, final_theta, final_e, best_k, exact_energy)
