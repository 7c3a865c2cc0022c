"""Proton-tunnelling activity scores from a simulated 8-qubit VQE.

Pipeline: variant distance -> [O-H-O]- geometry -> STO-3G RHF -> (4e,4o)
active space -> Jordan-Wigner qubit Hamiltonian -> VQE PES scan -> barrier
-> WKB/thermal kinetics -> score relative to wild type.
"""

from .chem_core import CONSTANTS, PhysicalConstants, build_geometry, sto3g_basis
from .pes import (
    BarrierParams,
    PESCurve,
    ScanOptions,
    TransferProbabilities,
    extract_barrier,
    log10_rqas,
    rqas,
    scan_pes,
    transfer_probabilities,
    tunneling_probability,
)
from .pipeline import PipelineConfig, RQASResult, run_pipeline
from .report import ValidationReport, rank_variants, validate, validate_pairs
from .variants import VariantDataset, VariantRecord, builtin_dataset, load_dataset

__version__ = "0.1.0"

__all__ = [
    "CONSTANTS", "PhysicalConstants", "build_geometry", "sto3g_basis",
    "BarrierParams", "PESCurve", "ScanOptions", "TransferProbabilities", "extract_barrier",
    "log10_rqas", "rqas", "scan_pes", "transfer_probabilities", "tunneling_probability",
    "PipelineConfig", "RQASResult", "run_pipeline",
    "ValidationReport", "rank_variants", "validate", "validate_pairs",
    "VariantDataset", "VariantRecord", "builtin_dataset", "load_dataset",
]
