"""qdistil: exact two-qubit entanglement distillation.

Density matrices are plain 4x4 complex numpy arrays; see qdistil.qstate
for the basis conventions shared by every module.
"""
from . import entanglement, filtering, noise, protocols, pumping, qstate, scheduling
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = [
    "entanglement",
    "filtering",
    "noise",
    "protocols",
    "pumping",
    "qstate",
    "scheduling",
    "KERNEL_BACKEND",
    "__version__",
]
