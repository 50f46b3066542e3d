"""Dense quantum register simulation with synthesis and decomposition.

Layers, lowest first:

* linalg: complex matrices, Hilbert-Schmidt geometry, Hermitian spectra.
* algprob: density matrices, observables, events, measurement laws.
* qpu: n-qubit encodings, register observables, evolution, seeded sampling.
* gates: wire/controlled/two-level gates, circuits, text serialization.
* udecomp: factoring any unitary into N(N-1)/2 two-level gates.
* grover_rudolph: circuits loading a probability density into n qubits.
* cli: the qsim command-line tool wrapping all of the above.
"""

from . import algprob, cli, gates, grover_rudolph, linalg, qpu, udecomp

__version__ = "0.1.0"

__all__ = [
    "algprob",
    "cli",
    "gates",
    "grover_rudolph",
    "linalg",
    "qpu",
    "udecomp",
    "__version__",
]
