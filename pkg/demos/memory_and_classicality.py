"""Memory effects in multi-time processes.

Run with ``python demos/memory_and_classicality.py``. A qubit system that
swaps places with a qubit environment has perfect memory; a chain of
independent channels has none. The Stern-Gerlach sequence shows that
statistics of sequential quantum measurements need not be Kolmogorov
consistent.
"""

import numpy as np

from hoqo.analysis import (
    PartitionFMH,
    causal_break_tester,
    classicality_check,
    markov_order_check,
    nonmarkovianity,
    sequential_probabilities,
)
from hoqo.constructors import (
    SECircuit,
    comb_dilation,
    comb_from_circuit,
    random_markov_comb,
    random_se_circuit,
    stern_gerlach_comb,
)
from hoqo.rng import make_rng
from hoqo.tensor import distance

SWAP = np.eye(4)[[0, 2, 1, 3]]
CNOT_SE = np.eye(4)[[0, 1, 3, 2]]
CNOT_ES = np.eye(4)[[0, 3, 2, 1]]
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)


def main() -> None:
    rng = make_rng(5)
    markov = random_markov_comb(2, 2, rng)
    print(f"independent channels: non-Markovianity {nonmarkovianity(markov):.2e} bits")

    eta = np.kron(np.diag([1.0, 0.0]), np.eye(2) / 2)
    swap = comb_from_circuit(SECircuit(2, 2, eta, (SWAP, SWAP)))
    print(f"SWAP with the environment: {nonmarkovianity(swap):.6f} bits "
          "(one qubit memory line, maximally correlated)")

    generic = comb_from_circuit(random_se_circuit(2, 2, 2, rng))
    print(f"random joint unitaries: {nonmarkovianity(generic):.4f} bits")

    # Markov order: does breaking slot 2 decouple slot 3 from slot 1?
    part = PartitionFMH(future=(3,), memory=(2,), history=(1,))
    ok = markov_order_check(markov, causal_break_tester(markov, [2]), part)
    print("\nMarkov order 1 for independent channels:", ok.verdict.passed)
    keeper = comb_from_circuit(SECircuit(2, 2, np.diag([1.0, 0, 0, 0]),
                                         (CNOT_ES @ CNOT_SE, CNOT_ES)))
    bad = markov_order_check(keeper, causal_break_tester(keeper, [2]), part)
    print("Markov order 1 when the environment stores the first output:",
          bad.verdict.passed, f"(largest correlation {bad.verdict.magnitude:.3f})")

    # Every comb has a sequential circuit realisation with minimal memory.
    dil = comb_dilation(generic)
    print(f"\nminimal dilation of the random comb: memory dimensions {dil.aux_dims}, "
          f"reconstruction error {distance(dil.reconstruct(), generic.mat):.1e}")

    # Stern-Gerlach: measure z, then x, then z on a |+> input.
    sg = stern_gerlach_comb()
    basis = [np.eye(2), HADAMARD, np.eye(2)]
    joint = sequential_probabilities(sg, basis)
    skip = sequential_probabilities(sg, basis, identity_slots=(2,))
    print("\nStern-Gerlach joint probabilities:",
          sorted({round(p, 12) for p in joint.values()}))
    print(f"P(down at t3, down at t1) without the middle measurement: {skip[(1, 1)]:.3f}")
    print(f"the same event summed over middle outcomes: {joint[(1, 0, 1)] + joint[(1, 1, 1)]:.3f}")
    res = classicality_check(sg, basis)
    print("Kolmogorov consistent:", res.verdict.passed,
          f"(worst gap {res.max_discrepancy:.3f} on slots {res.worst['subset']})")


if __name__ == "__main__":
    main()
