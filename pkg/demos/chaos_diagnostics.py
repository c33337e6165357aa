"""Out-of-time-order diagnostics from a single comb.

Run with ``python demos/chaos_diagnostics.py``. The out-of-time-order tensor
stores forward evolution, a perturbation slot and backward evolution; the
correlator, local-operator entanglement and dynamical entropy are all read
off from it.

Slot 1 holds the map ``rho -> Z rho`` (a left multiplication, not a channel),
slot 2 the unitary channel of ``X`` and the final effect is ``Z``, so the
printed correlator is ``tr(Z X(t) Z X(t)) / d`` on a maximally mixed input,
with ``X(t) = U^dagger X U``. It is -1 when ``X`` never reaches the system
(identity), +1 when the swap moves ``X`` onto the environment, and lands in
between for a generic unitary on two qubits.
"""

import numpy as np

from hoqo.analysis import identity_slot_choi, loe, otoc, qde
from hoqo.choi import choi_of_unitary
from hoqo.constructors import otot
from hoqo.rng import make_rng, random_unitary
from hoqo.tensor import operator

X = np.array([[0.0, 1.0], [1.0, 0.0]])
Z = np.diag([1.0, -1.0])
SWAP = np.eye(4)[[0, 2, 1, 3]]


def describe(name: str, u: np.ndarray) -> None:
    t = otot(u, np.eye(4) / 4, 2, 2)
    m = operator(Z.T, ["3i"], [2])
    v = choi_of_unitary(X, "2i", "2o").mat
    # Choi matrix of rho -> Z rho is |Z>><<1|
    p = operator(np.outer(Z.reshape(-1), np.eye(2).reshape(-1)), ["1o", "1i"], [2, 2])
    print(f"{name:<16} OTOC(Z, X, Z) = {otoc(t, m, v, p):+.4f}   "
          f"LOE(X) = {loe(t, v):.4f}   "
          f"LOE(1) = {loe(t, identity_slot_choi('2i', '2o', 2)):.4f}   "
          f"QDE = {qde(t.comb):.4f}")


def main() -> None:
    rng = make_rng(9)
    describe("identity", np.eye(4))
    describe("swap", SWAP)
    for n in range(3):
        describe(f"Haar random #{n + 1}", random_unitary(4, rng))


if __name__ == "__main__":
    main()
