"""How well can k uses of an unknown unitary be turned into something else?

Run with ``python demos/unitary_transformations.py``. Each SDP optimises a
supermap against a Clifford-averaged performance operator; the printed
reference values come from the closed-form table.
"""

from hoqo.optimize import closed_form, optimal_fidelity, performance_operator


def main() -> None:
    print("task           d  k  strategy    SDP        reference")
    rows = [
        ("identity", 2, 1, "parallel", 1.0),
        ("conjugation", 2, 1, "parallel", float(closed_form("conjugation_fidelity", 2, 1))),
        ("conjugation", 3, 1, "parallel", float(closed_form("conjugation_fidelity", 3, 1))),
        ("transposition", 2, 1, "parallel", None),
        ("transposition", 2, 2, "parallel", None),
        ("transposition", 2, 2, "sequential", None),
    ]
    for task, d, k, strategy, ref in rows:
        r = optimal_fidelity(task, d, k, strategy)
        ref_text = f"{ref:.6f}" if ref is not None else "-"
        print(f"{task:<14} {d}  {k}  {strategy:<10}  {r.value:.6f}   {ref_text}")

    # Haar sampling converges to the exact design average.
    exact = performance_operator("transposition", 2, 1)
    for n in (1_000, 10_000, 100_000):
        mc = performance_operator("transposition", 2, 1, method="montecarlo", samples=n, seed=3)
        err = abs(exact.mat.data - mc.mat.data).max()
        print(f"Monte Carlo with {n:>6} samples: max entry error {err:.2e}, "
              f"typical standard error {mc.stderr.max():.2e}")

    print("\nprobabilistic reference values")
    print("  transposition weight (d=2, k=4):", closed_form("transposition_probability", 2, 4))
    print("  parallel transposition success (d=2, k=4):",
          closed_form("transposition_success", 2, 4))
    for d in (2, 3, 4):
        print(f"  exact conjugation for d={d} needs k={d - 1}:",
              closed_form("conjugation_probability", d, d - 1))


if __name__ == "__main__":
    main()
