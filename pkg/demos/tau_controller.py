"""How the distance threshold tau is chosen and re-chosen.

The controller scores every candidate cut with a two-term objective:
alpha rewards separation (cut links long), 1-alpha rewards cohesion
(kept links short).  Learning inverts that: given an operator's initial
tau, find the alpha that would have picked it.
"""

from streampeaks import learn_alpha, select_tau
from streampeaks.tau import candidate_taus, objective


def main() -> None:
    # two tight bunches of link lengths and one long bridge
    deltas = [0.4, 0.5, 0.5, 0.6, 2.0, 2.2, 9.0]

    print("link lengths:", deltas)
    print("candidate cuts:", candidate_taus(deltas))
    print()

    print("alpha   chosen tau   (what the objective prefers)")
    for alpha in (0.05, 0.3, 0.6, 0.9):
        tau = select_tau(alpha, deltas)
        print(f" {alpha:4.2f}   {tau:6.2f}")
    print()

    print("objective landscape at alpha=0.6:")
    for tau in candidate_taus(deltas):
        score = objective(0.6, tau, deltas)
        cut = sum(1 for d in deltas if d > tau)
        print(f"  tau={tau:4.2f}  cuts {cut} link(s)  F={score:.4f}")
    print()

    tau0 = 2.2
    alpha = learn_alpha(deltas, tau0)
    print(f"an operator who initialized with tau0={tau0} "
          f"implies alpha={alpha}")
    print(f"re-selection with that alpha lands on "
          f"{select_tau(alpha, deltas)} again")


if __name__ == "__main__":
    main()
