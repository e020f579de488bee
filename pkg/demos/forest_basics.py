"""Build a tiny dependency forest by hand and read clusters off it.

Nine cells in three bunches on a line.  Each cell links to its nearest
denser neighbor; cutting links longer than tau leaves one subtree per
density mountain.
"""

from streampeaks import CellSpace, DecayParams, DPTree, StreamPoint


def main() -> None:
    params = DecayParams(a=0.8, lam=1.0, v=4.0, beta=0.12)
    space = CellSpace(params, r=1.0, dim=1)

    bunches = {0.0: 5.0, 1.5: 7.0, 3.0: 4.0,      # mountain around x=1.5
               20.0: 6.0, 21.5: 9.0, 23.0: 3.0,   # mountain around x=21.5
               50.0: 2.5, 51.5: 4.5, 53.0: 2.0}   # mountain around x=51.5
    for x, rho in bunches.items():
        space.assign_point(StreamPoint.of((x,), 0.0))
    for cell, rho in zip(space.cells.values(), bunches.values()):
        cell.active = True
        cell.rho_last = rho

    tree = DPTree.build(space)
    print("cell  seed   density  links to      delta")
    for cid in tree.nodes():
        cell = space.cell(cid)
        parent = tree.parent[cid]
        target = f"cell {parent}" if parent is not None else "nothing (peak)"
        print(f"  {cid}   {cell.seed[0]:5.1f}  {cell.rho_last:7.1f}"
              f"  {target:<13} {tree.delta[cid]:7.1f}")
    print()

    for tau in (2.0, 17.0, 30.0):
        snap = tree.extract_clusters(tau, t=0.0)
        groups = [f"{c.root}:{list(c.members)}" for c in snap.clusters]
        print(f"tau = {tau:4.1f} cuts longer links -> "
              f"{len(snap.clusters)} cluster(s)  {' '.join(groups)}")


if __name__ == "__main__":
    main()
