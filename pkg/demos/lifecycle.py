"""A complete cluster lifecycle in thirty-odd points.

Three standing bunches, a burst that emerges as its own cluster and
starves away, and a threshold shift that merges and later re-splits the
two loosest bunches.  Prints every structural event the engine reports
and what recycling did to the corpse.
"""

from streampeaks import EngineConfig, StreamEngine, StreamPoint


def pts(xs, t):
    return [StreamPoint((float(x),), float(t)) for x in xs]


def main() -> None:
    config = EngineConfig(r=1.0, a=0.8, lam=1.0, v=4.0, beta=0.12,
                          tau0=12.0, alpha=0.2, init_cell_count=3,
                          sweep_interval=6)
    engine = StreamEngine(config, dim=1)
    engine.initialize(pts([0, 0.1, -0.1, 10, 10.1, 9.9, 30, 30.1, 29.9], 0.0))
    print(f"initialized with {len(engine.space.cells)} cells, "
          f"tau starts at {engine.tau_state.tau}")

    feed = [
        pts([0, 10, 30], 0.5),                       # keep the bunches warm
        pts([100, 100.1, 99.9, 100.05, 0, 10], 1.0), # burst far away
    ]
    for t in (2.0, 3.0, 4.0, 5.0):                   # silence at x=100
        feed.append(pts([0, 0.1, 10, 10.1, 30, 30.1], t))
    for block in feed:
        for p in block:
            engine.process_point(p)

    print()
    for event in engine.log:
        if event.kind == "Adjust":
            continue
        print(f"  t={event.time:4.1f}  {event.kind:<10} "
              f"old={list(event.old_ids)} new={list(event.new_ids)}")
    print()

    counters = engine.counters()
    print(f"tau ended at {engine.tau_state.tau}")
    print(f"activations {counters['activations']}, "
          f"deactivations {counters['deactivations']}, "
          f"cells recycled {counters['recycled_cells']}")
    print(f"surviving cells: {sorted(engine.space.cells)} "
          "(the burst cell is gone)")


if __name__ == "__main__":
    main()
