"""
Timing the pipeline
===================

Median processing time on the IEEE 118-bus case and on a random
1500-substation case, for both graph strategies.  Numbers depend on the
machine; the interesting part is how they scale.
"""

# %%
import statistics
import time

from cimegraph import graph, ntp, synth


def median_ms(g, reps=5):
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        ntp.run_ntp(g)
        times.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(times)


for grid in (synth.synthesize_node_breaker(synth.builtin_case("ieee118")),
             synth.synthesize_node_breaker(synth.scaled_case(1500, seed=1))):
    for strategy in "AB":
        g = graph.build_graph(grid, strategy)
        s = graph.stats(g)
        print(f"{grid.section:>12} {strategy}: {s.vertex_count:6d} V {s.edge_count:6d} E "
              f"{median_ms(g):8.1f} ms")
