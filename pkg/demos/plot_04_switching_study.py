"""
Opening switches
================

Random switching shows how the bus-branch picture falls apart as more
switches open.  Opening a switch can only split topology nodes, never merge
them.
"""

# %%
from cimegraph import graph, ntp, synth
from cimegraph.model import replace_switch_status

base = synth.synthesize_node_breaker(synth.builtin_case("ieee14"))
for fraction in (0.0, 0.05, 0.2, 0.5, 1.0):
    grid = synth.perturb_switches(base, fraction, seed=1)
    r = ntp.run_ntp(graph.build_vertex_graph(grid))
    live = sum(i.energized for i in r.islands)
    print(f"open {fraction:4.0%}: {len(r.nodes):4d} nodes {len(r.edges):3d} edges "
          f"{len(r.islands):4d} islands ({live} energized)")

# %%
# Splitting one substation: with two bus sections per substation the tie
# breaker chain joins the sections.  Opening it splits the bus.
tmpl = synth.SubstationTemplate(bus_sections=2)
grid = synth.synthesize_node_breaker(synth.builtin_case("ieee14"), tmpl)
ties = {(r.kind, r.id): False for r in grid.switches() if r.id.startswith("ieee14_S4.tie1.sw2")}
before = ntp.run_ntp(graph.build_mixed_graph(grid))
after = ntp.run_ntp(graph.build_mixed_graph(replace_switch_status(grid, ties)))
print("nodes before:", len(before.nodes), "after:", len(after.nodes))
