"""
Two ways to store a substation as a graph
=========================================

Strategy A turns every object, switches included, into a vertex.  Strategy
B turns breakers and disconnectors into edges between connectivity nodes.
Every switch removed from the vertex set also removes one edge, so the two
graphs differ by the switch count in both vertices and edges.
"""

# %%
from cimegraph import graph, synth

case = synth.builtin_case("ieee14")
grid = synth.synthesize_node_breaker(case)
print(f"{case.name}: {len(case.buses)} buses, {len(case.branches)} branches")
print("switches after synthesis:", grid.switch_count)

# %%
a = graph.stats(graph.build_vertex_graph(grid))
b = graph.stats(graph.build_mixed_graph(grid))
print("strategy A:", a)
print("strategy B:", b)
print("vertex difference:", a.vertex_count - b.vertex_count)
print("edge difference:  ", a.edge_count - b.edge_count)

# %%
# Switch status lives on the switch vertex (A) or the switch edge (B).  The
# same id addresses it in both.
g = graph.build_mixed_graph(grid)
sid = graph.switch_ids(g)[0]
graph.set_switch_status(g, sid, False)
print(sid, "closed =", g.edges[sid].closed)
