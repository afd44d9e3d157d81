"""End-to-end acceptance checks, one test per criterion.

Each test appends a PASS/FAIL line to ``conftest.ACCEPTANCE_LINES`` which
is echoed in the pytest terminal summary.
"""
import random
import statistics
import time

import pytest

from cimegraph import synth
from cimegraph.cime_io import Severity, parse_cime, serialize_cime
from cimegraph.cli import TOPOLOGY_FILES, diff_topology, read_topology, write_topology
from cimegraph.graph import build_graph, build_mixed_graph, build_vertex_graph, set_switch_status, stats, switch_ids
from cimegraph.ntp import oracle_partition, resolve_parallelism, run_ntp, substation_tp, topology_partition
from conftest import ACCEPTANCE_LINES
from helpers import random_document


def report(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def perturbed(model, seed):
    return synth.perturb_switches(model, random.Random(seed).random(), seed=seed)


@pytest.fixture(scope="module")
def configurations(ieee14_model, ieee118_model):
    """Both all-closed cases plus ten seeded perturbations."""
    configs = [("ieee14", ieee14_model), ("ieee118", ieee118_model)]
    for seed in range(10):
        base = ieee14_model if seed % 2 else ieee118_model
        configs.append((f"{base.section}-seed{seed}", perturbed(base, seed)))
    return configs


def test_1_parser_round_trip(data_dir):
    rng = random.Random(1)
    docs = [random_document(rng) for _ in range(60)]
    docs.append(parse_cime((data_dir / "skeleton.cime").read_text())[0])
    t0 = time.perf_counter()
    bad = 0
    for doc in docs:
        again, diags = parse_cime(serialize_cime(doc))
        if again != doc or any(d.severity is Severity.ERROR for d in diags):
            bad += 1
    elapsed = time.perf_counter() - t0
    report(1, "parser round-trip", bad == 0 and elapsed < 1.0,
           f"{len(docs) - bad}/{len(docs)} documents equal, {elapsed * 1e3:.1f} ms (limit 1000 ms)")


def test_2_switch_count_identity(ieee14_model, ieee118_model):
    parts, ok = [], True
    for m in (ieee14_model, ieee118_model):
        a, b = stats(build_vertex_graph(m)), stats(build_mixed_graph(m))
        dv, de = a.vertex_count - b.vertex_count, a.edge_count - b.edge_count
        ok &= dv == de == m.switch_count
        parts.append(f"{m.section} V {a.vertex_count}-{b.vertex_count}={dv}, "
                     f"E {a.edge_count}-{b.edge_count}={de}, switches {m.switch_count}")
    report(2, "switch-count identity", ok, "; ".join(parts))


def test_3_oracle_equivalence(ieee14_model, ieee118_model):
    t0 = time.perf_counter()
    checked, mismatches = 0, 0
    for base in (ieee14_model, ieee118_model):
        for seed in range(100):
            m = perturbed(base, seed)
            nodes = substation_tp(build_vertex_graph(m))
            checked += 1
            mismatches += topology_partition(nodes) != oracle_partition(m)
    elapsed = time.perf_counter() - t0
    report(3, "oracle equivalence", mismatches == 0 and elapsed < 30,
           f"{checked - mismatches}/{checked} configurations match, {elapsed:.1f} s (limit 30 s)")


def test_4_recovery(ieee14, ieee118, ieee14_model, ieee118_model):
    parts, ok = [], True
    for case, m in ((ieee14, ieee14_model), (ieee118, ieee118_model)):
        for strategy in "AB":
            r = run_ntp(build_graph(m, strategy))
            energized = sum(i.energized for i in r.islands)
            ok &= (len(r.nodes), len(r.edges), len(r.islands), energized) == (
                len(case.buses), len(case.branches), 1, 1)
        parts.append(f"{case.name} {len(r.nodes)} nodes/{len(r.edges)} edges/{len(r.islands)} island "
                     f"(case {len(case.buses)}/{len(case.branches)})")
    ok &= (len(ieee14.buses), len(ieee14.branches)) == (14, 20) and len(ieee118.buses) == 118
    report(4, "recovery", ok, "; ".join(parts))


def test_5_determinism_under_parallelism(configurations, tmp_path):
    # "max" is one worker per CPU; 8 is added so threads are exercised on small machines
    levels = tuple(sorted({1, 2, resolve_parallelism("max"), 8}))
    differing = []
    for name, m in configurations:
        g = build_mixed_graph(m)
        blobs = []
        for p in levels:
            out = tmp_path / f"{name}-{p}"
            write_topology(run_ntp(g, p), out)
            blobs.append(tuple((out / f).read_bytes() for f in TOPOLOGY_FILES))
        if len(set(blobs)) != 1:
            differing.append(name)
    report(5, "determinism under parallelism", not differing,
           f"{len(configurations) - len(differing)}/{len(configurations)} configurations byte-identical "
           f"at parallelism {levels}")


def test_6_strategy_independence(configurations, tmp_path):
    configs = list(configurations)
    for seed in range(20):
        rng = random.Random(seed)
        case = synth.scaled_case(rng.randint(2, 40), seed=seed)
        tmpl = synth.SubstationTemplate(bus_sections=rng.randint(1, 3))
        configs.append((f"scaled-{seed}", perturbed(synth.synthesize_node_breaker(case, tmpl), seed)))
    failures = []
    for name, m in configs:
        dirs = []
        for strategy in "AB":
            out = tmp_path / f"{name}-{strategy}"
            write_topology(run_ntp(build_graph(m, strategy)), out)
            dirs.append(out)
        if diff_topology(read_topology(dirs[0]), read_topology(dirs[1])):
            failures.append(name)
    report(6, "strategy independence", not failures,
           f"{len(configs) - len(failures)}/{len(configs)} configurations diff-equivalent")


def test_7_monotonicity(ieee14_model, ieee118_model):
    rng = random.Random(7)
    closures = openings = violations = 0
    while closures < 100 or openings < 100:
        base = ieee14_model if rng.random() < 0.7 else ieee118_model
        m = perturbed(base, rng.randrange(10**6))
        g = build_vertex_graph(m)
        before = len(substation_tp(g))
        sid = rng.choice(switch_ids(g))
        was_closed = g.vertices[sid].closed
        set_switch_status(g, sid, not was_closed)
        after = len(substation_tp(g))
        if was_closed:
            openings += 1
            violations += after < before
        else:
            closures += 1
            violations += after > before
    report(7, "monotonicity", violations == 0,
           f"{closures} closures, {openings} openings, {violations} violations")


def _median_ms(g, repetitions):
    times = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        run_ntp(g)
        times.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(times)


def test_8_performance(ieee118_model):
    large = synth.synthesize_node_breaker(synth.scaled_case(1500, seed=8))
    medians = {}
    for label, m, reps in (("ieee118", ieee118_model, 11), ("scaled1500", large, 5)):
        for strategy in "AB":
            medians[label, strategy] = _median_ms(build_graph(m, strategy), reps)
    ok = max(medians["ieee118", s] for s in "AB") < 100 and max(medians["scaled1500", s] for s in "AB") < 2000
    detail = ", ".join(f"{label} {s} {v:.1f} ms" for (label, s), v in medians.items())
    report(8, "performance sanity", ok,
           f"{detail} (limits 100 ms / 2000 ms; {len(large.substations)} substations)")
