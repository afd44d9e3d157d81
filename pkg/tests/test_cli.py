import csv

import pytest

from cimegraph import cime_io, model, synth
from cimegraph.cli import TOPOLOGY_FILES, main, read_topology


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))[1:]


@pytest.fixture(scope="module")
def ieee14_file(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "ieee14.cime"
    assert main(["synth", "ieee14", "--out", str(out)]) == 0
    return out


def test_synth_from_case_file(tmp_path, data_dir, capsys):
    out = tmp_path / "two.cime"
    assert main(["synth", str(data_dir / "two_bus.case"), "--out", str(out)]) == 0
    assert "10 switches" in capsys.readouterr().out
    doc, diags = cime_io.read_cime(out)
    assert diags == []
    m, report = model.bind_model(doc)
    assert report.errors == [] and m.switch_count == 10


def test_synth_with_template_and_perturbation(tmp_path):
    tmpl = tmp_path / "t.tmpl"
    tmpl.write_text("branch_chain = breaker\ndevice_chain = breaker\n")
    out = tmp_path / "x.cime"
    assert main(["synth", "ieee14", "--template", str(tmpl), "--seed", "2",
                 "--open-fraction", "0.5", "--out", str(out)]) == 0
    m, _ = model.bind_model(cime_io.read_cime(out)[0])
    assert m.switch_count == 2 * 20 + 16
    assert sum(not r.closed for r in m.switches()) == 28


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main([]) == 2
    assert main(["ntp", str(tmp_path / "missing.cime"), "--out", str(tmp_path)]) == 2
    assert main(["ntp", "x", "--out", "y", "--parallelism", "0"]) == 2
    assert main(["synth", "nosuchcase", "--out", str(tmp_path / "o")]) == 2
    assert main(["export", "x", "--out", "y", "--strategy", "c"]) == 2


def test_pipeline_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.cime"
    bad.write_text("<Bus::x>\n@ id name st nd\n# B1 b S1\n</Bus::x>\n")
    assert main(["ntp", str(bad), "--out", str(tmp_path / "o")]) == 1
    dup = tmp_path / "dup.cime"
    dup.write_text("<Bus::x>\n@ id name st nd\n# B1 b S1 N1\n# B1 b S1 N2\n</Bus::x>\n")
    assert main(["export", str(dup), "--out", str(tmp_path / "o")]) == 1
    assert "duplicate" in capsys.readouterr().err
    badcase = tmp_path / "bad.case"
    badcase.write_text("[bus]\nid gen load\n1 5 0\n")
    assert main(["synth", str(badcase), "--out", str(tmp_path / "o.cime")]) == 1


def test_export_row_counts(ieee14_file, tmp_path):
    counts = {}
    for strategy in "ab":
        out = tmp_path / strategy
        assert main(["export", str(ieee14_file), "--out", str(out), "--strategy", strategy]) == 0
        v = sum(len(rows(p)) for p in out.glob("vertex_*.csv"))
        e = sum(len(rows(p)) for p in out.glob("edge_*.csv"))
        counts[strategy] = (v, e)
    assert counts["a"] == (368, 374)
    assert counts["b"] == (216, 222)
    assert len(rows(tmp_path / "b" / "edge_breaker.csv")) == 2 * 20 + 16
    assert not (tmp_path / "a" / "edge_breaker.csv").exists()


def test_export_empty_document_gives_header_only_files(tmp_path):
    empty = tmp_path / "empty.cime"
    empty.write_text("")
    out = tmp_path / "o"
    assert main(["export", str(empty), "--out", str(out), "--strategy", "a"]) == 0
    files = sorted(out.iterdir())
    assert files and all(len(p.read_text().splitlines()) == 1 for p in files)
    assert (out / "vertex_breaker.csv").exists()


def test_ntp_outputs(ieee14_file, tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["ntp", str(ieee14_file), "--out", str(out), "--format", "delim"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].split("\t")[:3] == ["14", "20", "1"]
    assert len(rows(out / "toponodes.csv")) == 14
    assert len(rows(out / "topoedges.csv")) == 20
    assert rows(out / "islands.csv")[0][1] == "1"
    assert [r[0] for r in rows(out / "timing.csv")] == ["load", "substation_tp", "network_tp", "islands"]


def test_ntp_files_identical_across_parallelism_and_strategy(ieee14_file, tmp_path):
    outs = []
    for strategy, par in (("a", "1"), ("a", "8"), ("b", "1"), ("b", "auto")):
        out = tmp_path / f"{strategy}{par}"
        assert main(["ntp", str(ieee14_file), "--out", str(out), "--strategy", strategy, "--parallelism", par]) == 0
        outs.append(out)
    for name in TOPOLOGY_FILES:
        assert len({(o / name).read_bytes() for o in outs}) == 1


def test_ntp_all_open(tmp_path, capsys):
    cime = tmp_path / "open.cime"
    assert main(["synth", "ieee14", "--open-fraction", "1", "--out", str(cime)]) == 0
    out = tmp_path / "o"
    assert main(["ntp", str(cime), "--out", str(out)]) == 0
    assert rows(out / "topoedges.csv") == []


def test_bench(ieee14_file, capsys):
    assert main(["bench", str(ieee14_file), "--repetitions", "0"]) == 2
    assert main(["bench", str(ieee14_file), "--repetitions", "3"]) == 0
    out = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert out[0][0] == "strategy" and [r[0] for r in out[1:]] == ["A", "B"]
    assert [r[1] for r in out[1:]] == ["368", "216"]
    assert main(["bench", str(ieee14_file), "--strategies", "a,z"]) == 2


def test_diff_same_and_split(ieee14_file, tmp_path, capsys):
    base = tmp_path / "base"
    main(["ntp", str(ieee14_file), "--out", str(base)])
    assert main(["diff", str(base), str(base)]) == 0
    assert "equivalent" in capsys.readouterr().out

    # open both tie breakers between two bus sections of one substation
    case = synth.builtin_case("ieee14")
    m = synth.synthesize_node_breaker(case, synth.SubstationTemplate(bus_sections=2))
    closed = tmp_path / "closed.cime"
    cime_io.write_cime(model.to_document(m), closed)
    ties = {(r.kind, r.id): False for r in m.switches() if r.id.startswith("ieee14_S4.tie1.")}
    assert ties
    opened = tmp_path / "opened.cime"
    cime_io.write_cime(model.to_document(model.replace_switch_status(m, ties)), opened)
    left, right = tmp_path / "l", tmp_path / "r"
    main(["ntp", str(closed), "--out", str(left)])
    main(["ntp", str(opened), "--out", str(right)])
    capsys.readouterr()
    assert main(["diff", str(left), str(right)]) == 1
    report = capsys.readouterr().out
    assert "node split: busbar/ieee14_S4.BB1 -> busbar/ieee14_S4.BB1, busbar/ieee14_S4.BB2" in report


def test_diff_against_toponode_table(tmp_path, capsys):
    cime = tmp_path / "topo.cime"
    cime.write_text(
        "<Substation::t>\n@ id name\n# S1 s\n</Substation::t>\n"
        "<Bus::t>\n@ id name st nd\n# BB1 b S1 N1\n</Bus::t>\n"
        "<Breaker::t>\n@ id name st i_nd j_nd point\n# CB1 c S1 N1 N2 1\n# CB2 c S1 N2 N3 0\n</Breaker::t>\n"
        "<TopoNode::t>\n@ id name st nds\n# T1 t S1 N1,N2\n# T2 t S1 N3\n</TopoNode::t>\n"
    )
    out = tmp_path / "o"
    assert main(["ntp", str(cime), "--out", str(out)]) == 0
    assert main(["diff", str(out), str(cime)]) == 0
    assert read_topology(cime).connectivity_only
    wrong = tmp_path / "wrong.cime"
    wrong.write_text(cime.read_text().replace("N1,N2", "N1").replace("# T2 t S1 N3", "# T2 t S1 N2,N3"))
    assert main(["diff", str(out), str(wrong)]) == 1
    no_table = tmp_path / "plain.cime"
    no_table.write_text("<Substation::t>\n@ id name\n# S1 s\n</Substation::t>\n")
    assert main(["diff", str(out), str(no_table)]) == 1


def test_mapping_flag(tmp_path):
    mapping = tmp_path / "m.map"
    mapping.write_text("busbar.table = BusbarSection\n")
    cime = tmp_path / "v.cime"
    cime.write_text("<Substation::t>\n@ id name\n# S1 s\n</Substation::t>\n"
                    "<BusbarSection::t>\n@ id name st nd\n# B1 b S1 N1\n</BusbarSection::t>\n")
    out = tmp_path / "o"
    assert main(["ntp", str(cime), "--out", str(out), "--mapping", str(mapping)]) == 0
    assert rows(out / "toponodes.csv")[0][:3] == ["busbar/B1", "S1", "1"]
