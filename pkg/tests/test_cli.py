import json
import subprocess
import sys

import numpy as np
import pytest

from hypermap import io
from hypermap.cli import main


@pytest.fixture(scope="module")
def fixtures(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    prefix = str(d / "net")
    assert main(["generate", "--model", "s1", "--n", "1000", "--gamma", "2.5", "--beta", "2",
                 "--k-bar", "6", "--seed", "7", "--out", prefix]) == 0
    edges, truth = prefix + ".edges", prefix + ".map"
    emb = str(d / "emb.map")
    assert main(["embed", "--edges", edges, "--beta", "2", "--seed", "1", "--critical-k", "10",
                 "--out", emb]) == 0
    g = io.parse_edge_list(edges)
    rng = np.random.default_rng(0)
    geo = d / "geo.txt"
    geo.write_text("".join(f"{v} {rng.uniform(-89, 89)!r} {rng.uniform(-179, 179)!r}\n" for v in g.nodes))
    order = rng.permutation(g.nodes)
    snaps = []
    for t, s in enumerate((700, 850, g.n)):
        p = d / f"snap{t}.txt"
        p.write_text("\n".join(map(str, sorted(order[:s]))) + "\n")
        snaps.append(str(p))
    return {"dir": d, "edges": edges, "truth": truth, "emb": emb, "geo": str(geo), "snaps": snaps}


def test_generate_writes_edges_and_map(fixtures):
    g = io.parse_edge_list(fixtures["edges"])
    m, _ = io.read_map(fixtures["truth"])
    assert set(g.nodes.tolist()) <= set(m.nodes.tolist())
    assert m.n == 1000
    head = open(fixtures["edges"]).readline()
    assert head.startswith("# tool hypermap")


def test_embed_then_route_reports_success_ratio(fixtures, tmp_path):
    out = tmp_path / "route.json"
    assert main(["route", "--edges", fixtures["edges"], "--map", fixtures["emb"], "--pairs", "3000",
                 "--seed", "2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert 0.0 <= doc["report"]["success_ratio"] <= 1.0
    assert doc["header"]["seed"] == 2 and doc["header"]["command"] == "route"


def _commands(f, out):
    return {
        "generate": ["generate", "--model", "h2", "--n", "400", "--gamma", "2.4", "--temperature", "0.5",
                     "--k-bar", "6", "--seed", "3", "--out", out],
        "estimate": ["estimate", "--edges", f["edges"], "--seed", "3", "--beta-grid", "1.5,2.5",
                     "--route-pairs", "500", "--out", out],
        "embed": ["embed", "--edges", f["edges"], "--beta", "2", "--kernel", "lmh", "--critical-k", "10",
                  "--seed", "3", "--out", out],
        "route": ["route", "--edges", f["edges"], "--map", f["emb"], "--pairs", "2000", "--seed", "3",
                  "--out", out],
        "perturb": ["perturb", "--edges", f["edges"], "--map", f["emb"], "--kind", "random-links",
                    "--levels", "0,0.1,0.2", "--pairs", "2000", "--seed", "3", "--out", out],
        "grow": ["grow", "--edges", f["edges"], "--snapshots", *f["snaps"], "--beta", "2", "--critical-k", "10",
                 "--pairs", "1000", "--seed", "3", "--out", out],
        "geo-route": ["geo-route", "--edges", f["edges"], "--geo", f["geo"], "--mode", "hyperbolized",
                      "--pairs", "2000", "--seed", "3", "--out", out],
        "betweenness": ["betweenness", "--edges", f["edges"], "--map", f["emb"], "--mode", "greedy",
                        "--weighting", "router", "--pairs", "3000", "--seed", "3", "--out", out],
    }


def _outputs(out):
    if out.endswith("gen"):
        return [out + ".edges", out + ".map"]
    return [out]


@pytest.mark.parametrize("name", ["generate", "estimate", "embed", "route", "perturb", "grow", "geo-route",
                                  "betweenness"])
def test_subcommand_reruns_are_bit_identical(fixtures, tmp_path, name):
    out = str(tmp_path / ("gen" if name == "generate" else "out"))
    cmd = _commands(fixtures, out)[name]
    blobs = []
    for _ in range(2):
        assert main(cmd) == 0
        blobs.append([open(p, "rb").read() for p in _outputs(out)])
    assert blobs[0] == blobs[1]
    assert all(len(b) > 0 for b in blobs[0])


def test_csv_schemas(fixtures, tmp_path):
    out = str(tmp_path / "sweep.csv")
    main(_commands(fixtures, out)["perturb"])
    lines = [l for l in open(out) if not l.startswith("#")]
    assert lines[0].strip() == ("level,success_ratio,mean_stretch,mean_shortest_hops,mean_greedy_hops,"
                                "pairs_evaluated,pairs_skipped_unreachable,giant_fraction")
    assert len(lines) == 4
    out = str(tmp_path / "btw.csv")
    main(_commands(fixtures, out)["betweenness"])
    text = open(out).read()
    assert "node,degree,betweenness,per_router" in text


def test_router_weighting_with_empty_counts_uses_proxy(fixtures, tmp_path):
    empty = tmp_path / "rc.txt"
    empty.write_text("")
    out = tmp_path / "b.csv"
    assert main(["betweenness", "--edges", fixtures["edges"], "--weighting", "router", "--router-counts",
                 str(empty), "--pairs", "500", "--out", str(out)]) == 0
    assert "# router_counts proxy ceil(degree/2)" in out.read_text()


def test_validation_errors_exit_2(fixtures, tmp_path, capsys):
    bad = tmp_path / "bad.edges"
    bad.write_text("1 2\n2 x\n")
    assert main(["route", "--edges", str(bad), "--map", fixtures["emb"]]) == 2
    assert ":2:" in capsys.readouterr().err
    assert main(["generate", "--model", "s1", "--n", "100", "--gamma", "2.5", "--k-bar", "5",
                 "--out", str(tmp_path / "x")]) == 2
    assert main(["betweenness", "--edges", fixtures["edges"], "--mode", "greedy"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["route", "--no-such-flag"])
    assert exc.value.code == 2


def test_console_entry_point(fixtures):
    res = subprocess.run([sys.executable, "-m", "hypermap.cli", "route", "--edges", fixtures["edges"],
                          "--map", fixtures["truth"], "--pairs", "500"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "success_ratio" in res.stdout
