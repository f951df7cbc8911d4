import copy
from pathlib import Path

import pytest

from wavesplit_plots.cli import main as plot_main
from wavesplit_plots.figures import FigureError, FigureSpec, extract_series, \
    load_rows, render

DATA = Path(__file__).parent / "data"

HEADER = ("experiment,scheme,tau,h_min,h_max,ell,nx_sub,ny_sub,"
          "err_exact,err_vs_cn,stable,steps,wall_ms,lam,delta,ratio")


def test_acceptance_cfl_figure(tmp_path):
    # criterion-5 style CSV -> scatter with the 0.577*h_min*ell guide
    out = tmp_path / "cfl.png"
    spec = FigureSpec("cfl", str(DATA / "cfl_scan_1d.csv"), str(out))
    data = render(spec)
    assert out.exists() and out.stat().st_size > 0
    assert len(data["x"]) == 6
    assert data["tau_max"] == sorted(data["tau_max"])  # non-decreasing here


def test_acceptance_convergence_figure(tmp_path):
    # criterion-7 style CSV -> log-log figure, solid + dashed + O(tau^2) guide
    out = tmp_path / "conv.pdf"
    spec = FigureSpec("convergence", str(DATA / "convergence_2d.csv"), str(out))
    data = render(spec)
    assert out.exists() and out.stat().st_size > 0
    assert set(data["solid"]) == {"cn", "ds", "lf"}
    assert "ds" in data["dashed"] and "cn" not in data["dashed"]
    assert data["dropped"] > 0  # unstable leapfrog rows omitted


def test_topology_and_decay_figures(tmp_path):
    t_out = tmp_path / "topo.png"
    render(FigureSpec("topology", str(DATA / "topology_2d.csv"), str(t_out)))
    assert t_out.stat().st_size > 0

    d_out = tmp_path / "decay.png"
    data = render(FigureSpec("decay", str(DATA / "decay_1d.csv"), str(d_out)))
    assert d_out.stat().st_size > 0
    assert len(data) == 3  # one series per lambda
    for pts in data.values():
        ratios = [r for _, r in pts]
        assert ratios == sorted(ratios, reverse=True)  # decay in delta


def test_header_only_csv_warns_but_succeeds(tmp_path):
    src = tmp_path / "empty.csv"
    src.write_text(HEADER + "\n")
    out = tmp_path / "empty.png"
    with pytest.warns(UserWarning):
        render(FigureSpec("convergence", str(src), str(out)))
    assert out.exists()


def test_missing_columns_is_descriptive_error(tmp_path):
    src = tmp_path / "bad.csv"
    src.write_text("a,b\n1,2\n")
    with pytest.raises(FigureError, match="needs columns"):
        render(FigureSpec("cfl", str(src), str(tmp_path / "x.png")))


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(FigureError):
        render(FigureSpec("spectrogram", str(DATA / "decay_1d.csv"),
                          str(tmp_path / "x.png")))


def test_extraction_is_pure():
    rows = load_rows(DATA / "convergence_2d.csv")
    spec = FigureSpec("convergence", "unused", "unused")
    a = extract_series(copy.deepcopy(rows), spec)
    b = extract_series(rows, spec)
    assert a == b


def test_cli_roundtrip(tmp_path):
    out = tmp_path / "cli.png"
    code = plot_main(["--kind", "cfl", "--in", str(DATA / "cfl_scan_1d.csv"),
                      "--out", str(out)])
    assert code == 0 and out.exists()
    code = plot_main(["--kind", "decay", "--in", str(tmp_path / "missing.csv"),
                      "--out", str(out)])
    assert code == 2
