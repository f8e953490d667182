import math

import pytest

import plot_bounds
import plot_convergence
from csv_schema import EXPECTED_HEADER, SchemaError, read_rows

HEADER = ",".join(EXPECTED_HEADER)


def write_csv(path, rows):
    lines = [HEADER]
    for row in rows:
        lines.append(",".join("" if isinstance(v, float) and math.isnan(v) else repr(v)
                              if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def synthetic_exact_order_rows(n_levels=5):
    """Errors exactly h^1 (primal, flux) and h^2 (energy, eigenvalue)."""
    rows = []
    for k in range(1, n_levels + 1):
        h = 2.0**-k
        rows.append([
            k, h, 8 * 4**k, 1.0, 0.9, 1.1, 2.0,
            0.5 * h, 0.8 * h, 0.25 * h * h, 0.3 * h * h, 5, 10.0,
        ])
    return rows


def constant_potential_rows():
    """Shape of the constant-potential study: E_h above, E_h_pp below."""
    data = [
        (1, 11.313708498984761, 0.542177333220, 0.018614742600, 0.565625000000),
        (2, 5.656854249492381, 0.541343444494, 0.067492925668, 0.546846673525),
        (3, 2.8284271247461903, 0.540885206326, 0.196421243845, 0.542224448515),
        (4, 1.4142135623730951, 0.540763968559, 0.375967396630, 0.541096415238),
        (5, 0.7071067811865476, 0.540733255035, 0.487333463275, 0.540816221329),
        (6, 0.3535533905932738, 0.540725551696, 0.526308141996, 0.540746284244),
    ]
    rows = []
    for level, h, e_h, e_pp, e_up in data:
        rows.append([
            level, h, 2 * 4**level, e_h, e_pp, e_up, 1.1,
            math.nan, math.nan, math.nan, math.nan, 7, 3.0,
        ])
    return rows


def harmonic_like_rows():
    """Gaps all positive: both series stay in the log panel."""
    rows = []
    for k in range(1, 6):
        h = 2.0**-k
        e_up = 6.02 + 0.5 * h * h
        rows.append([
            k, h, 8 * 4**k, 6.02 - 0.9 * h * h, 6.02 - 2.0 * h * h, e_up, 17.9,
            math.nan, math.nan, math.nan, math.nan, 9, 4.0,
        ])
    return rows


def test_a9_slope_annotations(tmp_path):
    csv = tmp_path / "conv.csv"
    write_csv(csv, synthetic_exact_order_rows())
    out = tmp_path / "conv.png"
    rows = read_rows(csv)
    slopes = plot_convergence.render(rows, out)
    ok = (
        abs(slopes["err_u_L2"] - 1.0) <= 0.01
        and abs(slopes["err_sigma_L2"] - 1.0) <= 0.01
        and abs(slopes["err_E"] - 2.0) <= 0.01
        and abs(slopes["err_lambda"] - 2.0) <= 0.01
    )
    print(f"A9 {'PASS' if ok else 'FAIL'}: fitted slopes {slopes}")
    assert ok
    assert out.exists() and out.stat().st_size > 0


def test_a10_constant_csv_omits_discrete_energy_gaps(tmp_path):
    csv = tmp_path / "bounds.csv"
    write_csv(csv, constant_potential_rows())
    out = tmp_path / "bounds.png"
    kept = plot_bounds.render(read_rows(csv), out)
    ok = kept == {"E_h_pp"}
    print(f"A10 {'PASS' if ok else 'FAIL'}: series kept in the log panel {sorted(kept)}")
    assert ok
    assert out.exists() and out.stat().st_size > 0


def test_bounds_keeps_both_series_when_gaps_positive(tmp_path):
    csv = tmp_path / "bounds.csv"
    write_csv(csv, harmonic_like_rows())
    kept = plot_bounds.render(read_rows(csv), tmp_path / "b.png")
    assert kept == {"E_h", "E_h_pp"}


def test_schema_error_names_missing_column(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("level,h,n_elements\n1,0.5,32\n")
    with pytest.raises(SchemaError, match="E_h_pp"):
        read_rows(bad)
    rc = plot_convergence.main([str(bad), str(tmp_path / "x.png")])
    assert rc == 1


def test_schema_error_on_empty_csv(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaError):
        read_rows(empty)
    header_only = tmp_path / "header.csv"
    header_only.write_text(HEADER + "\n")
    with pytest.raises(SchemaError):
        read_rows(header_only)


def test_convergence_requires_error_values(tmp_path):
    csv = tmp_path / "lb.csv"
    write_csv(csv, constant_potential_rows())  # no error columns filled
    rc = plot_convergence.main([str(csv), str(tmp_path / "x.png")])
    assert rc == 1


def test_scripts_end_to_end(tmp_path, capsys):
    conv = tmp_path / "conv.csv"
    write_csv(conv, synthetic_exact_order_rows())
    rc = plot_convergence.main([str(conv), str(tmp_path / "conv.png")])
    assert rc == 0
    assert "slope 1.00" in capsys.readouterr().out

    bounds = tmp_path / "bounds.csv"
    write_csv(bounds, constant_potential_rows())
    rc = plot_bounds.main([str(bounds), str(tmp_path / "bounds.png")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "E_h: nonpositive gaps" in out
    assert (tmp_path / "bounds.png").stat().st_size > 0


def test_deterministic_output_given_fixed_csv(tmp_path):
    csv = tmp_path / "conv.csv"
    write_csv(csv, synthetic_exact_order_rows())
    rows = read_rows(csv)
    s1 = plot_convergence.compute_slopes(rows)
    s2 = plot_convergence.compute_slopes(rows)
    assert s1 == s2
