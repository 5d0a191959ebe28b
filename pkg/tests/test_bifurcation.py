import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from filippov_boost.bifurcation import (
    Criticality,
    CycleNotFound,
    HomoclinicError,
    bifurcation_set,
    classify_region,
    diagram_sweep,
    find_limit_cycle,
    homoclinic_k,
    hopf_report,
    hopf_sigma,
    poincare_return,
    region_label,
    return_map_derivative,
    section_edge,
    separatrix_gap,
    write_diagram_csv,
)
from filippov_boost.filippov import SigmaPoint
from filippov_boost.model import Params
from filippov_boost.singularities import (
    bt_loads,
    hopf_gain,
    jacobian_planar,
    loop_trace,
    stability_quantities,
    two_fold_projection,
)

jsonschema = pytest.importorskip("jsonschema")

SCHEMAS = Path(__file__).resolve().parents[1] / "docs" / "schemas"
A_M, A_P = bt_loads(1.0, 4.0)


@pytest.fixture(scope="module")
def k_hc():
    return homoclinic_k(0.2, 1.0, 4.0)


def first_lyapunov_coefficient(a, w=1.0, yr=4.0):
    """Independent oracle: l1 of the weak focus at k_H from the quadratic terms of the planar field.

    The planar field is quadratic, so its third derivatives vanish; the second
    derivative form B is written out by hand from the polynomial.
    """
    k = hopf_gain(a, w, yr)
    A = jacobian_planar((a * yr * yr, yr), Params(a, k, w, yr))
    ev, V = np.linalg.eig(A)
    i = int(np.argmax(ev.imag))
    w0, q = ev[i].imag, V[:, i]
    evt, W = np.linalg.eig(A.T)
    pv = W[:, int(np.argmin(evt.imag))]
    pv = pv / np.conj(np.vdot(pv, q))

    def B(u, v):
        return np.array([
            (2 * a - 2 * w) * u[1] * v[1],
            w * (u[0] * v[1] + u[1] * v[0]) - 2 * k * a * u[1] * v[1],
        ])

    t1 = -2 * np.vdot(pv, B(q, np.linalg.solve(A, B(q, q.conj()))))
    t2 = np.vdot(pv, B(q.conj(), np.linalg.solve(2j * w0 * np.eye(2) - A, B(q, q))))
    return float((t1 + t2).real / (2 * w0))


# ---------------------------------------------------------------------- Hopf

def test_hopf_report_example():
    r = hopf_report(0.2)
    assert r.k_H == pytest.approx(1.375, abs=1e-12)
    assert r.det_at_kH == pytest.approx(2.3, rel=1e-12)
    assert r.transversality == pytest.approx(-1.6, rel=1e-14)
    assert r.criticality is Criticality.SUBCRITICAL


def test_hopf_report_matches_eigenvalue_oracle():
    for a in (0.1, 0.2, 0.3, 0.4):
        r = hopf_report(a)
        assert r.det_at_kH == pytest.approx(stability_quantities(Params(a, r.k_H)).det, rel=1e-12)
        h = 1e-6
        re = [np.linalg.eigvals(jacobian_planar((16 * a, 4.0), Params(a, r.k_H + s))).real.max() for s in (-h, h)]
        # real part of the pair is Tr/2, so it crosses zero with speed transversality/2
        assert (re[1] - re[0]) / (2 * h) == pytest.approx(r.transversality / 2, rel=1e-5)


@pytest.mark.parametrize("a", [0.1, 0.2, 0.3, 0.4])
def test_sigma_positive_and_agrees_with_lyapunov_coefficient(a):
    r = hopf_report(a)
    assert r.sigma > 0 and r.criticality is Criticality.SUBCRITICAL
    assert first_lyapunov_coefficient(a) > 0


def test_sigma_sign_matches_lyapunov_coefficient_across_band():
    for a in np.linspace(A_M, A_P, 42)[1:-1]:
        assert math.copysign(1, hopf_sigma(a, hopf_gain(a, 1.0, 4.0), 1.0, 4.0)) == math.copysign(
            1, first_lyapunov_coefficient(a)
        )


@pytest.mark.parametrize("a", [A_M, A_P, 0.05, 0.45])
def test_hopf_report_rejects_loads_outside_band(a):
    with pytest.raises(ValueError):
        hopf_report(a)


# --------------------------------------------------------------- limit cycle

@pytest.mark.parametrize("k", [1.376, 1.40, 1.45, 1.50, 1.55, 1.57])
def test_cycle_exists_inside_window(k):
    p = Params(0.2, k)
    c = find_limit_cycle(p)
    assert c.stability == "unstable" and abs(c.multiplier) > 1
    # anchor is a fixed point of the return map
    assert poincare_return(p, c.anchor.x) == pytest.approx(c.anchor.x, abs=1e-8)
    assert c.period > 0
    # strictly inside the sliding region
    x, y = c.samples.T
    fp = x + (1 - 0.2 - k) * y + k - 4
    fm = (1 - 0.2) * y + k - 4
    assert fp.max() < 0 and fm.min() > 0


@pytest.mark.parametrize("k", [1.35, 1.374, 1.375, 1.575, 1.60, 2.0, 0.5])
def test_cycle_absent_outside_window(k):
    with pytest.raises(CycleNotFound):
        find_limit_cycle(Params(0.2, k))


def test_cycle_instability_from_forward_map():
    for k in (1.40, 1.45, 1.50):
        p = Params(0.2, k)
        c = find_limit_cycle(p)
        forward = return_map_derivative(p, c.anchor.x, reverse=False)
        assert forward > 1
        assert forward == pytest.approx(c.multiplier, rel=1e-4)


def test_cycle_uniqueness_from_two_guesses():
    for k in (1.40, 1.50, 1.55):
        p = Params(0.2, k)
        x_q, x_e = 3.2, section_edge(p)
        c1 = find_limit_cycle(p, SigmaPoint(x_q + 0.05 * (x_e - x_q), 4.0))
        c2 = find_limit_cycle(p, SigmaPoint(x_q + 0.95 * (x_e - x_q), 4.0))
        assert c1.anchor.x == pytest.approx(c2.anchor.x, abs=1e-6)


def test_guess_must_lie_on_section():
    with pytest.raises(ValueError):
        find_limit_cycle(Params(0.2, 1.5), SigmaPoint(3.5, 4.2))


def test_amplitude_grows_and_cycle_approaches_two_fold(k_hc):
    ks = [1.376, 1.40, 1.45, 1.50, 1.55, 1.57, k_hc - 1e-3]
    cycles = [find_limit_cycle(Params(0.2, k)) for k in ks]
    amp_y = [c.amplitude_y for c in cycles]
    amp_x = [c.amplitude_x for c in cycles]
    dist = [c.min_distance_to_two_fold for c in cycles]
    assert np.all(np.diff(amp_y) > 0) and np.all(np.diff(amp_x) > 0)
    assert np.all(np.diff(dist) < 0)
    assert dist[-1] < 0.05
    assert find_limit_cycle(Params(0.2, 1.376)).amplitude_y < find_limit_cycle(Params(0.2, 1.45)).amplitude_y


# ---------------------------------------------------------------- homoclinic

def test_homoclinic_anchor(k_hc):
    assert k_hc == pytest.approx(1.573, abs=0.005)
    assert loop_trace(Params(0.2, 1.573)) == pytest.approx(1.863, abs=5e-4)
    assert loop_trace(Params(0.2, k_hc)) != 0


def test_homoclinic_gain_is_offset_insensitive(k_hc):
    assert homoclinic_k(0.2, confirm_eps=True) == pytest.approx(k_hc, abs=1e-6)
    p_t = two_fold_projection(Params(0.2, k_hc))
    eps = 1e-6 * (1 + math.hypot(p_t.x, p_t.y))
    assert homoclinic_k(0.2, eps=0.5 * eps) == pytest.approx(k_hc, abs=2e-6)


def test_cycle_switches_off_at_homoclinic_gain(k_hc):
    find_limit_cycle(Params(0.2, k_hc - 2e-3))
    with pytest.raises(CycleNotFound):
        find_limit_cycle(Params(0.2, k_hc + 2e-3))


def test_separatrix_gap_changes_sign(k_hc):
    assert separatrix_gap(Params(0.2, k_hc - 0.01)) * separatrix_gap(Params(0.2, k_hc + 0.01)) < 0


def test_homoclinic_errors():
    with pytest.raises(HomoclinicError):
        homoclinic_k(0.2, bracket=(0.5, 1.0))  # below a*y_r: no saddle
    with pytest.raises(HomoclinicError):
        homoclinic_k(0.2, bracket=(1.40, 1.45))  # no sign change
    with pytest.raises(HomoclinicError):
        homoclinic_k(0.5)  # outside the Hopf band


# ------------------------------------------------------------------- regions

@pytest.mark.parametrize("ak, label", [((0.2, 1.5), 5), ((0.2, 1.6), 6), ((0.2, 0.5), 1), ((0.6, 3.0), 4),
                                       ((0.2, 1.0), 3), ((0.2, 0.83), 2), ((0.45, 2.5), 6)])
def test_region_labels(ak, label):
    assert classify_region(Params(*ak)) == label


def test_region_label_boundaries():
    assert region_label(Params(0.2, 0.8), None) is None
    assert region_label(Params(0.2, 1.5), None) is None


@pytest.fixture(scope="module")
def small_set():
    return bifurcation_set(1.0, 4.0, resolution=20, grid_resolution=12)


def test_bifurcation_set_structure(small_set, k_hc):
    s = small_set
    assert not s.failures
    assert s.bt_points[0] == pytest.approx((A_M, 4 * A_M)) and s.bt_points[1] == pytest.approx((A_P, 4 * A_P))
    hc = s.homoclinic
    assert len(hc) == 19
    for a, k in hc:
        assert k > hopf_gain(a, 1.0, 4.0) > 4 * a
    assert s.homoclinic_gain(0.2) == pytest.approx(k_hc, abs=5e-3)
    # monotone approach of the curve towards k = a*y_r at both ends
    gap = hc[:, 1] - 4 * hc[:, 0]
    assert gap[0] < gap[1] and gap[-1] < gap[-2]
    np.testing.assert_allclose(s.hopf[:, 1], [hopf_gain(a, 1.0, 4.0) for a in s.hopf[:, 0]])


def test_bifurcation_set_json_schema(small_set):
    doc = json.loads(json.dumps(small_set.to_json()))
    jsonschema.validate(doc, json.loads((SCHEMAS / "bifset.schema.json").read_text()))
    labels = doc["regions_grid"]["labels"]
    assert len(labels) == 12 and all(len(row) == 12 for row in labels)
    assert {v for row in labels for v in row if v is not None} <= set(range(1, 7))


def test_bifurcation_set_region_lookup(small_set):
    assert small_set.region(0.2, 1.5) == 5
    assert small_set.region(0.2, 1.6) == 6
    assert small_set.region(0.2, 0.5) == 1


def test_bifurcation_set_requires_bt_points():
    with pytest.raises(ValueError):
        bifurcation_set(1.0, 2.0, resolution=4, grid_resolution=3)


# ------------------------------------------------------------------ diagram

def test_diagram_window_endpoints():
    lower = diagram_sweep(0.2, k_range=(1.370, 1.380), resolution=11)
    upper = diagram_sweep(0.2, k_range=(1.568, 1.578), resolution=11)
    first = min(r.k for r in lower if r.cycle)
    last = max(r.k for r in upper if r.cycle)
    assert abs(first - 1.375) <= 0.005
    assert abs(last - 1.573) <= 0.005
    for r in lower + upper:
        assert (r.q_x, r.q_y) == (3.2, 4.0)


def test_diagram_two_fold_branch():
    (rec,) = diagram_sweep(0.2, k_range=(1.375, 1.375), resolution=1)
    assert rec.pt_y == pytest.approx(3.28125, rel=1e-14)
    assert rec.pt_x == pytest.approx(4.51171875, rel=1e-14)


def test_diagram_parallel_matches_serial(tmp_path):
    serial = diagram_sweep(0.2, k_range=(1.45, 1.6), resolution=4, jobs=1)
    parallel = diagram_sweep(0.2, k_range=(1.45, 1.6), resolution=4, jobs=2)
    a = write_diagram_csv(serial, tmp_path / "a.csv").read_bytes()
    b = write_diagram_csv(parallel, tmp_path / "b.csv").read_bytes()
    assert a == b


def test_diagram_csv_schema(tmp_path):
    recs = diagram_sweep(0.2, k_range=(1.3, 1.7), resolution=5)
    path = write_diagram_csv(recs, tmp_path / "d.csv")
    schema = json.loads((SCHEMAS / "diagram_row.schema.json").read_text())
    with path.open() as fh:
        reader = csv.DictReader(fh)
        assert reader.fieldnames == schema["x-columns"]
        rows = list(reader)
    for row in rows:
        doc = {}
        for key, val in row.items():
            if key == "q_kind":
                doc[key] = val
            elif key == "cycle":
                doc[key] = int(val)
            else:
                v = float(val)
                doc[key] = None if math.isnan(v) else v
        jsonschema.validate(doc, schema)
    assert [r["cycle"] for r in rows] == ["0", "1", "1", "0", "0"]
