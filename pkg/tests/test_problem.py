import json

import numpy as np
import pytest

from sdfeas.errors import DegenerateLmi, GenerationFailed, NonZeroCost, ZeroRhs
from sdfeas.problem import (
    Lmi,
    Lsdfp,
    from_lmi,
    generate,
    load_problem,
    load_sdpa,
    load_witness,
    problem_from_dict,
    problem_to_dict,
    rank_by_qr,
    save_problem,
    save_witness,
    validate,
    witness_defects,
)
from sdfeas.symcore import min_eigenvalue, svec


def test_validate_accepts_simple_instance():
    p = Lsdfp(n=2, m=1, A=np.eye(2)[None, :, :], b=np.array([1.0]))
    rep = validate(p)
    assert rep.valid and rep.rank == 1


def test_validate_rejects_dependent_rows():
    A = np.stack([np.eye(2), 2.0 * np.eye(2)])
    p = Lsdfp(n=2, m=2, A=A, b=np.array([1.0, 2.0]))
    rep = validate(p)
    assert not rep.valid and rep.rank == 1


def test_validate_rejects_zero_rhs():
    e12 = np.zeros((2, 2))
    e12[0, 1] = e12[1, 0] = 0.5
    A = np.stack([e12, np.diag([1.0, -1.0])])
    p = Lsdfp(n=2, m=2, A=A, b=np.zeros(2))
    rep = validate(p)
    assert not rep.valid and rep.b_nonzero is False


def test_rank_by_qr_drop_tolerance():
    rows = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 1e-14]])
    assert rank_by_qr(rows) == 2
    assert rank_by_qr(np.zeros((3, 4))) == 0


# --- LMI conversion ----------------------------------------------------------


def test_from_lmi_hand_case():
    # one variable: z * diag(0,1) + diag(1,0) >= 0
    lmi = Lmi(l=1, B0=np.diag([1.0, 0.0]), Bs=np.diag([0.0, 1.0])[None, :, :])
    p, rec = from_lmi(lmi)
    assert (p.n, p.m) == (2, 2)
    # constraint rows span the complement of span{svec(diag(0,1))}
    for i in range(p.m):
        assert abs(svec(p.A[i]) @ svec(lmi.Bs[0])) < 1e-12
    # b entries are projections of B0 (basis-dependent up to orthogonal mixing)
    assert np.linalg.norm(p.b) == pytest.approx(1.0, abs=1e-12)
    # recovery: X = diag(1, t) is feasible and recovers z = t
    for t in (0.0, 0.7, 3.0):
        z = rec.recover(np.diag([1.0, t]))
        assert z[0] == pytest.approx(t, abs=1e-12)
        np.testing.assert_allclose(rec.reconstruct(z), np.diag([1.0, t]), atol=1e-12)


def test_from_lmi_zero_rhs():
    lmi = Lmi(l=1, B0=np.zeros((2, 2)), Bs=np.diag([0.0, 1.0])[None, :, :])
    with pytest.raises(ZeroRhs):
        from_lmi(lmi)
    # B0 inside the span is equally degenerate
    lmi = Lmi(l=1, B0=np.diag([0.0, 2.0]), Bs=np.diag([0.0, 1.0])[None, :, :])
    with pytest.raises(ZeroRhs):
        from_lmi(lmi)


def test_from_lmi_dependent_coefficients():
    b1 = np.diag([0.0, 1.0])
    lmi = Lmi(l=2, B0=np.diag([1.0, 0.0]), Bs=np.stack([b1, 2 * b1]))
    with pytest.raises(DegenerateLmi):
        from_lmi(lmi)


def test_from_lmi_end_to_end_feasibility():
    # random LMI with a known feasible point: B0 = W - sum z0_j B_j, W PSD
    rng = np.random.default_rng(11)
    n, l = 4, 2
    bs = np.stack([(g + g.T) / 2 for g in rng.standard_normal((l, n, n))])
    z0 = rng.standard_normal(l)
    g = rng.standard_normal((n, n))
    wmat = g @ g.T + 0.3 * np.eye(n)
    b0 = wmat - np.einsum("j,jkl->kl", z0, bs)
    b0 = (b0 + b0.T) / 2
    p, rec = from_lmi(Lmi(l=l, B0=b0, Bs=bs))
    assert validate(p).valid
    # the known point satisfies the converted constraints
    resid = np.einsum("ijk,jk->i", p.A, wmat) - p.b
    assert np.max(np.abs(resid)) < 1e-10
    # solving the converted instance yields an LMI-feasible point
    from sdfeas.ipm import Params, run
    from sdfeas.phase1 import centered_start, find_dual_interior
    from sdfeas.embed import Solved

    y0, Y0 = find_dual_interior(p)
    outcome, _ = run(p, centered_start(p, y0, Y0), Params())
    assert isinstance(outcome, Solved)
    z = rec.recover(outcome.X)
    slack = rec.reconstruct(z)
    assert min_eigenvalue((slack + slack.T) / 2) >= -1e-8


# --- generator ---------------------------------------------------------------


def test_generate_witness_identities():
    p, w = generate(4, 3, 1, seed=7)
    d = witness_defects(p, w)
    assert d["primal_feasibility"] == 0.0  # b_i defined as Tr(A_i X*)
    scale = max(1.0, np.linalg.norm(p.b) * np.linalg.norm(w.ystar))
    assert d["b_dot_ystar"] <= 1e-12 * scale
    assert d["dual_feasibility"] <= 1e-10
    assert d["complementarity"] <= 1e-10
    assert min_eigenvalue(w.Xstar + w.Ystar) > 0.0
    assert validate(p).valid


def test_generate_deterministic():
    p1, w1 = generate(5, 4, 2, seed=3)
    p2, w2 = generate(5, 4, 2, seed=3)
    np.testing.assert_array_equal(p1.A, p2.A)
    np.testing.assert_array_equal(p1.b, p2.b)
    np.testing.assert_array_equal(w1.Xstar, w2.Xstar)


def test_generate_rejects_bad_shapes():
    with pytest.raises(ValueError):
        generate(4, 3, 4, seed=0)  # r = n
    with pytest.raises(ValueError):
        generate(4, 1, 1, seed=0)  # m < 2


def test_generate_exhausts_retries_on_hopeless_combo():
    # large kernel with few constraints: a definite combination is unlikely,
    # so the dual-strict-feasibility rejection loop runs out
    with pytest.raises(GenerationFailed):
        generate(8, 2, 7, seed=1, retries=3)


# --- file formats ------------------------------------------------------------


def test_problem_json_roundtrip(tmp_path):
    p, w = generate(4, 3, 2, seed=5)
    path = tmp_path / "prob.json"
    save_problem(path, p)
    q = load_problem(path)
    np.testing.assert_array_equal(p.A, q.A)
    np.testing.assert_array_equal(p.b, q.b)
    # byte stability
    save_problem(tmp_path / "prob2.json", q)
    assert (tmp_path / "prob.json").read_bytes() == (tmp_path / "prob2.json").read_bytes()


def test_witness_json_roundtrip(tmp_path):
    p, w = generate(4, 3, 2, seed=5)
    path = tmp_path / "w.json"
    save_witness(path, w)
    w2 = load_witness(path)
    np.testing.assert_array_equal(w.Xstar, w2.Xstar)
    assert w2.partition_rank == w.partition_rank


SDPA_OK = """\
* feasibility instance, one dense block
2
1
3
1.0 -2.0
1 1 1 1 1.5
1 1 1 3 0.25
2 1 2 2 -1.0
"""

SDPA_COST = SDPA_OK + "0 1 1 1 4.0\n"


def test_sdpa_import(tmp_path):
    path = tmp_path / "inst.dat-s"
    path.write_text(SDPA_OK)
    p = load_problem(path)
    assert (p.n, p.m) == (3, 2)
    np.testing.assert_array_equal(p.b, [1.0, -2.0])
    assert p.A[0][0, 0] == 1.5
    assert p.A[0][0, 2] == 0.25 and p.A[0][2, 0] == 0.25
    assert p.A[1][1, 1] == -1.0


def test_sdpa_rejects_nonzero_cost(tmp_path):
    path = tmp_path / "cost.dat-s"
    path.write_text(SDPA_COST)
    with pytest.raises(NonZeroCost):
        load_sdpa(path)


def test_sdpa_rejects_multiblock(tmp_path):
    path = tmp_path / "blocks.dat-s"
    path.write_text("1\n2\n2 2\n1.0\n1 1 1 1 1.0\n")
    with pytest.raises(ValueError):
        load_sdpa(path)


def test_problem_dict_roundtrip():
    p, _ = generate(3, 2, 1, seed=9)
    q = problem_from_dict(json.loads(json.dumps(problem_to_dict(p))))
    np.testing.assert_array_equal(p.A, q.A)
