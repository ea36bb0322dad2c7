import numpy as np
import pytest

from sdfeas.embed import (
    EarlyStopped,
    MuFloorReached,
    NoOptimalSolution,
    Solved,
)
from sdfeas.errors import (
    EquivalenceViolation,
    InsufficientTrace,
    MaxIterExceeded,
    NotInNeighborhood,
)
from sdfeas.ipm import (
    IterRecord,
    IterTrace,
    Params,
    TRACE_COLUMNS,
    check_equivalence,
    corrector,
    point_centrality,
    predictor,
    run,
    run_sdlcp,
    step_point,
    superlinear_report,
)
from sdfeas.phase1 import centered_start, cold_start, find_dual_interior
from sdfeas.problem import Lsdfp, generate
from sdfeas.sdlcp import build_orth_basis, build_ops, embed_point


def tau_collapse_instance(n, m, seed):
    """Infeasible family: the first constraint forces Tr(X) = -tau < 0."""
    rng = np.random.default_rng(seed)
    A = np.zeros((m, n, n))
    A[0] = np.eye(n)
    for i in range(1, m):
        g = rng.standard_normal((n, n))
        A[i] = (g + g.T) / 2
    b = rng.standard_normal(m)
    b[0] = -1.0
    return Lsdfp(n=n, m=m, A=A, b=b)


# --- parameters --------------------------------------------------------------


def test_params_default_chain():
    params = Params()
    b1, b2 = params.beta1, params.beta2
    assert b2**2 / (2 * (1 - b2) ** 2) <= b1 < b2 < b2 / (1 - b2) < 1.0


@pytest.mark.parametrize("bad", [
    dict(beta1=0.05, beta2=0.3),   # beta1 below the corrector bound
    dict(beta1=0.35, beta2=0.3),   # beta1 >= beta2
    dict(beta1=0.4, beta2=0.55),   # beta2 >= 1/2
])
def test_params_rejects_bad_radii(bad):
    with pytest.raises(ValueError):
        Params(**bad)


# --- predictor / corrector ---------------------------------------------------


def test_predictor_requires_narrow_membership():
    from sdfeas.embed import HPoint

    p, _ = generate(3, 2, 1, seed=0)
    lopsided = HPoint(X=np.diag([10.0, 1.0, 0.1]), y=np.zeros(2),
                      Y=np.eye(3), tau=1.0, kappa=1.0)
    with pytest.raises(NotInNeighborhood):
        predictor(p, lopsided, Params())


def test_predictor_membership_sweep():
    # every point of the predictor segment up to alpha_bar stays in the
    # wide neighborhood at its own gap level
    p, _ = generate(4, 3, 1, seed=6)
    y0, Y0 = find_dual_interior(p)
    pt = centered_start(p, y0, Y0)
    params = Params()
    mu = pt.mu
    for _ in range(4):
        pred = predictor(p, pt, params, mu=mu)
        for alpha in np.linspace(0.0, pred.alpha_bar, 50):
            probe = step_point(pt, pred.direction, alpha)
            c = point_centrality(probe)
            assert c is not None and c[0] <= params.beta2 * c[1] * (1 + 1e-12)
        assert pred.alpha1 <= pred.alpha_bar + params.bisect_tol
        pt = corrector(p, pred.point, pred.alpha_bar, params, mu=mu)
        mu *= 1.0 - pred.alpha_bar


def test_corrector_pure_centering_is_fixed_point():
    p, _ = generate(3, 2, 1, seed=3)
    pt = cold_start(p, 1.0)  # exactly centered
    out = corrector(p, pt, 0.0, Params())
    np.testing.assert_allclose(out.X, pt.X, atol=1e-11)
    np.testing.assert_allclose(out.Y, pt.Y, atol=1e-11)
    assert out.tau == pytest.approx(pt.tau, abs=1e-11)


def test_corrector_restores_narrow_membership_and_gap():
    p, _ = generate(5, 4, 2, seed=5)
    y0, Y0 = find_dual_interior(p)
    pt = centered_start(p, y0, Y0)
    params = Params()
    mu = pt.mu
    for _ in range(5):
        pred = predictor(p, pt, params, mu=mu)
        new_pt = corrector(p, pred.point, pred.alpha_bar, params, mu=mu)
        mu_next = (1.0 - pred.alpha_bar) * mu
        c = point_centrality(new_pt)
        assert c[0] <= params.beta1 * c[1]
        # the corrector hits its centering target: recomputed gap matches
        assert new_pt.mu == pytest.approx(mu_next, rel=1e-9)
        pt, mu = new_pt, mu_next


# --- run ---------------------------------------------------------------------


def test_run_solves_generated_instance(warm_runs):
    solved = [outcome for *_, outcome, _tr in warm_runs
              if isinstance(outcome, Solved)]
    assert len(solved) == len(warm_runs)


def test_run_tau_collapse_detects_infeasibility():
    p = tau_collapse_instance(3, 2, seed=0)
    outcome, trace = run(p, cold_start(p, 1.0), Params())
    assert isinstance(outcome, NoOptimalSolution)
    assert outcome.tau <= 1e-8
    assert len(trace) <= 200


def test_run_max_iter_zero():
    p, _ = generate(3, 2, 1, seed=1)
    with pytest.raises(MaxIterExceeded) as exc:
        run(p, cold_start(p, 1.0), Params(max_iter=0))
    assert len(exc.value.trace) == 0


def test_run_early_stop_hook():
    p, _ = generate(3, 2, 1, seed=1)
    outcome, trace = run(p, cold_start(p, 1.0), Params(),
                         stop_when=lambda k, pt: k == 2)
    assert isinstance(outcome, EarlyStopped)
    assert len(trace) == 2


def test_run_mu_floor_outcome():
    p, _ = generate(4, 3, 1, seed=4)
    y0, Y0 = find_dual_interior(p)
    outcome, trace = run(p, centered_start(p, y0, Y0),
                         Params(eps=1e-30, mu_floor=1e-10))
    assert isinstance(outcome, MuFloorReached)
    assert trace.mus[-1] * trace.ratios[-1] <= 1e-10


def test_trace_invariants_and_csv_roundtrip(tmp_path, warm_runs):
    p, w, start, outcome, trace = warm_runs[0]
    mus = trace.mus
    assert np.all(np.diff(mus) < 0)
    assert np.all((trace.ratios > 0) & (trace.ratios < 1))
    for rec in trace:
        assert rec.mu * rec.ratio == (1.0 - rec.alpha_bar) * rec.mu
        assert rec.nbr_dist <= Params().beta1 * rec.mu * (1 + 1e-9)
    path = tmp_path / "trace.csv"
    trace.to_csv(path)
    header = path.read_text().splitlines()[0]
    assert header == ",".join(TRACE_COLUMNS)
    back = IterTrace.from_csv(path)
    np.testing.assert_array_equal(back.mus, trace.mus)
    np.testing.assert_array_equal(back.ratios, trace.ratios)


# --- lifted driver -----------------------------------------------------------


def test_run_sdlcp_matches_run(warm_runs):
    p, w, start, outcome, trace = warm_runs[1]
    ops = build_ops(p, build_orth_basis(p))
    outcome2, trace2 = run_sdlcp(ops, embed_point(start), Params())
    assert len(trace2) == len(trace)
    # each side bisects its own maximal step; agreement is absolute in
    # the step length (the lockstep checker asserts the sharp form)
    np.testing.assert_allclose(trace2.ratios, trace.ratios, atol=1e-9)


def test_run_sdlcp_tau_collapse():
    p = tau_collapse_instance(3, 2, seed=1)
    ops = build_ops(p, build_orth_basis(p))
    outcome, _ = run_sdlcp(ops, embed_point(cold_start(p, 1.0)), Params())
    assert isinstance(outcome, NoOptimalSolution)
    assert outcome.tau <= 1e-8


def test_run_sdlcp_solution_extracts_to_homogeneous_solution():
    # converged lifted pairs are block diagonal and their blocks satisfy
    # the homogeneous equations (the reverse embedding direction)
    from sdfeas.ipm import SdlcpSolved
    from sdfeas.sdlcp import extract_point, HatPoint

    p, _ = generate(4, 3, 2, seed=8)
    ops = build_ops(p, build_orth_basis(p))
    y0, Y0 = find_dual_interior(p)
    start = centered_start(p, y0, Y0)
    outcome, _ = run_sdlcp(ops, embed_point(start), Params())
    assert isinstance(outcome, SdlcpSolved)
    x, ymat, tau, kappa = extract_point(
        HatPoint(Xhat=np.asarray(outcome.Xhat, float),
                 Yhat=np.asarray(outcome.Yhat, float)))
    assert tau > 0.0
    # primal block feasible after division by tau
    feas = np.einsum("ijk,jk->i", p.A, x / tau) - p.b
    assert np.max(np.abs(feas)) <= 1e-7
    from sdfeas.symcore import min_eigenvalue

    assert min_eigenvalue((x + x.T) / 2) >= -1e-9
    assert min_eigenvalue((ymat + ymat.T) / 2) >= -1e-9
    assert kappa <= 1e-7


def test_run_with_conservative_step_rule():
    p, _ = generate(3, 2, 1, seed=2)
    y0, Y0 = find_dual_interior(p)
    start = centered_start(p, y0, Y0)
    outcome, trace = run(p, start, Params(step_rule="alpha1", max_iter=400))
    assert isinstance(outcome, Solved)
    # guaranteed steps never exceed the measured maximal ones
    for rec in trace:
        assert rec.alpha_bar == rec.alpha1
        assert rec.alpha1 <= rec.alpha2 + 1e-12


# --- equivalence -------------------------------------------------------------


def test_check_equivalence_on_generated_instance():
    p, _ = generate(5, 4, 2, seed=11)
    rep = check_equivalence(p, cold_start(p, 1.0),
                            Params(eps=1e-30, mu_floor=1e-7), k_max=15)
    assert rep.max_block_deviation <= 1e-8
    assert rep.max_mu_deviation <= 1e-10
    assert rep.k_checked >= 3


def test_check_equivalence_k0_trivial():
    p, _ = generate(4, 3, 1, seed=2)
    rep = check_equivalence(p, cold_start(p, 1.0), Params(), k_max=0)
    assert rep.k_checked == 0
    assert rep.max_block_deviation == 0.0


def test_check_equivalence_fault_injection():
    p, _ = generate(5, 4, 2, seed=11)
    ops = build_ops(p, build_orth_basis(p))
    ops.rows_B[p.m + p.n, 0, 1] += 1e-3
    ops.rows_B[p.m + p.n, 1, 0] += 1e-3
    with pytest.raises(EquivalenceViolation):
        check_equivalence(p, cold_start(p, 1.0),
                          Params(eps=1e-30, mu_floor=1e-7), k_max=15, ops=ops)


# --- superlinearity report ---------------------------------------------------


def _trace_from_ratios(ratios, mu0=1.0):
    trace = IterTrace()
    mu = mu0
    for k, r in enumerate(ratios):
        trace.append(IterRecord(k=k, mu=mu, alpha_bar=1 - r, alpha1=0.5,
                                alpha2=1 - r, delta=0.0, tau=1.0, kappa=mu,
                                norm_r=0.0, norm_s=0.0, gamma=0.0,
                                nbr_dist=0.0, ratio=r))
        mu *= r
    return trace


def test_superlinear_report_readout():
    rep = superlinear_report(_trace_from_ratios([0.5, 0.2, 0.04, 0.002]), tail=4)
    assert rep.monotone_decreasing
    assert rep.final_ratio == pytest.approx(0.002)
    assert rep.q_order > 1.0


def test_superlinear_report_flags_constant_ratios():
    rep = superlinear_report(_trace_from_ratios([0.5, 0.5, 0.5]), tail=3)
    assert not rep.monotone_decreasing
    assert rep.q_order == pytest.approx(1.0, abs=1e-6)


def test_superlinear_report_insufficient_trace():
    with pytest.raises(InsufficientTrace):
        superlinear_report(_trace_from_ratios([0.5, 0.4]), tail=5)
