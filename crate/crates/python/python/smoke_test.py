"""Smoke test for the bbm extension module. Run after `pip install .`."""

import math

import bbm


def main():
    n = 64
    xs = [2 * math.pi * j / n for j in range(n)]
    u0 = bbm.Field.torus([0.5 * math.cos(x) for x in xs])
    assert u0.domain == "torus" and len(u0) == n
    assert abs(u0.energy() - 0.5 * math.pi * 0.25 * 2) < 1e-12

    # helmholtz inverse of cos x is cos(x)/2
    w = bbm.helmholtz_inverse(u0)
    assert max(abs(a - b / 2) for a, b in zip(w.values, u0.values)) < 1e-14

    damping = bbm.DampingProfile.bump(n, math.pi, 1.0, 1.0)
    model = bbm.Model.local_damping(damping)
    run = bbm.integrate(u0, 2.0, model, 0.01, record_stride=10, snapshot_stride=100)
    assert run.times[0] == 0.0 and run.times[-1] == 2.0
    assert all(b <= a + 1e-12 for a, b in zip(run.energy, run.energy[1:]))
    assert max(abs(r) for r in run.balance_residual) < 1e-8
    assert run.ledger_csv().startswith("t,E,mean,D,cumD,residual\n")
    assert len(run.snapshots) == 3

    end, window, iterations = bbm.picard_solve(u0, 0.5, model, sample_spacing=0.01)
    ref = bbm.integrate(u0, 0.5, model, 0.01).final_field
    gap = max(abs(a - b) for a, b in zip(end.values, ref.values))
    assert window == 0.5 and iterations > 1 and gap < 1e-6, gap

    m = 32
    v0 = bbm.Field.interval(1.0, [math.cos(math.pi * j / m) for j in range(m + 1)])
    feedback = bbm.Model.boundary_feedback(1.0, 0.0)
    assert feedback.variant == "C"
    run_c = bbm.integrate(v0, 0.5, feedback, 0.005)
    assert run_c.cumulative_dissipation[-1] > 0

    try:
        bbm.Model.boundary_feedback(-1.0, 0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative alpha accepted")

    print("bbm smoke test ok")


if __name__ == "__main__":
    main()
