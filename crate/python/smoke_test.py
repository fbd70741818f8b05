"""Smoke test for the `rendezvous` extension module.

Build and install first:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/rendezvous-*.whl

then run `python python/smoke_test.py`.
"""

import math

import rendezvous as rv


def close(a, b, tol):
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def consensus():
    q0 = [[4, 17, 24], [18, 10, 32], [15, 10, 26], [4, 2, 35]]
    net = rv.Network(4, [(1, 2), (2, 3), (2, 4), (3, 4)])
    assert net.is_connected()
    assert close(net.eigenvalues(), [0, 1, 3, 4], 1e-9)
    run = rv.integrate_consensus(net, q0, 40.0)
    assert run.rendezvous_point == [10.25, 9.75, 29.25]
    for row in run.final_state:
        assert close(row, run.rendezvous_point, 1e-3)
    exact = rv.closed_form(net, q0, 40.0)
    assert close(exact[0], run.final_state[0], 1e-6)
    print("consensus: agents meet at", run.rendezvous_point)


def quadcopter():
    params = rv.QuadParams()
    hover = params.hover_speed()
    start = rv.QuadState()
    assert max(map(abs, start.derivative([hover] * 4))) < 1e-10

    flight = rv.simulate(rv.plan_yaw(math.pi / 2, 4.0), start)
    assert abs(flight.final_angles[2] - math.pi / 2) < 1e-3

    flight = rv.simulate(rv.plan_translation("x", 5.0, 4.0), start)
    assert close(flight.final_position, [5, 0, 0], 0.05)
    assert max(abs(a[0]) for a in flight.angles) < 1e-6

    plan = rv.plan_rendezvous(rv.QuadState.hover_at([0, 9, 0]), [5, 6, 0])
    flight = rv.simulate(plan, rv.QuadState.hover_at([0, 9, 0]))
    assert close(flight.final_position, [5, 6, 0], 0.1)
    print(f"quadcopter: hover at {hover:.2f} rad/s, leg flown in {plan.duration:.2f} s")


def missions():
    names = rv.list_scenarios()
    assert "scenario_4_2_2" in names
    report = rv.run_mission("scenario_4_2_2")
    assert report["rendezvous_point"] == [5.0, 6.0, 0.0]
    times = [a["flight_time"] for a in report["agents"]]
    assert len(set(times)) == 3
    try:
        rv.Network(3, [(1, 4)])
    except ValueError:
        pass
    else:
        raise AssertionError("bad edge accepted")
    print(f"missions: {len(names)} bundled, drone flight times {times}")


if __name__ == "__main__":
    consensus()
    quadcopter()
    missions()
    print("smoke test passed")
