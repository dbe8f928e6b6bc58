"""Smoke test for the carnot_ld extension module.

Build the wheel with `maturin build --release` in crates/py, install it, then
run `python python/smoke_test.py` from the repository root.
"""

import math

import carnot_ld as cl


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    qubit = [[0.0, 0.0], [0.0, 1.0]]

    wp = cl.working_point([qubit], [1.0])
    close(wp.figure_of_merit, 0.4392, 1e-3)
    close(wp.lambda_star[0], 2.40, 1e-2)

    log_z, mean, entropy, cap = cl.gibbs_summary([[0.0, 0.0], [0.0, wp.lambda_star[0]]])
    close(cap, wp.figure_of_merit, 1e-9)
    close(log_z, math.log1p(math.exp(-wp.lambda_star[0])), 1e-12)

    m = cl.kmb([qubit], [2.4], 2.0)
    close(m[0][0], 2.0 * cap / 2.4**2, 1e-3)
    assert cl.bosonic_metric([qubit], [2.4], 1.0)[0][0] > 0.0

    baths = cl.BathPair(1.0, 0.5)
    close(baths.carnot(), 0.5, 1e-15)
    free = cl.max_power(1.0, 1.0, baths)
    close(free.eta, baths.curzon_ahlborn(), 1e-12)
    at = cl.max_power_at_efficiency(1.0, 1.0, baths, 0.8)
    close(at.eta, 0.4, 1e-12)
    assert at.p < free.p

    x, c = cl.optimal_degenerate_gap(2)
    close(c, wp.figure_of_merit, 1e-6)

    three = cl.three_level_optimum(1.0)
    close(three.lambda_star[0], three.lambda_star[1], 1e-3)

    proto = cl.ExplicitProtocol(6, 0.1, 1.0, 51)
    close(proto.delta_s(), 0.1 * math.log(2**6 - 1), 1e-9)
    series = proto.slow_driving_population(30.0, 3)
    exact = proto.exact_population(30.0)
    assert max(abs(a - b) for a, b in zip(series, exact)) < 1e-5

    engines = cl.efficiency_sweep([4, 8, 12])
    assert all(e.p_ideal >= e.p_ld >= e.p_exact for e in engines)

    margin, supra = cl.criticality_check(0.5, 0.6, -2.0)
    close(margin, 0.7, 1e-15)
    assert supra

    try:
        cl.BathPair(0.5, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError for T_c > T_h")

    print("carnot_ld smoke test passed")


if __name__ == "__main__":
    main()
