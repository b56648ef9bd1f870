"""Smoke test for the pointscatter_py extension module.

Build and install it first:

    pip install --no-build-isolation -e crates/python
"""

import cmath
import math

import pointscatter_py as ps


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    pi = ps.PointInteraction(math.pi / 2, 4 * math.pi / 3, [0.3, 0.5, math.sqrt(0.66)])

    s = pi.s_matrix(1.7)
    for n in (2, 9):
        a = pi.s_power(1.7, n, "matrix-power")
        b = pi.s_power(1.7, n, "chebyshev")
        assert all(close(a[i][j], b[i][j], 1e-10) for i in range(2) for j in range(2))
    unit = sum(abs(s[i][0]) ** 2 for i in range(2))
    assert close(unit, 1.0, 1e-12), unit

    grouped = pi.grouped_worldlines(1.7, 3)
    s3 = pi.s_power(1.7, 3)
    assert all(close(grouped[i][j], s3[i][j], 1e-12) for i in range(2) for j in range(2))
    assert len(pi.worldlines(1.7, 3)) == 16

    free = ps.CircleSystem(ps.PointInteraction.preset("reflectionless:theta=0"), 1.0)
    ks = sorted(r.k for r in free.positive_roots(20.0))
    expected = sorted(2 * math.pi * m for m in (1, 2, 3) for _ in range(2))
    assert all(close(a, b, 1e-10) for a, b in zip(ks, expected)), ks

    dp = ps.CircleSystem(ps.PointInteraction.preset("delta-prime:c=0.7"), 1.0)
    k_spec = dp.kernel(0.3, 0.75, 0.1, "spectral")
    k_path = dp.kernel(0.3, 0.75, 0.1, "pathsum")
    k_closed = dp.kernel(0.3, 0.75, 0.1, "closed")
    assert close(k_spec, k_closed, 1e-8) and close(k_path, k_closed, 1e-8), (k_spec, k_path, k_closed)

    sys = ps.CircleSystem(pi, 1.0)
    lhs, rhs, err = sys.trace_check(0.5, "+")
    assert err < 1e-7 * max(1.0, abs(lhs)), (lhs, rhs)

    root = sys.positive_roots(10.0, "+")[0]
    values = sys.eigenfunction(root, [0.1 * i + 0.05 for i in range(10)])
    assert all(cmath.isfinite(v) for v in values)

    try:
        ps.PointInteraction(1.0, 2.0, [1.0, 1.0, 0.0])
    except ValueError:
        pass
    else:
        raise AssertionError("non-unit e accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
