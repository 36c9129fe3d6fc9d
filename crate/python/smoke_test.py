"""Quick end-to-end check of the compiled module."""

import math

import mzfaber


def main():
    sys = mzfaber.bethe_chain(2, nodes=100, boundary="pinned", normalize=True)
    red = sys.reduce(1)
    spec = red.spectrum()
    fmap = mzfaber.EllipseMap.fit(spec, 0.0)
    print(f"dim={sys.dim} reduced={red.dim} map={fmap!r}")

    grid = [0.5 * i for i in range(21)]
    exact = mzfaber.vacf_matrix_exp(sys, 1, grid)
    for t, v in zip(grid, exact):
        assert abs(v - mzfaber.vacf_analytic_l2(t)) < 1e-10

    kern = red.kernel("faber", 40, fmap)
    for t in (0.0, 1.0, 5.0):
        g, _ = kern(t)
        g_ref, _ = red.exact_kernel(t)
        assert abs(g - g_ref) < 1e-6, (t, g, g_ref)

    times, values = red.solve(kern, 1e-3, 5.0, 1.0)
    err = abs(values[-1] - mzfaber.vacf_analytic_l2(times[-1]))
    print(f"gle error at t={times[-1]:.1f}: {err:.2e}")
    assert err < 1e-3

    assert abs(mzfaber.bessel_j(0, 1.0) - 0.7651976865579666) < 1e-12
    ev = mzfaber.eigenvalues([[0.0, 1.0], [-1.0, 0.0]])
    assert sorted(round(z.imag, 12) for z in ev) == [-1.0, 1.0]
    rot = mzfaber.expm_apply([[0.0, 1.0], [-1.0, 0.0]], math.pi / 2, [1.0, 0.0])
    assert abs(rot[1] + 1.0) < 1e-12

    try:
        red.kernel("chebyshev", 4)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown family accepted")

    print("ok")


if __name__ == "__main__":
    main()
