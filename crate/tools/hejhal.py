#!/usr/bin/env python3
"""Hecke eigenvalues of a level-one Maass cusp form by Hejhal's method.

Writes a `cuspvariance-maass v1` file. The spectral parameter is refined by a
secant iteration on the residual of the dropped linear equation, then the
coefficients are recomputed at a lower height to reach n = NMAX.

    python3 tools/hejhal.py even 13.7797513518907 data/maass_even_r13.78.txt
    python3 tools/hejhal.py odd 9.5336952613535 data/maass_odd_r9.53.txt
"""
import sys
from mpmath import mp, mpf, besselk, cos, sin, pi, sqrt, matrix, lu_solve, nint

mp.dps = 30
M = 30          # unknowns in the linear system
NMAX = 100      # eigenvalues written to the file


def pullback(x, y):
    while True:
        x = x - nint(x)
        r2 = x * x + y * y
        if r2 >= 1:
            return x, y
        x, y = -x / r2, y / r2


def trig(parity):
    return cos if parity == "even" else sin


def kappa(r, n, y):
    return sqrt(y) * besselk(1j * r, 2 * pi * n * y).real


def system(r, parity, Y, Q, rows, cols):
    tf = trig(parity)
    pts = []
    for m in range(1, Q + 1):
        x = (m - mpf(1) / 2) / (2 * Q)
        xs, ys = pullback(x, Y)
        pts.append((x, xs, ys))
    kst = {}
    for (_, xs, ys) in pts:
        for l in cols:
            kst[(ys, l)] = kappa(r, l, ys)
    V = {}
    for n in rows:
        for l in cols:
            s = mpf(0)
            for (x, xs, ys) in pts:
                s += 2 * kst[(ys, l)] * tf(2 * pi * l * xs) * tf(2 * pi * n * x)
            V[(n, l)] = s / Q
    return V


def solve(r, parity):
    Y = mpf("0.35")
    Q = M + 12
    V = system(r, parity, Y, Q, range(1, M + 1), range(1, M + 1))
    kY = {n: kappa(r, n, Y) for n in range(1, M + 1)}
    # Unknowns c(2..M) with c(1) = 1; equations n = 2..M.
    A = matrix(M - 1, M - 1)
    b = matrix(M - 1, 1)
    for i, n in enumerate(range(2, M + 1)):
        for j, l in enumerate(range(2, M + 1)):
            A[i, j] = V[(n, l)] - (kY[n] if n == l else 0)
        b[i] = -V[(n, 1)]
    c = lu_solve(A, b)
    coeffs = {1: mpf(1)}
    for j, l in enumerate(range(2, M + 1)):
        coeffs[l] = c[j]
    res = sum(V[(1, l)] * coeffs[l] for l in coeffs) - kY[1]
    return coeffs, res


def refine(r, parity):
    r0, r1 = mpf(r), mpf(r) + mpf("1e-9")
    f0 = solve(r0, parity)[1]
    f1 = solve(r1, parity)[1]
    for _ in range(8):
        if f1 == f0:
            break
        r2 = r1 - f1 * (r1 - r0) / (f1 - f0)
        r0, f0 = r1, f1
        r1 = r2
        f1 = solve(r1, parity)[1]
        if abs(r1 - r0) < mpf("1e-20"):
            break
    return r1


def extend(r, parity, coeffs):
    """c(n) for n ≤ NMAX from the known expansion, sampled at a lower height."""
    Y = mpf("0.045")
    Q = 2 * NMAX
    tf = trig(parity)
    out = {}
    pts = []
    for m in range(1, Q + 1):
        x = (m - mpf(1) / 2) / (2 * Q)
        xs, ys = pullback(x, Y)
        val = sum(2 * coeffs[l] * kappa(r, l, ys) * tf(2 * pi * l * xs) for l in coeffs)
        pts.append((x, val))
    for n in range(1, NMAX + 1):
        s = sum(val * tf(2 * pi * n * x) for (x, val) in pts) / Q
        out[n] = s / kappa(r, n, Y)
    return out


def main():
    parity, r, path = sys.argv[1], mpf(sys.argv[2]), sys.argv[3]
    r = refine(r, parity)
    coeffs, res = solve(r, parity)
    lam = extend(r, parity, coeffs)
    c1 = lam[1]
    with open(path, "w") as fh:
        fh.write("cuspvariance-maass v1\n")
        fh.write(f"t {mp.nstr(r, 20)}\n")
        fh.write(f"parity {parity}\n")
        for n in range(1, NMAX + 1):
            fh.write(f"{n} {mp.nstr(lam[n] / c1, 15) if n > 1 else '1'}\n")
    print("R =", mp.nstr(r, 20), "residual", mp.nstr(res, 5))
    for m, n in [(2, 3), (2, 2), (3, 5), (4, 5), (10, 10)]:
        print(m, n, mp.nstr(lam[m] * lam[n] / c1**2 - sum(lam[m * n // d // d] / c1 for d in range(1, min(m, n) + 1) if m % d == 0 and n % d == 0), 5))


if __name__ == "__main__":
    main()
