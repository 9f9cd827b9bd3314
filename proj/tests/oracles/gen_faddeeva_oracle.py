"""Writes tests/data/faddeeva_oracle.inc: erf, erfi and w at 40 digits."""

import pathlib

import mpmath as mp

mp.mp.dps = 40


def w(z):
    return mp.exp(-z * z) * mp.erfc(-1j * z)


def erfi(z):
    return mp.erf(1j * z) / 1j


def fmt(x):
    return mp.nstr(x, 20, min_fixed=-mp.inf, max_fixed=mp.inf)


def row(z, f):
    v = f(z)
    return f"  {{{fmt(z.real)}, {fmt(z.imag)}, {fmt(v.real)}, {fmt(v.imag)}}},"


general = [mp.mpc(x, y) for x in (-3.5, -0.7, 0.0, 0.3, 1.0, 2.2, 5.0)
           for y in (-0.4, 0.0, 0.25, 1.1, 2.6)]
upper = [mp.mpc(x, y) for x in (-12.0, -6.5, -1.3, 0.0, 0.2, 0.9, 3.1, 7.9, 8.1, 15.0)
         for y in (0.0, 0.05, 0.6, 2.0, 7.5, 9.0)]
diag = [mp.mpf(a) for a in (-25.0, -9.0, -3.3, -1.0, -0.34, -0.1, 0.0, 0.02, 0.2, 0.36,
                             0.5, 0.77, 1.0, 1.9, 4.0, 5.66, 7.9, 8.2, 12.5, 40.0)]

out = ["// Generated by tests/oracles/gen_faddeeva_oracle.py (mpmath, 40 digits).",
       "// {Re z, Im z, Re f(z), Im f(z)}", ""]
out.append("static const double kErfOracle[][4] = {")
out += [row(z, mp.erf) for z in general]
out.append("};")
out.append("static const double kErfiOracle[][4] = {")
out += [row(z, erfi) for z in general]
out.append("};")
out.append("static const double kWOracle[][4] = {")
out += [row(z, w) for z in upper]
out.append("};")
out.append("// {a, 0, Re erfi((1+i)a), Im erfi((1+i)a)}")
out.append("static const double kDiagonalErfiOracle[][4] = {")
out += [row(mp.mpc(a, 0), lambda z: erfi((1 + 1j) * z.real)) for a in diag]
out.append("};")
out.append("// {a, 0, Re w((1+i)a), Im w((1+i)a)} for a >= 0")
out.append("static const double kDiagonalWOracle[][4] = {")
out += [row(mp.mpc(abs(a), 0), lambda z: w((1 + 1j) * z.real)) for a in diag if a >= 0]
out.append("};")

dest = pathlib.Path(__file__).resolve().parent.parent / "data" / "faddeeva_oracle.inc"
dest.write_text("\n".join(out) + "\n")
