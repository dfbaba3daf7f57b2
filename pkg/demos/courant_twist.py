"""Twisted Courant algebra on R^3 and B-field gauge transformations.

Pick a closed three-form, take a few random sections of TM + T*M, and watch
the Jacobi identity hold for the twisted bracket.  Then conjugate by a B-field
and check that the twist shifts by dB.
"""

import numpy as np

from eulerlike.chart import OneForm, ThreeForm, TwoForm, VectorField
from eulerlike.dirac import CourantSection, TwistedCourant, bfield, courant_bracket

rng = np.random.default_rng(3)
eta = ThreeForm({(0, 1, 2): "-exp(x3)"}, 3)
bg = TwistedCourant(3, eta)


def section():
    c = np.round(rng.uniform(-1, 1, 6), 3)
    X = VectorField([f"{c[0]}*x2", f"{c[1]}*x1*x3", f"{c[2]} + x1^2"], 3)
    a = OneForm([f"{c[3]}*x3", f"sin(x1) + {c[4]}", f"{c[5]}*x1*x2"], 3)
    return CourantSection(X, a)


s1, s2, s3 = section(), section(), section()
p = rng.uniform(-1, 1, (4, 3))
br = lambda a, b: courant_bracket(a, b, bg)
jac = br(s1, br(s2, s3))(p) - br(br(s1, s2), s3)(p) - br(s2, br(s1, s3))(p)
print("Jacobi defect", np.abs(jac).max())

B = TwoForm({(0, 1): "x3^2", (1, 2): "cos(x1)"}, 3)
lhs = courant_bracket(bfield(B, s1), bfield(B, s2), bg.shifted(B))(p)
rhs = bfield(B, courant_bracket(s1, s2, bg))(p)
print("gauge conjugation defect", np.abs(lhs - rhs).max())
