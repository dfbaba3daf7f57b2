"""Linearize X = x + x^2 on the line and compare with the closed form v/(1-v).

The flow of X starting at v sits on the curve through v tangent to the
Euler field, so the embedding can be written down by hand.  The numerical
construction should reproduce it to integration accuracy.
"""

import numpy as np

from eulerlike.chart import Transversal, VectorField
from eulerlike.euler import linearize

X = VectorField(["x1 + x1^2"], 1)
emb = linearize(X, Transversal(1, 0))

v = np.linspace(-0.5, 0.5, 11)[:, None]
exact = v[:, 0] / (1 - v[:, 0])
approx = emb(v)[:, 0]
for a, b, c in zip(v[:, 0], approx, exact):
    print(f"v = {a:+.2f}   psi(v) = {b:+.12f}   v/(1-v) = {c:+.12f}")
print("max error", np.abs(approx - exact).max())

# the inverse is m/(1+m)
m = np.linspace(-0.3, 1.0, 7)[:, None]
print("inverse error", np.abs(emb.inverse(m)[:, 0] - m[:, 0] / (1 + m[:, 0])).max())
