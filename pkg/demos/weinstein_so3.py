"""Split the Lie-Poisson structure of so(3)* along the z-axis.

Away from the origin the symplectic leaves are spheres.  Near (0,0,1) the
Poisson structure should split as a symplectic piece on the slice through
the point times a zero transverse structure.  We run the builtin scenario and
print each check with its worst residual.
"""

from eulerlike.scenarios import builtin, run_scenario

report = run_scenario(builtin("so3-star"), samples=50)
for check in report.checks:
    print(f"{check.name:28s} {check.max_residual:.2e}  tol {check.tol:.0e}  "
          f"{'ok' if check.passed else 'FAILED'}")
print("overall:", "pass" if report.passed else "fail")
