# A short tour of Hall-Littlewood polynomials for a few rank-two root systems.
# Coweights are written in the basis of simple coroots throughout.
from fractions import Fraction

from hlwalk.group_algebra import tp_eval, tp_format
from hlwalk.hall_littlewood import hl_expand, lr_coefficients
from hlwalk.root_system import build_root_system, poincare_polynomial, weyl_dimension

for fam in "ACG":
    rs = build_root_system({"family": fam, "rank": 2})
    print(rs.label, "|W| =", rs.weyl_order, " W(t) =", tp_format(poincare_polynomial(rs)))

# P_lambda for the A2 adjoint coweight: the six roots with coefficient 1
# and a constant term 2 - t - t^2
A2 = build_root_system({"family": "A", "rank": 2})
for nu, c in sorted(hl_expand(A2, (1, 1)).coefficients.items(), reverse=True):
    print(f"  e^{list(nu)}: {tp_format(c)}")

# t = 0 gives Weyl characters, so the coefficient sum is a dimension
G2 = build_root_system({"family": "G", "rank": 2})
for lam in G2.dominant_coweights(8):
    s = sum(tp_eval(c, 0) for c in hl_expand(G2, lam).coefficients.values())
    print("G2", lam, "t=0 sum", s, "dimension", weyl_dimension(G2, lam))

# structure constants of P_mu P_nu, here in C2
C2 = build_root_system({"family": "C", "rank": 2})
table = lr_coefficients(C2, (1, 1), (1, 2))
for lam, c in sorted(table.coefficients.items(), reverse=True):
    print("  c^", lam, "=", tp_format(c), " at t=1/2:", tp_eval(c, Fraction(1, 2)))
