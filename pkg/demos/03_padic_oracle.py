# Brute-force check of the exact laws with actual 2-adic matrices.
# Haar-random SL_3(Z_2) matrices are sampled modulo 2^N and multiplied.
from hlwalk.padic_oracle import validate_corners, validate_products

rep = validate_corners(1, 2, 12, (1,), samples=20_000, seed=7)
for atom in rep.to_json()["atoms"]:
    print(atom)
print("SL2 corners passed:", rep.passed())

rep = validate_products(2, 2, None, (1, 1), (1, 1), samples=3000, seed=7)
print("SL3 product: N =", rep.N, " max|z| =", round(rep.max_abs_z, 2),
      " precision failures =", rep.precision_failures)
