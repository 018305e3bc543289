"""A four-input deterministic broadcast channel, split two ways.

Receiver 1 sees the high bit of X, receiver 2 the parity.  Any rate pair a
zero-error code hits should sit inside the entropy region for some input
law; here the uniform law already covers all of them.
"""
from fractions import Fraction

from netcap.oracle import dbc_zero_error_rates
from netcap.regions import DeterministicBC, dbc_member_any, dbc_region, grid_distributions

bc = DeterministicBC(4, ((0, 0, 1, 1), (0, 1, 1, 0)))
uniform = tuple(Fraction(1, 4) for _ in range(4))

region = dbc_region(bc.with_input(uniform), names=("1", "2"))
for ineq in region.inequalities:
    print(f"  sum over {ineq.subset} <= {float(ineq.bound):.3f}")

for rates in dbc_zero_error_rates(bc):
    ok, law = dbc_member_any(bc, list(rates), [uniform] + grid_distributions(4, 4))
    print("zero-error rates", rates, "inside" if ok else "OUTSIDE", "with P(X) =", [str(p) for p in law] if law else None)
