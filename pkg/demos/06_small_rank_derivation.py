"""
Deriving the operator from scratch at small rank
================================================

For rank <= 2 the whole construction fits in exact lattice arithmetic:
push the Laplacian through the orbit sums, reduce every Weyl-invariant
exponential sum back to a polynomial in tau by dominance recursion, and
read off A and B.  This independently reproduces the published A1 form
and cross-checks the numeric oracle.
"""

from tauforge.derive import derive_operator
from tauforge.oracle import verify_tables
from tauforge.rootsys import build_system

for kind in ("A1", "A2", "G2"):
    sysr = build_system(kind)
    op = derive_operator(sysr)
    print(f"{kind}:")
    for i in range(1, sysr.rank + 1):
        for j in range(i, sysr.rank + 1):
            print(f"  A{i}{j} = {op.a_entry(i, j)}")
    for i in range(1, sysr.rank + 1):
        print(f"  B{i}  = {op.b_entry(i)}")
    rep = verify_tables(op, samples=8, seed=7, tol=1e-10, precision="hp")
    worst = max(e["max_rel_residual"] for e in rep["entries"])
    print(f"  oracle agreement at 8 points: {worst:.1e}")
    print()

print("A1 matches the closed form A = 2 - tau^2/2, B = -(1/2)(1+2nu) tau;")
print("the structure laws (leading terms, point-zero identity) continue")
print("through A2 and G2 with the same machinery that audits E7.")
