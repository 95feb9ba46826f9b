"""Walk through the sector search for the 4x4 compass model.

Decomposes the code, lists every candidate sector the single-frustration
search solves, and shows where the gap comes from.

    python demos/sector_table.py [l]
"""

import sys

from gaugegap import compass_2d, decompose, spectral_gap

l = int(sys.argv[1]) if len(sys.argv) > 1 else 4
code = compass_2d(l)
dec = decompose(code)
print(f"{code.name}: n={code.n}  counts {dec.counts()}")
print(f"ground sector block dimension 2^{dec.r} = {1 << dec.r}")

rep = spectral_gap(code)
print(f"\nlambda1 = {rep.lambda1:.6f}")
print(f"{'sector':>16} {'kind':>26} {'w':>3} {'lambda':>11} {'lambda1-lambda':>15}")
for c in rep.candidates:
    mark = "  <- gap" if c is rep.argmin_candidate else ""
    print(f"{str(c.sector):>16} {c.kind:>26} {c.w_frustrated:>3} {c.value:11.6f} {rep.lambda1 - c.value:15.6f}{mark}")
print(f"\ngap = {rep.gap:.6f}")
