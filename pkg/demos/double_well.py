"""Double-well chain: a gap that closes while each well stays gapped.

Prints lambda1, the gap, the sign cut of the second eigenvector and the
variational and bi-partition bounds for a few chain lengths.

    python demos/double_well.py
"""

import numpy as np

from gaugegap.cheeger import double_well, nu_bound, sign_cut, variational_gap_bound

print(f"{'d':>4} {'lambda1':>10} {'gap':>10} {'cut':>7} {'lambda1-ray':>12} {'nu':>10}")
for d in (8, 12, 16, 24, 32):
    h = double_well(d)
    vals, vecs = np.linalg.eigh(h)
    mask = sign_cut(vecs[:, -2])
    var = variational_gap_bound(h, vecs[:, -1], mask)
    nu = nu_bound(h).nu_value if d <= 16 else nu_bound(h, "sign-cut-local-search").nu_value
    print(f"{d:4d} {vals[-1]:10.6f} {vals[-1] - vals[-2]:10.2e} {int(mask.sum()):3d}/{d - int(mask.sum()):<3d}"
          f" {var.meta['gap_upper_estimate']:12.2e} {nu:10.6f}")

v = np.abs(np.linalg.eigh(double_well(32))[1][:, -1])
print("\nground amplitudes from the left end:", np.round(v[:6] / v[0], 4))
