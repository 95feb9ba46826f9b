"""Split the XY-plaquette Hamiltonian into commuting ideals.

Each ideal is solved on its own and the top of the ground sector is
recombined from the per-ideal spectra.

    python demos/ideals_plaquette.py [l]
"""

import sys

from gaugegap import decompose, partition_ideals, xy_plaquette_2d
from gaugegap.ideals import sector_spectrum_via_ideals

l = int(sys.argv[1]) if len(sys.argv) > 1 else 6
code = xy_plaquette_2d(l)
dec = decompose(code)
part = partition_ideals(code, dec)
print(f"{code.name}: r = {dec.r}, {len(part)} ideals")
for row in part.summary():
    print("  ", row)
top = sector_spectrum_via_ideals(code, part, k=3, dec=dec)
print("top of the ground sector:", [round(float(x), 6) for x in top])
