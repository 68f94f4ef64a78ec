"""Quasi-steady current under the two impedance laws.

Run from the repository root:  python demos/oracle_curves.py
"""
import numpy as np

from gfm_htva import qss_current_tva, qss_current_vav
from gfm_htva.limiter import LimiterParams

params = LimiterParams()

# The threshold law holds the current at I_max only while the drive voltage
# stays at or below V_n. The voltage-based law holds it at I_max for any drive.
print("   dv    tva     vav")
for dv in np.linspace(0.0, 2.0, 11):
    tva = qss_current_tva(float(dv), params)
    vav = qss_current_vav(float(dv), params)
    print("%5.2f  %s  %6.3f" % (dv, "  -   " if tva is None else "%6.3f" % tva, vav))

# Where does the threshold law cross 1.02 I_max?
dv = np.linspace(1.0, 3.0, 20001)
i = np.array([qss_current_tva(float(v), params) for v in dv])
print("\nthreshold law exceeds 1.02 I_max above dv = %.3f pu" % dv[np.argmax(i > 1.02 * params.i_max)])
