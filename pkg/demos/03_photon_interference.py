"""Two-photon interference at the heart of the post-selection.

Identical photons bunch on a 50:50 splitter; the symmetric projection keeps
exactly the branches where both detectors of one arm fire together.  The
coincidence rate interpolates linearly between the interfering and
distinguishable limits as the temporal overlap degrades.
"""

import math

from clonesim import beamsplitter, detection_bookkeeping, one_photon, polarization_singlet
from clonesim.optics import PATH_A, PATH_B, mode_id, symmetric_project
from clonesim.qstate import tensor


def pair(pa, pb):
    return tensor(one_photon(PATH_A, {pa: 1.0}), one_photon(PATH_B, {pb: 1.0}))


print("same-polarization pair on the splitter (bunching):")
out = beamsplitter(pair("H", "H"), PATH_A, PATH_B)
for label, amp in sorted(out.amps.items(), key=lambda kv: str(kv[0])):
    print(f"  {label}: {amp:+.6f}")
print("  no amplitude with one photon per output port survives")

print("\nsymmetric projection acting on the four polarization basis pairs:")
for pa, pb in (("H", "H"), ("H", "V"), ("V", "H"), ("V", "V")):
    res = symmetric_project(pair(pa, pb))
    terms = []
    for label, amp in sorted(res.raw_amplitudes.items(), key=lambda kv: str(kv[0])):
        p3 = "H" if label.level(mode_id("out3", "H")) == "1" else "V"
        p4 = "H" if label.level(mode_id("out4", "H")) == "1" else "V"
        terms.append(f"{amp.real:+.2f}|{p3}{p4}>")
    print(f"  |{pa}{pb}>  ->  {' '.join(terms)}   (p = {res.probability:.4f})")

print("\nthe singlet is the unique heralded failure:")
res = symmetric_project(polarization_singlet())
print(f"  projection probability: {res.probability}")

print("\ncoincidence rate vs temporal overlap |c| for the protocol-like pair")
print("(symmetric two-photon state, <P_sym> = 1):")
sym = (pair("H", "V") + pair("V", "H")) * (1 / math.sqrt(2))
for c in (1.0, 0.9, math.sqrt(0.5), 0.3, 0.0):
    rep = detection_bookkeeping(sym, overlap_c=c)
    print(f"  |c| = {c:.3f}: p_coincidence = {rep.p_coincidence:.6f}  "
          f"(V = {rep.visibility:.3f})")
print("fully distinguishable photons fall back to the classical 1/4.")
