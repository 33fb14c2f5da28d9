"""
Orbit and limit set of a Fuchsian group
=======================================

The orbit of 0 under all reduced words of length at most 7 accumulates on the
unit circle. We write the points to an SVG file next to this script.

"""

from pathlib import Path

import numpy as np

from uniformizer.fuchsian import enumerate_elements, orbit, punctured_torus_group

E = enumerate_elements(punctured_torus_group(3, 3), 7)
pts = orbit(E, 0j)
print(len(pts), "orbit points, max |z| =", np.max(np.abs(pts)))

out = ['<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1.05 -1.05 2.1 2.1">',
       '<circle cx="0" cy="0" r="1" fill="none" stroke="black" stroke-width="0.004"/>']
out += [f'<circle cx="{p.real:.5f}" cy="{-p.imag:.5f}" r="0.003"/>' for p in pts]
out.append("</svg>")
path = Path(__file__).with_suffix(".svg")
path.write_text("\n".join(out) + "\n")
print("wrote", path)
