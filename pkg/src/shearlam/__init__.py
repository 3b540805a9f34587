"""Shear coordinates for surface group representations along maximal
geodesic laminations.

The package is organized in five layers:

* :mod:`shearlam.flags` -- exact-arithmetic invariants of flag tuples
  (wedge brackets, triple/quadruple/double ratios, positivity).
* :mod:`shearlam.tracks` -- trivalent train tracks, orientation covers,
  tangent-cycle spaces and measure cones.
* :mod:`shearlam.unroll` -- universal-cover combinatorics of
  finitely-many-leaved maximal laminations (plaque fans, deck elements).
* :mod:`shearlam.shearing` -- slithering products, shear vectors and
  shearing cycles, the Fuchsian forward pipeline.
* :mod:`shearlam.param` -- the parameter cone, dimension audits,
  holonomy reconstruction and length functions.
"""

__version__ = "0.1.0"
