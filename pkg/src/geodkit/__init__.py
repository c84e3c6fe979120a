"""Geodetic computation kernel.

Submodules: core (angles, ellipsoids, latitudes, meridian arc), sphere
(spherical trigonometry and sidereal time), coords (geodetic/Cartesian,
local frames), geodesics (direct/inverse problems), projections (Lambert,
UTM), reductions (distance corrections), datum (3D/2D transformations),
adjust (least squares, DOP), orbits (two-body motion), heights (height
systems), cli (batch frontend).
"""

__version__ = "0.1.0"
