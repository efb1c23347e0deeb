"""Numerical laboratory for planar shear-flow spectra, vorticity transport
structure, and near-integrable wave chaos.

Subpackage map:

* ``grids``/``fields``/``fields3d`` -- spectral calculus on periodic tori
* ``spectra``     -- linearized shear operator, eigenvalue tracking in viscosity
* ``lax``         -- transport compatibility checks and gauge transforms
* ``forcing``     -- time forcing protocols and the three-frequency chaotic clock
* ``models``      -- wave/envelope model steppers (parity-restricted spectral)
* ``diagnostics`` -- section maps and largest Lyapunov exponents
* ``runio``       -- config parsing, output records, atomic writes
* ``cli``         -- command line front end
"""

__version__ = "0.1.0"
