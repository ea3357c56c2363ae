"""polysl2: spectra and dynamics of polynomially deformed sl(2) models.

The package splits into five layers:

* :mod:`polysl2.algebra`  -- structure polynomials, sectors, the ladder
  reduction and gauge normalization,
* :mod:`polysl2.catalog`  -- the concrete model families (two-mode,
  multimode, Dicke) reduced to sector data,
* :mod:`polysl2.exact`    -- tridiagonal assembly, exact diagonalization
  and the Bethe-root validation of eigenvectors,
* :mod:`polysl2.coherent` -- displacement matrices and the cluster /
  cluster-mean-field variational spectra with their stationarity radii,
* :mod:`polysl2.dynamics` -- Bloch-type quasiclassical flows and quantum
  propagators with observable time series.

:mod:`polysl2.runio` and :mod:`polysl2.cli` wrap everything for batch use.
"""

from .algebra import (PhiPolynomial, Sector, StructurePolynomial, eval_psi,
                      gauge_normalize, ladder_norm, phi_from_psi,
                      validate_sector)
from .catalog import (ModelSpec, SectorLabels, build_phi_catalog, build_psi,
                      enumerate_sectors, labels_from_momenta,
                      reduce_coefficients)
from .coherent import (ApproxErrorReport, DisplacementMatrix, GCSParameter,
                       VariationalSpectrum, approx_error_report,
                       approx_hamiltonian, closed_form_resonance,
                       displacement_for, displacement_matrix, energy_cmf,
                       energy_cq, energy_cq_ground_series, error_functionals,
                       linear_radius, solve_stationarity_cmf,
                       solve_stationarity_cq, trig_kernels,
                       variational_spectrum)
from .dynamics import (BlochState, ObservableSeries, QuantumState, Trajectory,
                       basis_state, bloch_energy, bloch_flow, bloch_rhs,
                       displaced_state, exact_propagator, hamilton_rhs,
                       integrate, model_observable, observable_series,
                       observable_projector, observable_v0, qa_propagator)
from .exact import (BethePolynomial, BetheReport, EigenSolution,
                    TridiagonalBlock, assemble_block, bethe_check,
                    diagonalize, equidistant_reference, truncated_spectrum)
from . import errors

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
