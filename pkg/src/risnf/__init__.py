"""Near-field channel estimation for RIS-aided MIMO links under mutual coupling.

The package models uniform planar arrays, clustered near-field scattering,
dipole mutual coupling and the LS, MMSE and reduced-subspace LS estimators
of the cascaded UE-RIS-BS channel, analytically and by Monte Carlo.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .geometry import (ArrayConfig, Role, ScattererLocation, SystemConfig,  # noqa: E402
                       element_distance, element_position, nearfield_response)
from .correlation import (ClusterSet, CorrelationKind, CorrelationMatrix,  # noqa: E402
                          FactoredCovariance, SubspaceIntegrationGrid,
                          cascaded_covariance, kron_correlation, subspace_correlation,
                          synthesize_cluster_correlation)
from .coupling import (CouplingMatrix, DipoleConfig, ImpedanceMatrix,  # noqa: E402
                       apply_coupling_to_channel, array_coupling, build_impedance_matrix,
                       coupled_correlation, coupling_matrix, mutual_impedance,
                       self_impedance, sine_cosine_integrals)
from .spectral import (EigenSystem, RankReport, SubspaceBasis,  # noqa: E402
                       effective_rank, hermitian_eig, kron_eigs, psd_sqrt,
                       select_subspace)
from .training import (ObservationBatch, PhaseSchedule, PilotMatrix,  # noqa: E402
                       TrainingDesign, apply_adjoint, apply_forward,
                       dft_phase_schedule, gram, orthonormal_pilots)
from .estimators import (ErrorCovarianceFactored, NMSEResult, ls_error_covariance,  # noqa: E402
                         ls_estimate, mmse_error_covariance, mmse_estimate, nmse,
                         rsls_error_covariance, rsls_estimate, rsls_expected_error)
from .montecarlo import (ChannelRealization, build_cascaded, empirical_nmse,  # noqa: E402
                         sample_channel, simulate_observations, trial_rng)
from .scenario import Scenario  # noqa: E402
