"""ringhom: two-photon interference in backscattering double-bus microrings.

The library models rings whose internal sidewall backscattering couples the
two circulation directions, propagates few-photon Fock states through the
resulting 4-port scattering matrices via exact matrix permanents, composes
chains of rings on shared buses, and maps where over (tau, theta, gamma,
alpha) the two-photon coincidence vanishes while photons still reach the
detectors. The ``ringhom`` command-line tool runs configured experiments and
writes CSV data, SVG/PNG figures, and a JSON manifest.
"""

__version__ = "0.1.0"

from .analysis import (
    AltIoStudy,
    HommCurve,
    HommRoot,
    ProbabilityGrid,
    SliceTable,
    alternate_io_study,
    default_tau_axis,
    default_theta_axis,
    find_homm_roots,
    find_homm_tau,
    probability_grid,
    probability_slice,
    trace_homm_curve,
)
from .config import AxisSpec, ConfigError, ExperimentConfig, RingConfig, parse_config
from .contours import extract_contours
from .experiments import RunResult, run_experiment
from .fock import (
    DetectionSummary,
    FockState,
    OutputDistribution,
    coincidence_probability,
    output_distribution,
    permanent,
    transition_amplitude,
)
from .networks import (
    ChainSpec,
    ChainTemplate,
    CompositionError,
    RingTemplate,
    chain_oracle,
    compose_chain,
    compose_pair,
)
from .scattering import (
    InteriorState,
    RingParams,
    ScatteringMatrix,
    SolverError,
    backscatter_matrix,
    build_scattering,
    coupler_matrix,
    interior_state,
    transmission_spectrum,
)

__all__ = [
    "__version__",
    "AltIoStudy",
    "AxisSpec",
    "ChainSpec",
    "ChainTemplate",
    "CompositionError",
    "ConfigError",
    "DetectionSummary",
    "ExperimentConfig",
    "FockState",
    "HommCurve",
    "HommRoot",
    "InteriorState",
    "OutputDistribution",
    "ProbabilityGrid",
    "RingConfig",
    "RingParams",
    "RingTemplate",
    "RunResult",
    "ScatteringMatrix",
    "SliceTable",
    "SolverError",
    "alternate_io_study",
    "backscatter_matrix",
    "build_scattering",
    "chain_oracle",
    "coincidence_probability",
    "compose_chain",
    "compose_pair",
    "coupler_matrix",
    "default_tau_axis",
    "default_theta_axis",
    "extract_contours",
    "find_homm_roots",
    "find_homm_tau",
    "interior_state",
    "output_distribution",
    "parse_config",
    "permanent",
    "probability_grid",
    "probability_slice",
    "run_experiment",
    "trace_homm_curve",
    "transition_amplitude",
    "transmission_spectrum",
]
