"""Central charge of 2D critical lattices from simulated probe-spin decoherence."""

from .coherence import CoherenceSeries, coherence_at, coherence_series, verify_series
from .errors import (
    CapacityError,
    ContourError,
    IsingHoloError,
    RankDeficiencyError,
    ReconstructionError,
    ValidationError,
)
from .holography import (
    QuadratureConfig,
    ReconstructionResult,
    free_energy_at_zero_field,
    quadrature_error_bound,
    reconstruct_critical_ratio,
    reconstruct_ratio_infinite_line,
    reconstruct_ratio_periodic,
    simpson38,
)
from .ising import (
    BETA_C,
    LatticeSpec,
    ModelParams,
    brute_force_log_partition,
    build_transfer_matrix,
    log_partition_transfer,
)
from .logcomplex import LogComplex
from .scaling import (
    CentralChargeFit,
    FreeEnergyPoint,
    elongation_curve,
    fit_central_charge_aspect,
    fit_central_charge_strip,
)

__version__ = "0.1.0"
