"""Joint sensing/computation/communication budgeting for federated edge learning.

A solver plus simulator: optimal sensing/communication powers and upload
times, the maximal total sensed-sample budget, adaptive per-round batch
schedules, round-by-round latency/energy metering, and a desk-scale wireless
sensing pipeline that relates spectrogram quality to sensing power.
"""

from .allocator import (
    AllocationSolution,
    DeviceAllocation,
    InfeasibleAllocationError,
    max_power_allocation,
    optimal_sensing_power,
    phi_k,
    solve_allocation,
)
from .channel import (
    ChannelParams,
    DeviceProfile,
    ergodic_capacity,
    large_scale_gain,
    mc_capacity_oracle,
)
from .config import (
    ConfigError,
    QualityConfig,
    ScenarioConfig,
    ScheduleConfig,
    default_config,
    generate_devices,
    load_config,
)
from .costs import (
    ConstraintReport,
    RoundCosts,
    SystemParams,
    audit_constraints,
    compute_time,
    round_energy,
    round_latency,
    sensing_time,
)
from .numerics import GridSpec, argmax_on_grid, expint_e1_scaled, expint_ei
from .scheduling import (
    BatchSchedule,
    BoundParams,
    InvalidHyperparameterError,
    adaptive_sqrt_schedule,
    baseline_schedule,
    lemma1_bound,
    loss_ratio_next_batch,
    optimal_fixed_batch,
    prop2_bound,
)
from .sensing import (
    ChirpParams,
    Primitive,
    QualityCurve,
    RawFrame,
    Spectrogram,
    default_scene,
    integrated_spectrogram,
    quality_vs_power,
    ssim,
    stft_cube,
    svd_band_filter,
    synthesize_frame,
)
from .simulation import (
    RoundRecord,
    SchemeSummary,
    SurrogateLossModel,
    build_scheme,
    compare_schemes,
    run_simulation,
    step_loss,
)

__version__ = "0.1.0"
