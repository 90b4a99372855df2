"""Wind-aware drone delivery planning over a skyway network.

The package plans single-package deliveries across a graph of rooftop
recharging stations, accounts for wind in travel time and battery use,
selects candidate drones through a skyline over their QoS attributes, and
re-plans locally when execution deviates from the schedule.
"""

from .errors import (
    ConfigError,
    DeadEndError,
    EmptyCandidateSetError,
    InstanceTooLargeError,
    LivelockError,
    ReservationConflictError,
    RouteInfeasibleError,
    SkywayError,
    SpliceMismatchError,
    UnreachableDestinationError,
    WindInfeasibleError,
)
from .model import (
    CompositionPlan,
    DeliveryRequest,
    DroneSpec,
    Node,
    PadCalendar,
    PlanLeg,
    SkywayNetwork,
    SkywaySegment,
    next_pad_available,
    release_pad,
    reserve_pad,
    validate_plan,
)
from .wind import (
    EnergyParams,
    LegKinematics,
    WindField,
    WindSample,
    battery_consumed,
    ground_speed,
    travel_time,
)
from .skyline import (
    QualityDirection,
    SkylineResult,
    bnl_skyline,
    dominates,
    payload_filter,
    select_drone,
)
from .planner import (
    State,
    compose_bruteforce,
    compose_greedy,
    compose_lookahead,
    expand,
    score_state,
    simulate_route,
)
from .resilience import (
    ExecutionTrace,
    FailureEvent,
    PerturbationModel,
    PlanFragment,
    RecompositionEpisode,
    detect_failure,
    execute_resilient,
    failure_analysis,
    project_delays,
    recompose,
    recompose_global_bruteforce,
    update_plan,
)

__version__ = "0.1.0"
