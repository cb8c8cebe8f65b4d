from .effects import Grant, SetPriority, Spin, Suspend
from .semaphore import (
    ObtainResult,
    ObtainStatus,
    QueueDiscipline,
    ReleaseResult,
    Semaphore,
    SemaphoreTable,
    Waiter,
)
from .protocols import (
    PROTOCOL_HOOKS,
    Placement,
    PlacementKind,
    ProtocolHooks,
    WaitingSemantics,
    dynamic_ceiling,
    hooks_for,
    icpp_on_sync_processor,
    protocol_placement,
)
