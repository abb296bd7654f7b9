"""EF1 allocations of indivisible goods with few soft-conflict violations."""
from .core import (
    UNASSIGNED,
    Allocation,
    AllocationError,
    AllocationReport,
    Instance,
    InstanceError,
    OpCounter,
    baseline,
    component_balance_check,
    is_balanced,
    is_ef1,
    pad_with_dummies,
    report,
    violation_count,
)
from .cyclic import cut_and_choose, cyclic_shift_rr, sort_goods_desc
from .general import degree_ef1_solve, graph_ef1
from .solve import solve

__all__ = [
    "UNASSIGNED",
    "Allocation",
    "AllocationError",
    "AllocationReport",
    "Instance",
    "InstanceError",
    "OpCounter",
    "baseline",
    "component_balance_check",
    "cut_and_choose",
    "cyclic_shift_rr",
    "degree_ef1_solve",
    "graph_ef1",
    "is_balanced",
    "is_ef1",
    "pad_with_dummies",
    "report",
    "solve",
    "sort_goods_desc",
    "violation_count",
]
