"""Slicing4Meta: MSI orchestration over a MaaS resource pool with Meta-Immersion QoE."""

from .catalog import Catalog, MaaSModel, ModelKind
from .controllers import AllocationPolicy, ScalingAction, ScalingPolicy
from .experiments import Fig5Config, run_fig5
from .orchestrator import LifecycleState, Orchestrator, ServiceKind, ServiceRequest
from .qoe import QoEParams, UserSession, meta_immersion, mi_max_allocation
from .resources import IsolationDegree, Pool, ResourceVector, build_pool, may_share
from .scenario import Scenario, load_scenario, parse_scenario
from .simkernel import MetricsReport, Simulation, run

__version__ = "0.1.0"
