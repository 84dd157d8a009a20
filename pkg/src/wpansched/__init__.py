"""Concurrent slot scheduling for directional mmWave WPANs."""

from .radio import (AntennaConfig, ConfigError, RadioParams, UnreachableLinkError,
                    antennas_for_beamwidth, flat_top_gain, link_rate, slots_required)
from .harness import RunRecord, SimConfig, emit_plot_data, run_scenario, run_sweep
from .metrics import MetricsReport, concurrency_gain, jain_index, network_throughput, slot_consumption
from .oracle import brute_force_optimum
from .scheduler import (InvariantError, Policy, ScheduleMap, age_priorities, check_schedule,
                        emhct_e_schedule, emhct_f_schedule, mhct_schedule, schedule_superframe,
                        sort_hops)
from .topology import (ConflictOracle, FlowRequest, HopTransmission, Network, Node,
                       build_conflict_graph, conflicts, convert_to_multihop, generate_topology,
                       link_weight)
from .waterfill import WaterfillProblem, WaterfillSolution, bound_throughput, solve_waterfill

__version__ = "0.1.0"
