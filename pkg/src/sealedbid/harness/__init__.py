from .bench import BenchmarkReport, BenchRow, run_benchmark
from .replay import TraceReport, verify_trace
from .runner import RunResult, run_scenario
from .scenario import Scenario, ScenarioError, builtin_scenario_path, load_scenario, parse_scenario

__all__ = [
    "BenchRow",
    "BenchmarkReport",
    "RunResult",
    "Scenario",
    "ScenarioError",
    "TraceReport",
    "builtin_scenario_path",
    "load_scenario",
    "parse_scenario",
    "run_benchmark",
    "run_scenario",
    "verify_trace",
]
