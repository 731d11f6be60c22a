"""Instance generators, pairwise-join baselines and the benchmark harness."""
from .baseline import BaselineStats, best_binary_plan, binary_join_plan, pairwise_join_size
from .bench import bench_compare, fit_slope, write_report
from .generators import (
    Instance,
    gen_extension_instance,
    gen_lw_bad_instance,
    gen_random_instance,
    gen_relaxed_lb_instance,
    gen_triangle_instance,
    random_extension_instance,
    relaxed_lb_size,
)

__all__ = [
    "BaselineStats",
    "Instance",
    "bench_compare",
    "best_binary_plan",
    "binary_join_plan",
    "fit_slope",
    "gen_extension_instance",
    "gen_lw_bad_instance",
    "gen_random_instance",
    "gen_relaxed_lb_instance",
    "gen_triangle_instance",
    "pairwise_join_size",
    "random_extension_instance",
    "relaxed_lb_size",
    "write_report",
]
