"""UAV hierarchical network models: curved-earth multi-ray A2G path
loss, stochastic-geometry A2A coverage, and the on-board packet filter,
plus a seeded experiment harness with CLI and HTTP front ends."""

__version__ = "0.1.0"

from . import errors
from .a2a import (A2aScenario, AirspaceVolume, CoverageResult,
                  PppRealization, averaged_sinr_sweep,
                  coverage_probability_analytic, coverage_probability_mc,
                  interference_laplace, nearest_distance_cdf,
                  nearest_distance_pdf, sample_ppp, sinr)
from .a2g import (A2gEndpoints, A2gLinkBudget, CemrGeometry, EarthModel,
                  GroundElectrical, RayContribution, divergence_factor,
                  free_space_path_loss, path_loss, received_field,
                  reflection_coefficient, solve_specular_geometry)
from .experiments import (ExperimentConfig, SweepRow, emit_csv, from_yaml,
                          load_config, render_csv, run_experiment,
                          run_selftest, to_yaml)
from .packet_filter import (FilterReport, FilterState, PositionPacket,
                            Verdict, generate_supplements,
                            minkowski_distance, process_packet,
                            read_packets, run_stream, warmup,
                            write_packets)
from .trajectories import load_bundled

__all__ = [name for name in dir() if not name.startswith("_")]
