"""Energy-optimal interactive beam alignment: scheduling, analysis, simulation."""

from .angles import AngleSet, PiecewisePrior, top_mass_subset
from .phy import SystemParams, ChannelDraw, draw_channel, sectored_gain, snr
from .detection import (DetectionDesign, design_detection, marcum_q1,
                        marcum_q1_complement, p_fa, p_md, solve_nu_star, threshold)
from .outage import (OutageDesign, design_outage, ccdf_gamma, inv_ccdf_gamma,
                     outage_capacity, psi_d, q_star_and_theta)
from .planner import (PlannerProblem, Schedule, ErrorAnalysis, InfeasibleSchedule,
                      build_problem, data_phase_value, error_analysis,
                      fraction_schedule, min_alignment_length, optimize_schedule,
                      plan, switch_rule_value, value_recursion)
from .policies import (AlignProbe, DataPhase, BisectionPolicy,
                       ExhaustiveSearchPolicy, FractionalSearchPolicy,
                       NonuniformFractionalSearchPolicy)
from .simulate import (AnalyticComparison, ErrorModel, FrameOutcome,
                       MonteCarloStats, analytic_vs_empirical,
                       calibrate_detection, run_frame, run_monte_carlo, trial_rng)

__version__ = "0.1.0"
