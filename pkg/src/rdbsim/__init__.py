"""Monte Carlo simulation of randomly-directional beamforming under line-of-sight channels."""

from .bounds import (
    AsymptoticRatio,
    BoundBracket,
    cone_nonempty_probability,
    cone_probability,
    corollary1_ratio,
    fro_empirical,
    fro_theoretical,
    lemma1_bounds,
    perfect_csi_asymptote,
    thm1_bounds,
    thm2_ratio,
    thm3_bounds,
    thm4_bounds,
    thm5_bounds,
)
from .channels import GainModel, UrLosUser, UrLosUsers, sample_rayleigh, sample_urlos
from .engine import (
    ProbabilityEstimate,
    RateEstimate,
    SchemeConfig,
    SweepSpec,
    empirical_beam_power,
    empirical_cone,
    empirical_exceedance,
    estimate_rate,
    estimate_ratio_to_perfect_csi,
    run_sweep,
)
from .kernel import beam_power, fejer_gain, inner_product, steering_vector, wrap_direction
from .schemes import (
    BeamGrid,
    FixedPerUser,
    FixedTotal,
    Scheme,
    TrialOutcome,
    make_beam_grid,
    perfect_csi_rate,
    rbf_rayleigh,
    rdb_multibeam_multi_user,
    rdb_multibeam_single_user,
    rdb_single_beam,
)
from .streams import RandomStream

__version__ = "0.1.0"
