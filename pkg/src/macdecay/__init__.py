"""Algebraic MIMO-MAC lattice codes: exact construction, rank certificates, decay and DMT."""

from .cyclotomic import (
    CyclotomicElement,
    CyclotomicError,
    apply_automorphism,
    cyc_arith,
    embed_numeric,
    lift_conductor,
)
from .tower import (
    IntegralElement,
    TowerError,
    TowerSpec,
    build_tower,
    catalog_rows,
    relative_norm,
    sigma_apply,
    valuation,
    verify_inert,
)
from .codes import (
    CodeError,
    JointMatrix,
    MacCode,
    UserWord,
    exact_gram_determinant,
    hilbert90_witness,
    joint_matrix,
    normalize_word,
    psi_matrix,
    two_user_norm_test,
    user_block,
    valuation_certificate,
)
from .decay import (
    BoundParams,
    DecayError,
    DecayQuery,
    DecayRecord,
    decay_exhaustive,
    fit_decay_slope,
    lower_bound_exponents,
    upper_bound_exponents,
)
from .pigeonhole import pigeonhole_witness, small_det_witness_pipeline
from .lemmas import (
    hadamard_split_bound,
    liouville_bound,
    minkowski_det_inequality,
    row_replacement_invariance,
)
from .dmt import (
    DmtScenario,
    PLCurve,
    mac_lower_bound,
    mac_optimal,
    optimal_p2p,
    optimality_threshold,
)
from .channel import SimConfig, SimResult, empirical_dmin, simulate

__version__ = "0.1.0"
