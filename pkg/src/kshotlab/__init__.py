"""Desk-scale laboratory for budget-limited broadcasting in collision radio networks.

The package simulates the synchronous collision model over directed graphs,
generates round-robin and prime-grid line schedules with verified structural
properties, and synthesizes worst-case networks, with machine-checked delay
certificates, against both fixed schedules and history-driven policies.
"""

__version__ = "0.1.0"

from .adaptive_adversary import (
    CandidateSim,
    IncomingViewSeq,
    LayeredAdversaryCertificate,
    LazyViews,
    RefinementCertificate,
    TransmissionTree,
    build_1shot_chain_refinement,
    build_adversarial_layered,
    build_transmission_tree,
    candidate_action,
    counting_min_height,
    deepest_pair,
    incoming_view_sequence,
    min_tree_height_bruteforce,
    save_layered_certificate,
    tree_invariants_ok,
)
from .engine import (
    History,
    Message,
    ProgressCurve,
    SimTrace,
    StepRecord,
    ViewEvent,
    active_set,
    check_stage_progress,
    check_sweep_progress,
    default_horizon,
    load_trace,
    peak_active,
    progress_curve,
    resolve_step,
    run_adaptive,
    run_oblivious,
    save_trace,
    verify_shot_budget,
)
from .errors import (
    FormatError,
    InvalidChain,
    InvalidLabel,
    InvalidLayering,
    InvalidLine,
    InvalidNode,
    InvalidPrime,
    KshotError,
    NoOccurrence,
    NoPair,
    NotEnoughShots,
    PolicyError,
    PolicyFinding,
    ProtocolIncomplete,
    TooLarge,
)
from .oblivious_adversary import (
    ChainCertificate,
    SeqWithGaps,
    build_adversarial_chain,
    build_extension,
    delay_certificate_bipartite,
    first_occurrence,
    max_delay_node,
    peel_conflicting,
    save_chain_certificate,
    shots_after,
    t_at,
    t_leq,
)
from .policies import (
    EchoOncePolicy,
    FirstSilencePolicy,
    LabelSweepPolicy,
    NeverTransmitPolicy,
    RoundRobinEchoPolicy,
    ScheduleEchoPolicy,
    builtin_policies,
    correct_policies,
)
from .schedules import (
    Line,
    Schedule,
    explicit_schedule,
    grid_prime,
    line_members,
    load_schedule,
    oblivious_kshot_schedule,
    point_of_label,
    round_robin_schedule,
    save_schedule,
    smallest_prime_geq,
    verify_line_properties,
    verify_validity,
)
from .topology import (
    Chain,
    LayeredSpec,
    Network,
    bfs_depths,
    build_chain,
    build_layered,
    concat_chains,
    eccentricity,
    load_network,
    random_reachable_digraph,
    save_network,
)
