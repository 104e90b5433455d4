from .families import (
    FAMILY_NAMES,
    ParameterPoint,
    ProblemFamily,
    SnapshotSet,
    burgers_inviscid_snapshot,
    burgers_viscous_solve,
    camassa_holm_snapshot,
    generate_snapshots,
    kdv_snapshot,
    make_family,
    sample_training_set,
    transport_snapshot,
)
