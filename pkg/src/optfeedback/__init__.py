"""Coherent feedback control of optical qubits.

Core workflow: certify an operator pair as a preparation channel
(:mod:`.channels`), factor its coupling unitary (:mod:`.csdecomp`), compile
the factors into an optical netlist and verify it (:mod:`.optics`,
:mod:`.netlist`), then iterate the channel under one of the controller-reset
strategies (:mod:`.iteration`).  The three worked schemes live in
:mod:`.schemes`; the ``optfeedback`` command drives everything from flat
config files.
"""

__version__ = "0.1.0"

from .channels import (
    DensityMatrix,
    FixpointReport,
    IterationTrace,
    KrausSet,
    PureState,
    apply_channel,
    fidelity,
    fixpoint_check,
    iterate_channel,
    kraus_from_unitary,
    span_check,
)
from .csdecomp import (
    CSFactors,
    CSMatrixSplit,
    control_unitary_from_kraus,
    cs_decompose,
    kraus_svd,
    reconstruct,
    split_cs_matrix,
)
from .iteration import (
    FilteredState,
    GainParams,
    GainResult,
    ModeLadderMap,
    PulseTrain,
    cloner_fidelity,
    filter_step,
    filtered_fidelity_analytic,
    filtered_fidelity_numeric,
    oam_run,
    parametric_gain,
    required_gain,
    timebin_delay,
    timebin_run,
)
from .netlist import format_netlist, parse_netlist
from .optics import (
    OpticalCircuit,
    OpticalElement,
    Platform,
    basic_circuit,
    compile_controlled_phase,
    compile_path_pol,
    compile_pol_oam,
    euler_decompose,
    jones,
    qqh,
    reorder_qh,
    simulate,
    target_dep_circuit,
    verify,
    waveplate_sandwich,
    weak_swap_circuit,
)
from .schemes import (
    Scheme,
    SchemeKind,
    SchemeSpec,
    aliased_subspaces,
    basic_scheme,
    build_scheme,
    canonical_perp,
    fidelity_curve,
    iterations_needed,
    target_dep_scheme,
    weak_swap,
)

__all__ = [name for name in dir() if not name.startswith("_")]
