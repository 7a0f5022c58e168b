"""Quantum forking: register preparation, fork, per-slot pipelines, unfork, measurement.

Register order is control, then for each copy k its target slot followed by
its d-1 ancilla slots. The c-swap of branch i (i = 2..d) exchanges the copy's
target slot with slot i-1 on the control subspace of branch i, so after the
fork the target state sits in slot i-1 of every copy in branch i. Branch 1
applies no swap.
"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.errors import ValidationError
from src.estimates import EstimateResult, stream
from src.gates_channels import Channel, check_weights
from src.quantum_state import (
    Observable,
    Projector,
    QuantumState,
    RegisterLayout,
    Role,
    Subsystem,
    apply_channel,
    apply_unitary,
    born_sample,
    expectation,
    product_state,
    projective_probability,
)
from src.tensor_core import as_matrix, is_unitary, kron_all

logger = logging.getLogger(__name__)

SHOT_CHUNK = 8192


class ControlKind(Enum):
    PURE = "pure"
    MIXED = "mixed"
    ENCODED = "encoded"


@dataclass(frozen=True, eq=False)
class ControlSpec:
    """How the control register is prepared and which basis states label each branch.

    For pure and mixed controls branch i is control level i-1. Encoded
    controls prepare ``prep_unitary |0>`` on a ``control_dim``-level register
    and assign each branch a set of basis indices; the branch weight is the
    total population of its set.
    """

    kind: ControlKind
    weights: Tuple[float, ...] = ()
    phases: Tuple[float, ...] = ()
    prep_unitary: Optional[np.ndarray] = None
    branch_sets: Tuple[Tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.kind == ControlKind.ENCODED:
            self._init_encoded()
            return
        weights = check_weights(self.weights)
        phases = tuple(float(p) for p in self.phases) if self.phases else (0.0,) * len(weights)
        if len(phases) != len(weights):
            raise ValidationError(f"{len(phases)} phases for {len(weights)} weights")
        if self.kind == ControlKind.MIXED and any(phases):
            raise ValidationError("A mixed control carries no phases")
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'phases', phases)
        object.__setattr__(self, 'branch_sets', tuple((i,) for i in range(len(weights))))

    def _init_encoded(self):
        if self.prep_unitary is None:
            raise ValidationError("An encoded control needs a preparation unitary")
        prep = as_matrix(self.prep_unitary).copy()
        if not is_unitary(prep):
            raise ValidationError("Control preparation is not unitary")
        dim = prep.shape[0]
        sets = tuple(tuple(sorted(int(b) for b in s)) for s in self.branch_sets)
        flat = [b for s in sets for b in s]
        if not sets or any(not s for s in sets):
            raise ValidationError("Every branch needs at least one control basis index")
        if sorted(flat) != list(range(dim)):
            raise ValidationError(f"Branch sets {sets} must partition 0..{dim - 1}")
        populations = np.abs(prep[:, 0]) ** 2
        weights = tuple(float(sum(populations[b] for b in s)) for s in sets)
        prep.setflags(write=False)
        object.__setattr__(self, 'prep_unitary', prep)
        object.__setattr__(self, 'branch_sets', sets)
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def pure(cls, weights: Sequence[float], phases: Sequence[float] = None) -> 'ControlSpec':
        """Control in sum_i sqrt(p_i) e^{i phase_i} |i>."""
        return cls(ControlKind.PURE, tuple(weights), () if phases is None else tuple(phases))

    @classmethod
    def mixed(cls, weights: Sequence[float]) -> 'ControlSpec':
        """Control in sum_i p_i |i><i|."""
        return cls(ControlKind.MIXED, tuple(weights))

    @classmethod
    def uniform(cls, d: int) -> 'ControlSpec':
        """Maximally mixed control qudit, i.e. equal weights 1/d."""
        return cls.mixed([1.0 / d] * d)

    @classmethod
    def encoded(cls, prep_unitary, branch_sets: Sequence[Sequence[int]]) -> 'ControlSpec':
        return cls(ControlKind.ENCODED, prep_unitary=prep_unitary,
                   branch_sets=tuple(tuple(s) for s in branch_sets))

    @property
    def d(self) -> int:
        return len(self.branch_sets)

    @property
    def control_dim(self) -> int:
        if self.kind == ControlKind.ENCODED:
            return self.prep_unitary.shape[0]
        # a single-branch control still occupies a qubit
        return max(2, len(self.weights))

    def initial_state(self) -> QuantumState:
        layout = RegisterLayout((Subsystem(self.control_dim, Role.CONTROL),))
        if self.kind == ControlKind.MIXED:
            populations = np.zeros(self.control_dim)
            populations[:len(self.weights)] = self.weights
            return QuantumState.from_density(np.diag(populations).astype(complex), layout)
        if self.kind == ControlKind.ENCODED:
            return QuantumState.from_vector(self.prep_unitary[:, 0], layout)
        amps = np.zeros(self.control_dim, dtype=complex)
        amps[:len(self.weights)] = np.sqrt(self.weights) * np.exp(1j * np.array(self.phases))
        return QuantumState.from_vector(amps, layout)

    def to_dict(self) -> dict:
        out = {'kind': self.kind.value, 'weights': list(self.weights)}
        if self.kind == ControlKind.ENCODED:
            out['branch_sets'] = [list(s) for s in self.branch_sets]
        return out


@dataclass(frozen=True, eq=False)
class ExpectationMeasurement:
    """Observable on the q target slots, factors in copy order."""

    observable: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'observable', as_matrix(self.observable))


@dataclass(frozen=True, eq=False)
class ProjectiveMeasurement:
    """One projector per copy; the outcome probability of their tensor product."""

    projectors: Tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, 'projectors', tuple(as_matrix(p) for p in self.projectors))


Pipelines = Tuple[Tuple[Tuple[Channel, ...], ...], ...]


def empty_pipelines(d: int, q: int) -> Pipelines:
    return tuple(tuple(() for _ in range(d)) for _ in range(q))


@dataclass(frozen=True, eq=False)
class ForkSpec:
    """Complete description of one forking-based sampling circuit.

    Attributes:
        d: Number of branches (trajectories)
        q: Number of target copies, i.e. the power of the sum
        control: Control preparation and branch labelling
        slot_radix: Dimension of every target/ancilla slot
        target_state: Single-slot state shared by all q copies
        ancilla_states: q(d-1) single-slot states, copy-major
        slot_pipelines: ``slot_pipelines[k][s]`` is the ordered channel list for
            slot s of copy k, applied between fork and unfork
        measurement: ExpectationMeasurement or ProjectiveMeasurement
        control_pipeline: Channels on the control register between fork and unfork
    """

    d: int
    q: int
    control: ControlSpec
    slot_radix: int
    target_state: QuantumState
    ancilla_states: Tuple[QuantumState, ...]
    slot_pipelines: Pipelines
    measurement: object
    control_pipeline: Tuple[Channel, ...] = ()

    def __post_init__(self):
        d, q, radix = int(self.d), int(self.q), int(self.slot_radix)
        if d < 1 or q < 1:
            raise ValidationError(f"Need d >= 1 and q >= 1, got d={d}, q={q}")
        if radix < 2:
            raise ValidationError(f"slot_radix must be >= 2, got {radix}")
        if self.control.d != d:
            raise ValidationError(f"Control has {self.control.d} branches, spec has d={d}")
        object.__setattr__(self, 'd', d)
        object.__setattr__(self, 'q', q)
        object.__setattr__(self, 'slot_radix', radix)

        target = QuantumState.coerce(self.target_state, radix)
        if target.dim != radix:
            raise ValidationError(f"Target state has dim {target.dim}, slot_radix is {radix}")
        object.__setattr__(self, 'target_state', target)

        ancillas = tuple(QuantumState.coerce(a, radix) for a in self.ancilla_states)
        if len(ancillas) != q * (d - 1):
            raise ValidationError(f"Expected {q * (d - 1)} ancilla states, got {len(ancillas)}")
        for a in ancillas:
            if a.dim != radix:
                raise ValidationError(f"Ancilla state has dim {a.dim}, slot_radix is {radix}")
        object.__setattr__(self, 'ancilla_states', ancillas)

        pipelines = tuple(tuple(tuple(slot) for slot in copy) for copy in self.slot_pipelines)
        if len(pipelines) != q or any(len(copy) != d for copy in pipelines):
            raise ValidationError(f"slot_pipelines must be {q} copies x {d} slots")
        for copy in pipelines:
            for slot in copy:
                for ch in slot:
                    if not isinstance(ch, Channel) or ch.dim != radix:
                        raise ValidationError(f"Pipeline entry {ch!r} does not act on a radix-{radix} slot")
        object.__setattr__(self, 'slot_pipelines', pipelines)

        control_pipeline = tuple(self.control_pipeline)
        for ch in control_pipeline:
            if not isinstance(ch, Channel) or ch.dim != self.control.control_dim:
                raise ValidationError(f"Control channel {ch!r} does not act on the control register")
        object.__setattr__(self, 'control_pipeline', control_pipeline)

        self._check_measurement()

    def _check_measurement(self):
        m = self.measurement
        if isinstance(m, ExpectationMeasurement):
            expected = self.slot_radix ** self.q
            if m.observable.shape != (expected, expected):
                raise ValidationError(f"Observable must be {expected}x{expected} for q={self.q} copies")
        elif isinstance(m, ProjectiveMeasurement):
            if len(m.projectors) != self.q:
                raise ValidationError(f"Need one projector per copy ({self.q}), got {len(m.projectors)}")
            for p in m.projectors:
                if p.shape != (self.slot_radix, self.slot_radix):
                    raise ValidationError(f"Projector of shape {p.shape} on a radix-{self.slot_radix} slot")
        else:
            raise ValidationError(f"Unknown measurement {type(m).__name__}")

    @property
    def layout(self) -> RegisterLayout:
        return RegisterLayout.qfs(self.d, self.q, self.control.control_dim, self.slot_radix)

    @property
    def cswap_count(self) -> int:
        return 2 * self.q * (self.d - 1)

    def target_subsystems(self) -> List[int]:
        layout = self.layout
        return [layout.slot_index(k, 0) for k in range(self.q)]


@dataclass(frozen=True)
class IROp:
    kind: str
    branch: Optional[int] = None
    copy: Optional[int] = None
    slot: Optional[int] = None
    channel_id: Optional[str] = None

    def to_dict(self) -> dict:
        out = {'kind': self.kind}
        for key in ('branch', 'copy', 'slot', 'channel_id'):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out


@dataclass
class CircuitIR:
    """Ordered record of what a run did to the register."""

    layout: RegisterLayout
    ops: List[IROp] = field(default_factory=list)

    def add(self, kind: str, **fields):
        self.ops.append(IROp(kind, **fields))

    @property
    def cswap_count(self) -> int:
        return sum(1 for op in self.ops if op.kind == 'cswap')

    def cswaps(self) -> List[IROp]:
        return [op for op in self.ops if op.kind == 'cswap']

    def to_dict(self) -> dict:
        return {
            'layout': self.layout.to_dict(),
            'ops': [op.to_dict() for op in self.ops],
            'cswap_count': self.cswap_count,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> 'CircuitIR':
        subsystems = []
        for sub in data['layout']['subsystems']:
            subsystems.append(Subsystem(sub['radix'], Role(sub['role']), sub.get('copy'), sub.get('slot')))
        layout = RegisterLayout(tuple(subsystems), data['layout'].get('block_size', 1))
        return cls(layout, [IROp(**op) for op in data['ops']])


@dataclass(frozen=True, eq=False)
class RunResult:
    value: float
    ir: CircuitIR
    final_state: QuantumState


def build_register(spec: ForkSpec) -> QuantumState:
    """control (x) [target, ancillas] per copy, pure unless some factor is mixed."""
    factors = [spec.control.initial_state()]
    per_copy = spec.d - 1
    for k in range(spec.q):
        factors.append(spec.target_state)
        factors.extend(spec.ancilla_states[k * per_copy:(k + 1) * per_copy])
    state = product_state(factors, spec.layout)
    logger.debug(f"Built register: dim={state.dim}, pure={state.is_pure}")
    return state


def _controlled_swap_axes(tensor: np.ndarray, control_axis: int, control_values: Sequence[int],
                          axis_a: int, axis_b: int) -> np.ndarray:
    """Swap two tensor axes inside the listed control sub-blocks."""
    out = tensor.copy()
    a = axis_a - (axis_a > control_axis)
    b = axis_b - (axis_b > control_axis)
    for value in control_values:
        index = [slice(None)] * tensor.ndim
        index[control_axis] = value
        index = tuple(index)
        out[index] = np.swapaxes(tensor[index], a, b)
    return out


def controlled_swap(state: QuantumState, spec: ForkSpec, branch: int, copy: int) -> QuantumState:
    """c-swap of ``branch`` (2..d) on ``copy``: target slot <-> slot branch-1."""
    layout = state.layout
    target = layout.slot_index(copy, 0)
    ancilla = layout.slot_index(copy, branch - 1)
    controls = spec.control.branch_sets[branch - 1]
    n = len(layout)
    tensor = _controlled_swap_axes(state.tensor(), 0, controls, target, ancilla)
    if not state.is_pure:
        # C is a real symmetric permutation, so rho C permutes columns the same way
        tensor = _controlled_swap_axes(tensor, n, controls, n + target, n + ancilla)
    return QuantumState.from_tensor(layout, tensor, state.is_pure)


def _fork_sequence(spec: ForkSpec) -> List[Tuple[int, int]]:
    return [(branch, k) for k in range(spec.q) for branch in range(2, spec.d + 1)]


def fork(state: QuantumState, spec: ForkSpec, ir: CircuitIR = None) -> QuantumState:
    """Swap each copy's target into its branch slot, conditioned on the control.

    For every copy k and branch i >= 2, whenever the control lies in
    branch i's value set, the target slot is exchanged with slot i - 1.

    Args:
        state: Register built by build_register
        spec: Circuit description
        ir: Optional IR that records each c-swap

    Returns:
        The forked register
    """
    for branch, k in _fork_sequence(spec):
        state = controlled_swap(state, spec, branch, k)
        if ir is not None:
            ir.add('cswap', branch=branch, copy=k)
    logger.debug(f"Forked {spec.q} copies into {spec.d} branches ({spec.cswap_count // 2} c-swaps)")
    return state


def unfork(state: QuantumState, spec: ForkSpec, ir: CircuitIR = None) -> QuantumState:
    """Undo fork by running the same c-swaps in reverse order."""
    for branch, k in reversed(_fork_sequence(spec)):
        state = controlled_swap(state, spec, branch, k)
        if ir is not None:
            ir.add('cswap', branch=branch, copy=k)
    logger.debug("Unforked register")
    return state


def _apply_one(state: QuantumState, channel: Channel, subsystem: int) -> QuantumState:
    if state.is_pure and channel.is_unitary:
        return apply_unitary(state, channel.kraus_ops[0], [subsystem])
    return apply_channel(state, channel, [subsystem])


def apply_pipelines(state: QuantumState, spec: ForkSpec, ir: CircuitIR = None) -> QuantumState:
    """Run every slot's channel list, then the control pipeline."""
    layout = state.layout
    for k, copy in enumerate(spec.slot_pipelines):
        for s, channels in enumerate(copy):
            index = layout.slot_index(k, s)
            for ch in channels:
                state = _apply_one(state, ch, index)
                if ir is not None:
                    ir.add('apply_channel', copy=k, slot=s, channel_id=ch.channel_id)
    for ch in spec.control_pipeline:
        state = _apply_one(state, ch, 0)
        if ir is not None:
            ir.add('control_channel', channel_id=ch.channel_id)
    return state


def measure(state: QuantumState, spec: ForkSpec) -> float:
    """Expectation value or projector probability over the q target slots."""
    targets = spec.target_subsystems()
    if isinstance(spec.measurement, ExpectationMeasurement):
        return expectation(state, Observable(spec.measurement.observable, targets))
    proj = kron_all(spec.measurement.projectors)
    return projective_probability(state, Projector(proj, targets))


def run(spec: ForkSpec) -> RunResult:
    """Execute the full circuit and measure the target copies."""
    ir = CircuitIR(spec.layout)
    state = build_register(spec)
    ir.add('prepare_control')
    state = fork(state, spec, ir)
    state = apply_pipelines(state, spec, ir)
    state = unfork(state, spec, ir)
    value = measure(state, spec)
    kind = 'measure_expectation' if isinstance(spec.measurement, ExpectationMeasurement) else 'measure_projective'
    ir.add(kind)
    logger.debug(f"Run d={spec.d} q={spec.q}: value={value:.12g}, c-swaps={ir.cswap_count}")
    return RunResult(value, ir, state)


def run_sampled(spec: ForkSpec, shots: int, seed: int, chunk_size: int = SHOT_CHUNK) -> EstimateResult:
    """Finite-shot estimate of the expectation-mode value.

    Shots are drawn from the exact final state in chunks; chunk j uses stream
    ``(seed, j)``, so any split of the chunks across workers gives the same
    outcomes. Each shot counts as one target-state preparation.
    """
    if not isinstance(spec.measurement, ExpectationMeasurement):
        raise ValidationError("run_sampled needs an expectation-mode spec")
    shots = int(shots)
    if shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    result = run(spec)
    obs = Observable(spec.measurement.observable, spec.target_subsystems())

    samples = []
    for j, start in enumerate(range(0, shots, chunk_size)):
        size = min(chunk_size, shots - start)
        samples.append(born_sample(result.final_state, obs, size, stream(seed, j)))
    outcomes = np.concatenate(samples)
    mean = float(outcomes.mean())
    stderr = float(outcomes.std(ddof=1) / np.sqrt(shots)) if shots > 1 else 0.0
    return EstimateResult(mean=mean, shots=shots, seed=int(seed), prep_count=shots, stderr=stderr)
