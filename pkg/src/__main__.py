"""Command-line entry point for the forking simulator."""

import sys
import argparse
import unittest
import logging
from pathlib import Path

import numpy as np

from src.config import Config
from src.errors import DimensionLimitError, ValidationError
from src.estimates import derive_seed, stream
from src.forking_engine import ExpectationMeasurement, run
from src.gates_channels import PAULIS, check_weights
from src.oracle import oracle_twirl, oracle_witness
from src.protocols import (
    AXES,
    axis_discrimination,
    axis_spec,
    purity_qfs,
    teleportation_witness_qfs,
    theory_curve,
    twirl_qfs,
)
from src.random_ops import random_unitary, random_weights
from src.reports import render_csv, render_json, write_output
from src.shot_sampler import complexity_sweep, default_instance, estimate_qfs
from src.spec_loader import channel_from_name, load_spec, single_qubit_state, two_qubit_state

logger = logging.getLogger(__name__)

DIRECTIONS = ('up', 'down', 'random')
CHANNELS = ('identity', 'dephasing', 'depolarizing', 'amplitude_damping')


def run_tests():
    """Run the unit test suite."""
    logger.info("=" * 70)
    logger.info("RUNNING UNIT TESTS")
    logger.info("=" * 70)

    loader = unittest.TestLoader()
    tests_dir = Path(__file__).parent.parent / 'tests'
    suite = loader.discover(tests_dir, pattern='test_*.py')

    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)

    logger.info("=" * 70)
    if result.wasSuccessful():
        logger.info("✓ ALL TESTS PASSED")
        return 0
    logger.error("✗ SOME TESTS FAILED")
    return 1


def _sweep_order(thetas: np.ndarray, direction: str, seed: int) -> np.ndarray:
    if direction == 'up':
        return np.arange(len(thetas))
    if direction == 'down':
        return np.arange(len(thetas))[::-1]
    return stream(seed, DIRECTIONS.index('random')).permutation(len(thetas))


def _check_shots(shots) -> None:
    if shots is not None and shots < 1:
        raise ValidationError(f"--shots must be >= 1, got {shots}")


def cmd_axis_sweep(args, config: Config) -> str:
    """Sweep theta over [0, 2pi] for one rotation axis.

    Args:
        args: Parsed axis-sweep arguments
        config: Loaded configuration

    Returns:
        CSV text with exact, optional sampled, and theory columns
    """
    if args.steps < 2:
        raise ValidationError(f"--steps must be >= 2, got {args.steps}")
    _check_shots(args.shots)
    thetas = np.linspace(0.0, 2 * np.pi, args.steps)
    theory = theory_curve(args.axis, thetas)
    exact = [axis_discrimination(args.axis, t) for t in thetas]
    directions = DIRECTIONS if args.direction == 'all' else (args.direction,)
    seed = config.seed if args.seed is None else args.seed

    sampled = None
    if args.shots is not None:
        # one sample per (direction, position in sweep) so each order has its own noise
        sampled = np.zeros(len(thetas))
        for direction in directions:
            order = _sweep_order(thetas, direction, seed)
            for position, index in enumerate(order):
                spec = axis_spec(args.axis, thetas[index])
                task_seed = derive_seed(seed, DIRECTIONS.index(direction), position)
                sampled[index] += estimate_qfs(spec, args.shots, task_seed, config.chunk_size).mean
        sampled /= len(directions)

    order = np.arange(len(thetas)) if args.direction == 'all' else _sweep_order(thetas, args.direction, seed)
    header = ['theta', 'exact'] + (['sampled'] if sampled is not None else []) + ['theory']
    rows = []
    for index in order:
        row = [thetas[index], exact[index]]
        if sampled is not None:
            row.append(sampled[index])
        row.append(theory[index])
        rows.append(row)
    logger.info(f"Axis sweep: axis={args.axis}, {len(rows)} angles, direction={args.direction}")
    return render_csv(header, rows, config.significant_digits)


def cmd_witness(args, config: Config) -> str:
    """Report the teleportation witness of a named two-qubit state as JSON."""
    seed = config.seed if args.seed is None else args.seed
    state = two_qubit_state(args.state, seed)
    report = teleportation_witness_qfs(state)
    data = {'state': args.state}
    data.update(report.to_dict())
    data['oracle_witness'] = oracle_witness(state)
    return render_json(data, config.significant_digits)


def cmd_purity(args, config: Config) -> str:
    """Report the purity of a single-qubit state after a named channel as JSON."""
    seed = config.seed if args.seed is None else args.seed
    channel = channel_from_name(args.channel, args.param)
    report = purity_qfs(channel, single_qubit_state(args.state, seed), args.mode)
    data = {'channel': args.channel, 'param': float(args.param), 'state': args.state, 'mode': args.mode}
    data.update(report.to_dict())
    return render_json(data, config.significant_digits)


def cmd_twirl(args, config: Config) -> str:
    """Compare the forked twirl expectation with the term-by-term value.

    Args:
        args: Parsed twirl arguments (channel, twirl set, observable, state)
        config: Loaded configuration

    Returns:
        JSON text with qfs_value and oracle_value
    """
    seed = config.seed if args.seed is None else args.seed
    inner = channel_from_name(args.channel, args.param)
    if args.size < 1:
        raise ValidationError(f"--size must be >= 1, got {args.size}")
    if args.twirl_set == 'pauli':
        unitaries = [PAULIS[p] for p in 'IXYZ']
        weights = [0.25] * 4
    else:
        unitaries = [random_unitary(2, stream(seed, 1, i)) for i in range(args.size)]
        weights = list(random_weights(args.size, stream(seed, 2)))
    label = args.observable.upper()
    if label not in PAULIS:
        raise ValidationError(f"--observable must be one of I, X, Y, Z, got '{args.observable}'")
    obs = PAULIS[label]
    state = single_qubit_state(args.state, seed)
    value = twirl_qfs(unitaries, weights, inner, obs, state)
    reference = float(np.trace(obs @ oracle_twirl(unitaries, check_weights(weights), inner, state)).real)
    data = {
        'channel': args.channel, 'param': float(args.param), 'twirl_set': args.twirl_set,
        'size': len(unitaries), 'observable': label, 'state': args.state,
        'qfs_value': value, 'oracle_value': reference,
    }
    return render_json(data, config.significant_digits)


def cmd_run_spec(args, config: Config) -> str:
    """Run a ForkSpec file and report its value, c-swap count and circuit IR.

    Args:
        args: Parsed run-spec arguments; --shots adds a finite-shot estimate
        config: Loaded configuration

    Returns:
        JSON text keyed value, cswap_count, [estimate,] ir
    """
    spec = load_spec(args.path)
    _check_shots(args.shots)
    result = run(spec)
    data = {'value': result.value, 'cswap_count': result.ir.cswap_count}
    if args.shots is not None:
        if not isinstance(spec.measurement, ExpectationMeasurement):
            raise ValidationError("--shots needs an expectation-mode spec")
        seed = config.seed if args.seed is None else args.seed
        data['estimate'] = estimate_qfs(spec, args.shots, seed, config.chunk_size).to_dict()
    data['ir'] = result.ir.to_dict()
    return render_json(data, config.significant_digits)


def cmd_complexity(args, config: Config) -> str:
    """Sweep naive and forking preparation budgets over the epsilon grid as CSV."""
    d = config.complexity_d if args.d is None else args.d
    q = config.complexity_q if args.q is None else args.q
    seed = config.seed if args.seed is None else args.seed
    report = complexity_sweep(
        instance=default_instance(d, q, seed),
        epsilon_grid=args.epsilon or config.epsilon_grid,
        delta=config.delta if args.delta is None else args.delta,
        seed=seed,
        repetitions=config.repetitions if args.repetitions is None else args.repetitions,
        workers=args.workers,
    )
    logger.info(f"Median naive/QFS ratio: {report.median_ratio():.3f}, QFS slope: {report.qfs_slope():.3f}")
    return report.to_csv(config.significant_digits)


COMMANDS = {
    'axis-sweep': cmd_axis_sweep,
    'witness': cmd_witness,
    'purity': cmd_purity,
    'twirl': cmd_twirl,
    'run-spec': cmd_run_spec,
    'complexity': cmd_complexity,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Quantum forking-based sampling simulator')
    parser.add_argument('--debug', action='store_true',
                        help='Enable debug output')
    parser.add_argument('--test', action='store_true',
                        help='Run unit tests')
    parser.add_argument('--config', default=None,
                        help='Path to config.yaml (default: repository config.yaml)')
    parser.add_argument('--output', '-o', default=None,
                        help='Write the CSV/JSON result here instead of stdout')
    sub = parser.add_subparsers(dest='command')

    p = sub.add_parser('axis-sweep', help='Rotation-axis discrimination over a theta grid')
    p.add_argument('--axis', choices=AXES, required=True)
    p.add_argument('--steps', type=int, default=17)
    p.add_argument('--shots', type=int, default=None)
    p.add_argument('--seed', type=int, default=None)
    p.add_argument('--direction', choices=DIRECTIONS + ('all',), default='up')

    p = sub.add_parser('witness', help='Teleportation witness of a two-qubit state')
    p.add_argument('--state', default='phi+',
                   help='phi+, phi-, psi+, psi-, 00, random or random-mixed')
    p.add_argument('--seed', type=int, default=None)

    p = sub.add_parser('purity', help='Single-qubit purity after a channel')
    p.add_argument('--channel', choices=CHANNELS, default='identity')
    p.add_argument('--param', type=float, default=0.0)
    p.add_argument('--state', default='0', help='0, 1, +, -, +i, -i, mixed or random')
    p.add_argument('--mode', choices=('qutrit', 'two_qubit'), default='qutrit')
    p.add_argument('--seed', type=int, default=None)

    p = sub.add_parser('twirl', help='Expectation after a twirled channel')
    p.add_argument('--channel', choices=CHANNELS, default='amplitude_damping')
    p.add_argument('--param', type=float, default=0.0)
    p.add_argument('--twirl-set', choices=('pauli', 'random'), default='pauli')
    p.add_argument('--size', type=int, default=2, help='Number of random unitaries')
    p.add_argument('--observable', default='Z')
    p.add_argument('--state', default='0')
    p.add_argument('--seed', type=int, default=None)

    p = sub.add_parser('run-spec', help='Run a ForkSpec JSON file')
    p.add_argument('path')
    p.add_argument('--shots', type=int, default=None)
    p.add_argument('--seed', type=int, default=None)

    p = sub.add_parser('complexity', help='Naive vs forking preparation budgets')
    p.add_argument('--d', type=int, default=None)
    p.add_argument('--q', type=int, default=None)
    p.add_argument('--epsilon', type=float, nargs='+', default=None)
    p.add_argument('--delta', type=float, default=None)
    p.add_argument('--repetitions', type=int, default=None)
    p.add_argument('--seed', type=int, default=None)
    p.add_argument('--workers', type=int, default=1)
    return parser


def main(argv=None):
    """Parse arguments, run one command and write its artifact."""
    parser = build_parser()
    args = parser.parse_args(argv)

    # Setup logging (stderr, so stdout carries only the artifact)
    log_level = logging.DEBUG if args.debug else logging.INFO
    logging.basicConfig(
        level=log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    if args.test:
        return run_tests()

    if args.command is None:
        parser.print_help(sys.stderr)
        return 2

    try:
        config = Config(args.config)
        config.apply_limits()
        text = COMMANDS[args.command](args, config)
        write_output(text, args.output)
        return 0

    except KeyboardInterrupt:
        logger.warning("✗ Interrupted by user")
        return 130

    except DimensionLimitError as e:
        logger.error(f"✗ DIMENSION LIMIT: {e}")
        return 3

    except (ValidationError, FileNotFoundError) as e:
        logger.error(f"✗ INVALID INPUT: {e}")
        return 2

    except Exception as e:
        logger.error(f"✗ ERROR: {e}", exc_info=args.debug)
        return 1


if __name__ == '__main__':
    sys.exit(main())
