"""
Command line entry point: ``mlnpde <experiment> --config run.json --out results/run``.
"""

import argparse
import sys
from typing import List, Optional

import mlnpde.customlogger as log
from mlnpde.driver import experiments
from mlnpde.driver.config import EXPERIMENTS, FORMATS, load_config
from mlnpde.driver.lifecycle import RunLifecycle
from mlnpde.driver.report import EXIT_IO, EXIT_PRECONDITION, emit_outputs
from mlnpde.errors import ConfigError, KernelBudgetError, ParameterError, PreconditionError
from mlnpde.telemetry.producer import sink

_logger = log.get_logger('driver')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='mlnpde', description='Experiments for the mixed local-nonlocal concave-critical p-Laplacian')
    commands = parser.add_subparsers(dest='command', required=True)
    for name in EXPERIMENTS:
        sub = commands.add_parser(name.replace('_', '-'), help=f'run the {name} experiment')
        sub.add_argument('--config', required=True, help='JSON experiment configuration')
        sub.add_argument('--out', default=None, help='output path prefix (overrides the config)')
        sub.add_argument('--seed', type=int, default=None, help='random seed (overrides the config)')
        sub.add_argument('--format', choices=FORMATS, default=None, help='output format')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    experiment = args.command.replace('-', '_')
    run = RunLifecycle(experiment)
    try:
        config = load_config(args.config, experiment).with_overrides(args.seed, args.out, args.format)
    except OSError as e:
        _logger.error('Unable to read %s: %s', args.config, e)
        run.abort(code=EXIT_IO)
        return run.exit_code
    except ConfigError as e:
        _logger.error('Invalid configuration: %s', e)
        run.abort(code=EXIT_PRECONDITION)
        return run.exit_code

    producer = sink(experiment)
    experiments.attach_telemetry(producer)
    run.start()
    try:
        report = experiments.run_experiment(config)
    except (PreconditionError, ParameterError, KernelBudgetError) as e:
        _logger.error('Experiment %s refused to run: %s', experiment, e)
        run.abort(code=EXIT_PRECONDITION)
        return run.exit_code
    finally:
        experiments.attach_telemetry(None)
        if producer is not None:
            producer.close()

    code = emit_outputs(report, config.fmt, config.output)
    if code == EXIT_IO:
        run.abort(code=EXIT_IO)
    else:
        run.conclude(report.outcome)
    return run.exit_code


if __name__ == '__main__':
    sys.exit(main())
