"""
Main application orchestrator for the bipath arc code toolkit.

This module turns a parsed command into library calls:
configuration → input parsing → computation → rendering
"""
import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .config.configuration_manager import MAX_SEED, MAX_TRIALS, ConfigurationManager, ConfigurationError
from .core.bipath_core import arc_code, restrict_to_slice, slice_point_labels
from .core.distances import bottleneck_matching, common_poset, format_extended, orbit_blocks
from .core.fibered import fibered_arc_code, line_bars
from .core.zigzag_core import barcode
from .formats import text_formats
from .formats.text_formats import ParseError
from .models.data_models import Command, CommandVerb, EngineConfig, OutputFormat
from .utils.error_handler import ErrorHandler, ErrorCategory, exit_code_for
from .utils.self_test import SelfTestRunner


class ApplicationError(Exception):
    """Base exception for application-level errors."""
    pass


class UsageError(ApplicationError):
    """Raised when inputs do not fit the requested verb."""
    pass


class ArcCodeApplication:
    """
    Runs one command end to end.

    Loads the environment configuration, applies command-line overrides,
    sets up logging, dispatches the verb and writes its output to stdout or
    to the --out path. run() never raises; failures become exit codes.
    """

    def __init__(self, command: Command, config_manager: Optional[ConfigurationManager] = None):
        """
        Initialize the application.

        Args:
            command: Parsed command
            config_manager: Optional configuration source (defaults to the environment plus any --env-file)
        """
        self.command = command
        self.config_manager = config_manager or ConfigurationManager(env_file=command.env_file)
        self.config: Optional[EngineConfig] = None
        self.error_handler: Optional[ErrorHandler] = None
        self.log_level_override: Optional[str] = None

    def _initialize_components(self) -> None:
        """
        Merge configuration sources and set up logging.

        Raises:
            ConfigurationError: If the environment configuration is invalid
        """
        config = self.config_manager.get_engine_config()
        command = self.command
        overrides: Dict[str, Any] = {}
        if command.output_format is not None:
            overrides['output_format'] = command.output_format
        if command.seed is not None:
            if not 0 <= command.seed < MAX_SEED:
                raise ConfigurationError("--seed must be in [0, 2^64)")
            overrides['seed'] = command.seed
        if command.trials is not None:
            if not 1 <= command.trials <= MAX_TRIALS:
                raise ConfigurationError(f"--trials must be between 1 and {MAX_TRIALS}")
            overrides['trials'] = command.trials
        if self.log_level_override is not None:
            overrides['log_level'] = self.log_level_override
        self.config = replace(config, **overrides)
        self.error_handler = ErrorHandler(self.config.log_level, self.config.log_file_path)
        self.error_handler.log_debug(f"Engine configuration: {self.config}")

    @property
    def as_json(self) -> bool:
        return self.config.output_format is OutputFormat.JSON

    def _read(self, path: str) -> Tuple[str, str]:
        """(format keyword, text) of an input file."""
        try:
            text = Path(path).read_text(encoding='utf-8')
        except OSError as e:
            raise UsageError(f"Cannot read {path}: {e.strerror or e}") from e
        try:
            return text_formats.detect_format(text), text
        except ParseError as e:
            raise ParseError(f"{path}: {e}") from e

    def _parse(self, path: str, expected: Sequence[str]):
        kind, text = self._read(path)
        if kind not in expected:
            raise UsageError(f"{path} is a {kind} document, expected {' or '.join(expected)}")
        override = self.command.field_override
        try:
            if kind == "BIPATH":
                return kind, text_formats.parse_bipath(text, override)
            if kind == "ZIGZAG":
                return kind, text_formats.parse_zigzag(text, override)
            if kind == "GRID":
                return kind, text_formats.parse_grid(text, override)
            if kind == "BIFILT":
                return kind, text_formats.parse_bifiltration(text, override, self.config.field_prime)
            if kind == "EMBED":
                return kind, text_formats.parse_embedding(text)
            return kind, text_formats.parse_path(text)
        except ParseError as e:
            raise ParseError(f"{path}: {e}") from e

    def _require_inputs(self, count: Optional[int] = None, minimum: int = 1) -> List[str]:
        inputs = self.command.inputs
        if count is not None and len(inputs) != count:
            raise UsageError(f"'{self.command.verb.value}' takes {count} input file(s), got {len(inputs)}")
        if len(inputs) < minimum:
            raise UsageError(f"'{self.command.verb.value}' needs at least {minimum} input file(s)")
        return inputs

    # Verbs

    def _validate(self) -> Tuple[str, int]:
        records = []
        for path in self._require_inputs():
            kind, value = self._parse(path, text_formats.FORMATS)
            if kind in ("BIPATH", "GRID", "BIFILT"):
                value.validate()
            self.error_handler.log_operation('validate', path)
            records.append({'path': path, 'format': kind, 'valid': True})
        if self.as_json:
            return text_formats.canonical_json(records), len(records)
        return "".join(f"OK {r['path']} ({r['format']})\n" for r in records), len(records)

    def _decompose(self) -> Tuple[str, int]:
        [path] = self._require_inputs(count=1)
        kind, value = self._parse(path, ("BIPATH", "ZIGZAG"))
        self.error_handler.log_operation('decompose', kind)
        if kind == "BIPATH":
            code = arc_code(value)
            if self.as_json:
                return text_formats.canonical_json(text_formats.arc_code_records(code)), len(code)
            return text_formats.format_arc_code(code), len(code)
        bars = barcode(value)
        if self.as_json:
            return text_formats.canonical_json(text_formats.barcode_records(bars)), len(bars)
        return text_formats.format_barcode(bars), len(bars)

    def _slice(self) -> Tuple[str, int]:
        [path] = self._require_inputs(count=1)
        _, module = self._parse(path, ("BIPATH",))
        rep = restrict_to_slice(module)
        self.error_handler.log_operation('slice', f"length {rep.length}")
        if self.as_json:
            payload = {
                'origin': module.poset.slice_origin,
                'labels': [[a, b, v] for (a, b), v in slice_point_labels(module.poset)],
                'zigzag': text_formats.format_zigzag(rep),
            }
            return text_formats.canonical_json(payload), 1
        return text_formats.format_zigzag(rep), 1

    def _distance(self) -> Tuple[str, int]:
        path_a, path_b = self._require_inputs(count=2)
        _, first = self._parse(path_a, ("BIPATH",))
        _, second = self._parse(path_b, ("BIPATH",))
        poset = common_poset(first, second)
        code_a, code_b = arc_code(first), arc_code(second)
        matching = bottleneck_matching(code_a, code_b, poset)
        distance = matching.epsilon
        self.error_handler.log_operation('distance', format_extended(distance))
        if self.as_json:
            payload = matching.to_dict(orbit_blocks(code_a, poset), orbit_blocks(code_b, poset))
            return text_formats.canonical_json(payload), 1
        return format_extended(distance) + "\n", 1

    def _fiber(self) -> Tuple[str, int]:
        inputs = self._require_inputs(minimum=2)
        _, module = self._parse(inputs[0], ("GRID", "BIFILT"))
        module.validate()
        results: List[Dict[str, Any]] = []
        blocks: List[str] = []
        for path in inputs[1:]:
            kind, value = self._parse(path, ("EMBED", "PATH"))
            if kind == "EMBED":
                [code] = fibered_arc_code(module, [value])
                results.append({'input': path, 'arc_code': text_formats.arc_code_records(code)})
                blocks.append(f"# {path}\n" + text_formats.format_arc_code(code))
                self.error_handler.log_operation('fiber_embedding', path)
            else:
                bars = line_bars(module, value)
                results.append({
                    'input': path,
                    'bars': [{'from': list(first), 'to': list(last), 'mult': mult} for first, last, mult in bars],
                })
                blocks.append(f"# {path}\n" + "".join(f"{first} - {last}  x{mult}\n" for first, last, mult in bars))
                self.error_handler.log_operation('fiber_path', path)
        if self.as_json:
            return text_formats.canonical_json(results), len(results)
        return "".join(blocks), len(results)

    def _selftest(self) -> Tuple[str, int, bool]:
        if self.command.inputs:
            raise UsageError("'selftest' takes no input files")
        runner = SelfTestRunner(seed=self.config.seed, trials=self.config.trials)
        report = runner.run_all()
        self.error_handler.log_operation('selftest', report['overall_status'])
        passed = report['overall_status'] == 'passed'
        if self.as_json:
            return text_formats.canonical_json(report), len(report['checks']), passed
        lines = [
            f"{check['status'].upper():<7} {check['name']}: {check['message']} ({check['duration_seconds']}s)"
            for check in report['checks']
        ]
        lines.append(f"Overall: {report['overall_status']} (seed {report['seed']}, trials {report['trials']})")
        return "\n".join(lines) + "\n", len(report['checks']), passed

    def _execute(self) -> Tuple[str, int, bool]:
        verb = self.command.verb
        if verb is CommandVerb.SELFTEST:
            return self._selftest()
        handlers = {
            CommandVerb.VALIDATE: self._validate,
            CommandVerb.DECOMPOSE: self._decompose,
            CommandVerb.SLICE: self._slice,
            CommandVerb.DISTANCE: self._distance,
            CommandVerb.FIBER: self._fiber,
        }
        output, count = handlers[verb]()
        return output, count, True

    def _emit(self, output: str) -> None:
        if self.command.out_path:
            try:
                Path(self.command.out_path).write_text(output, encoding='utf-8')
            except OSError as e:
                raise UsageError(f"Cannot write {self.command.out_path}: {e.strerror or e}") from e
        else:
            sys.stdout.write(output)

    def run(self) -> int:
        """
        Run the command.

        Returns:
            int: Exit code (0 ok, 1 validation failure, 2 parse or usage error, 3 internal error)
        """
        try:
            self._initialize_components()
        except ConfigurationError as e:
            print(f"ERROR: Configuration error: {e}", file=sys.stderr)
            return exit_code_for(ErrorCategory.CONFIGURATION)

        self.error_handler.log_execution_start(self.command.verb.value)
        try:
            output, count, passed = self._execute()
            self._emit(output)
        except UsageError as e:
            self.error_handler.log_execution_failure(e, ErrorCategory.USAGE)
            print(f"ERROR: {e}", file=sys.stderr)
            return exit_code_for(ErrorCategory.USAGE)
        except Exception as e:
            category = self.error_handler.categorize(e)
            self.error_handler.log_execution_failure(e, category)
            print(f"ERROR: {e}", file=sys.stderr)
            return exit_code_for(category)

        if not passed:
            self.error_handler.log_warning("Self-test reported failures", ErrorCategory.VALIDATION)
            return exit_code_for(ErrorCategory.VALIDATION)
        self.error_handler.log_execution_success(count)
        return 0


def create_argument_parser() -> argparse.ArgumentParser:
    """
    Create command-line argument parser.

    Returns:
        Configured ArgumentParser instance
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--format',
        choices=[f.value for f in OutputFormat],
        help='Output format (default: from BIPATH_OUTPUT_FORMAT or text)'
    )
    common.add_argument(
        '--field',
        type=int,
        metavar='P',
        help="Prime overriding the input header's field; entries must be residues modulo P"
    )
    common.add_argument(
        '--seed',
        type=int,
        metavar='SEED',
        help='Master seed for self-test trials (default: from BIPATH_SEED or 0)'
    )
    common.add_argument(
        '--trials',
        type=int,
        metavar='COUNT',
        help='Trials per seeded self-test suite (default: from BIPATH_TRIALS or 100)'
    )
    common.add_argument(
        '--out',
        type=str,
        metavar='PATH',
        help='Write results to PATH instead of stdout'
    )
    common.add_argument(
        '--env-file',
        type=str,
        metavar='PATH',
        help='Load BIPATH_* defaults from a .env file; the environment takes precedence'
    )
    common.add_argument(
        '--log-level',
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
        help='Log level for stderr (default: from BIPATH_LOG_LEVEL or WARNING)'
    )

    parser = argparse.ArgumentParser(
        description='Bipath persistence - arc codes, distances and fibered invariants',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s decompose module.bipath                 # Arc code as a table
  %(prog)s decompose module.bipath --format json   # Arc code as canonical JSON
  %(prog)s slice module.bipath --out slice.zz      # Finite zigzag slice
  %(prog)s distance a.bipath b.bipath              # Bottleneck distance
  %(prog)s fiber grid.txt embed.txt line.txt       # Fibered arc code and barcode
  %(prog)s selftest --seed 7 --trials 500          # Oracle suites
        """
    )
    parser.add_argument(
        '--version',
        action='version',
        version='Bipath Arc Codes 1.0.0'
    )
    subparsers = parser.add_subparsers(dest='verb', metavar='VERB')
    subparsers.required = True
    helps = {
        CommandVerb.VALIDATE: ('FILE', '+', 'Parse and validate input files'),
        CommandVerb.DECOMPOSE: ('FILE', 1, 'Arc code of a BIPATH file or barcode of a ZIGZAG file'),
        CommandVerb.SLICE: ('FILE', 1, 'Restriction of a BIPATH file to its zigzag slice'),
        CommandVerb.DISTANCE: ('FILE', 2, 'Bottleneck (= interleaving) distance of two BIPATH files'),
        CommandVerb.FIBER: ('FILE', '+', 'GRID or BIFILT file followed by EMBED and PATH files'),
        CommandVerb.SELFTEST: (None, None, 'Run the seeded oracle suites'),
    }
    for verb, (metavar, nargs, text) in helps.items():
        sub = subparsers.add_parser(verb.value, parents=[common], help=text)
        if metavar is not None:
            sub.add_argument('inputs', metavar=metavar, nargs=nargs)
    return parser


def build_command(args: argparse.Namespace) -> Command:
    """Command from parsed arguments."""
    return Command(
        verb=CommandVerb(args.verb),
        inputs=list(getattr(args, 'inputs', None) or []),
        field_override=args.field,
        output_format=OutputFormat(args.format) if args.format else None,
        seed=args.seed,
        trials=args.trials,
        out_path=args.out,
        env_file=args.env_file,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Main entry point for the application.

    Returns:
        int: Exit code
    """
    parser = create_argument_parser()
    args = parser.parse_args(argv)

    try:
        app = ArcCodeApplication(build_command(args))
        app.log_level_override = args.log_level
        return app.run()
    except KeyboardInterrupt:
        print("\nInterrupted by user", file=sys.stderr)
        return 130


if __name__ == '__main__':
    sys.exit(main())
