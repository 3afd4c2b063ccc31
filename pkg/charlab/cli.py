"""Command-line front end: load .cdl definitions, run one experiment and write its report.

Exit codes: 0 on success, 1 when the report misses an --assert expectation, 2 on input or run errors.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from . import __version__
from .config import ConfigLoader, Subcommand
from .config.models import CharlabConfig, PresetConfig, RunConfig, Settings
from .core.errors import AssertionMismatch, CdlSyntaxError, CharlabError
from .core.primes import parse_field_sizes, parse_primes
from .dsl import Program, parse_file
from .experiments import EXPERIMENTS, Experiment, assert_expectations

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_INPUT_ERROR = 2
EXIT_INTERRUPTED = 130


def _text_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _int_list(text: str) -> List[int]:
    return [int(part) for part in _text_list(text)]


def _list_of(convert: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse(text: str) -> Any:
        try:
            return convert(text)
        except ValueError as e:
            raise argparse.ArgumentTypeError(str(e))

    parse.__name__ = getattr(convert, "__name__", "list")
    return parse


# Per-subcommand options: (flag, destination, argparse keywords). Destinations land in RunConfig.arguments.
CURVE_OPTIONS = [("--curve", "curve", {"help": "Formula naming the curve (default: curve)"})]
SUM_OPTIONS = CURVE_OPTIONS + [
    ("--g", "g", {"help": "Polynomial fed to the additive character (default: g)"}),
    ("--h", "h", {"help": "Polynomial fed to the multiplicative character (default: h)"}),
]
PREDICATE_OPTIONS = [
    ("--predicate", "predicate", {"help": "Predicate declaration (default: f)"}),
    ("--domain", "domain", {"help": "Formula bounding the domain (default: the whole space)"}),
    ("--params", "params", {"type": _list_of(_int_list), "help": "Fixed parameter values, comma separated"}),
]

SUBCOMMAND_OPTIONS: Dict[Subcommand, List[Any]] = {
    Subcommand.SUM: SUM_OPTIONS,
    Subcommand.WEIL_SCAN: SUM_OPTIONS
    + [("--constant", "constant", {"help": "Weil constant k, or a suite constant name (gauss, elliptic)"})],
    Subcommand.AXIOM4: CURVE_OPTIONS + [("--laurent", "laurent", {"help": "Laurent declaration (default: laurent)"})],
    Subcommand.DENSITY: CURVE_OPTIONS
    + [
        ("--alpha", "alpha", {"help": "Integral linear map (default: alpha)"}),
        ("--beta", "beta", {"help": "Integral multiplicative map (default: beta)"}),
        ("--grid-res", "grid_res", {"type": int, "help": "Cells per torus axis (default: 8)"}),
        ("--height", "height", {"type": int, "help": "Hyperplane and coset search height (default: 1)"}),
    ],
    Subcommand.THETA: [
        ("--theta", "theta", {"help": "Theta declaration (default: theta)"}),
        ("--combine", "combine", {"choices": ["product", "sum", "conjugate"], "help": "Closure check"}),
        ("--other", "other", {"help": "Second theta for product and sum (default: other)"}),
    ],
    Subcommand.MEASURE_FIT: [
        ("--formula", "formula", {"help": "Family formula (default: phi)"}),
        ("--params", "params", {"type": _list_of(_int_list), "help": "Fixed parameter values, comma separated"}),
    ],
    Subcommand.INTEGRATE: PREDICATE_OPTIONS,
    Subcommand.FUBINI: PREDICATE_OPTIONS
    + [("--split", "split", {"type": int, "help": "Number of inner coordinates (default: 1)"})],
    Subcommand.DECOMPOSE: PREDICATE_OPTIONS
    + [
        ("--kind", "kind", {"choices": ["multiplicative", "additive"], "help": "Character to decompose"}),
        ("--trace-cosets", "trace_cosets", {"action": "store_true", "default": None, "help": "Check trace cosets"}),
    ],
    Subcommand.DISCREPANCY: [
        ("--alpha", "alpha", {"type": _list_of(_text_list), "help": "Kronecker angles, comma separated"}),
        ("--n", "n", {"type": _list_of(_int_list), "help": "Sequence lengths, comma separated"}),
        ("--H", "H", {"type": _list_of(_int_list), "help": "ETK frequency cut-offs, comma separated"}),
    ],
    Subcommand.ETK_SEARCH: [
        ("--gammas", "gammas", {"type": _list_of(_text_list), "help": "Generator angles, comma separated"}),
        ("--center", "center", {"type": _list_of(_text_list), "help": "Box center, comma separated"}),
        ("--radius", "radius", {"help": "Box half-width around --center (default: 1/20)"}),
        ("--low", "low", {"type": _list_of(_text_list), "help": "Box lower corner"}),
        ("--high", "high", {"type": _list_of(_text_list), "help": "Box upper corner"}),
        ("--R", "R", {"type": int, "help": "Residue modulus (default: 1)"}),
        ("--f", "f", {"type": int, "help": "Residue class (default: 1)"}),
        ("--K", "K", {"type": int, "help": "Minimum exponent (default: 1)"}),
        ("--l-max", "l_max", {"type": int, "help": "Search horizon (default: 10^6)"}),
    ],
    Subcommand.WITNESS: [
        ("--witness", "witness", {"help": "Witness declaration (default: the first one)"}),
        ("--max-records", "max_records", {"type": int, "help": "Stop after this many records"}),
    ],
}

SUBCOMMAND_HELP = {
    Subcommand.SUM: "One character sum over a curve",
    Subcommand.WEIL_SCAN: "Normalized character sums across a prime range",
    Subcommand.AXIOM4: "Finite lower bound for Laurent averages on a curve",
    Subcommand.DENSITY: "Torus coverage of a diagonal image",
    Subcommand.THETA: "Theta values and closure checks",
    Subcommand.MEASURE_FIT: "Dimension and multiplicity from point counts",
    Subcommand.INTEGRATE: "Predicate averages and their decay",
    Subcommand.FUBINI: "Direct against iterated averages",
    Subcommand.DECOMPOSE: "Character-value cells against ring formulas",
    Subcommand.DISCREPANCY: "Kronecker discrepancy against the ETK bound",
    Subcommand.ETK_SEARCH: "Smallest exponent landing in a torus box",
    Subcommand.WITNESS: "Primes whose characters meet a witness declaration",
}


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    inputs = common.add_argument_group("inputs")
    inputs.add_argument(
        "--def",
        dest="definitions",
        action="append",
        default=[],
        metavar="FILE",
        help="Definitions file (.cdl); repeatable",
    )
    inputs.add_argument("--primes", help="Primes, e.g. 5..199 or 5,7,11")
    inputs.add_argument("--q", dest="field_sizes", help="Field sizes p^e, e.g. 3^2,2^3,7")
    inputs.add_argument("--pmin", dest="prime_low", type=int, help="Smallest prime of the range")
    inputs.add_argument("--pmax", dest="prime_high", type=int, help="Largest prime of the range")

    characters = common.add_argument_group("characters")
    characters.add_argument("--psi", dest="psi_rule", help="Additive character rule: standard, trivial, c=N")
    characters.add_argument(
        "--chi", dest="chi_rule", help="Multiplicative character rule: generator, trivial, quadratic, k=N, order=r"
    )
    characters.add_argument("--order-floor", type=int, help="Skip fields whose chi has smaller order")

    limits = common.add_argument_group("limits")
    limits.add_argument("--budget", type=int, help="Enumeration budget (overrides CHARLAB_BUDGET)")
    limits.add_argument("--scan-cap", type=int, help="Largest q scanned by an existential atom")
    limits.add_argument("--dlog-cap", type=int, help="Largest q with a full log table")
    limits.add_argument("--workers", type=int, help="Worker processes")

    output = common.add_argument_group("output")
    output.add_argument("--out", help="Report file; standard output when omitted")
    output.add_argument("--format", dest="report_format", choices=["csv", "json"], help="Report format")
    output.add_argument("--assert", dest="expectations", metavar="FILE", help="Expectation file to check against")

    config = common.add_argument_group("configuration")
    config.add_argument("--profile", default="desk", help="Configuration profile (default: desk)")
    config.add_argument("--preset", help="Experiment preset from the configuration file")
    config.add_argument("--config", default="charlab.yaml", help="Configuration file (default: charlab.yaml)")
    config.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="charlab", description="Finite-field character-sum laboratory")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND", required=True)
    common = _common_options()
    for subcommand in Subcommand:
        sub = subparsers.add_parser(subcommand.value, parents=[common], help=SUBCOMMAND_HELP[subcommand])
        group = sub.add_argument_group(f"{subcommand.value} options")
        for flag, dest, kwargs in SUBCOMMAND_OPTIONS[subcommand]:
            group.add_argument(flag, dest=f"arg_{dest}", **kwargs)
    return parser


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s [%(levelname)8s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
    )


def load_settings(args: argparse.Namespace) -> Tuple[CharlabConfig, Path]:
    """Configuration file (or built-in defaults) with the profile and preset applied, and its directory."""
    loader = ConfigLoader(args.config)
    try:
        config = loader.load_config(args.profile, args.preset)
    except FileNotFoundError:
        logger.debug("No %s found; using built-in defaults", args.config)
        return ConfigLoader.select(CharlabConfig.default(), args.profile, args.preset), Path.cwd()
    return config, loader.config_file.resolve().parent


def _preset_definitions(preset: PresetConfig, base: Path) -> List[str]:
    """Preset definition paths, relative to the configuration file unless they exist as given."""
    paths = []
    for path in preset.definitions:
        candidate = Path(path)
        if not candidate.is_absolute() and not candidate.exists():
            candidate = base / candidate
        paths.append(str(candidate))
    return paths


def build_run_config(args: argparse.Namespace, config: CharlabConfig, base: Optional[Path] = None) -> RunConfig:
    """Merge command-line flags over the preset and the effective settings."""
    subcommand = Subcommand(args.subcommand)
    settings = config.defaults
    preset: Optional[PresetConfig] = config.get_preset(args.preset) if args.preset else None
    if preset is not None and preset.subcommand != subcommand:
        raise ValueError(f"Preset '{args.preset}' runs '{preset.subcommand.value}', not '{subcommand.value}'")

    arguments: Dict[str, Any] = dict(preset.arguments) if preset else {}
    for key, value in vars(args).items():
        if key.startswith("arg_") and value is not None:
            arguments[key[len("arg_") :]] = value

    definitions = list(args.definitions)
    primes_text = args.primes
    if preset is not None:
        definitions = definitions or _preset_definitions(preset, base or Path.cwd())
        if not (primes_text or args.field_sizes or args.prime_high is not None):
            primes_text = preset.primes
    return RunConfig(
        subcommand=subcommand,
        definitions=definitions,
        primes=parse_primes(primes_text) if primes_text else [],
        field_sizes=parse_field_sizes(args.field_sizes) if args.field_sizes else [],
        prime_low=args.prime_low,
        prime_high=args.prime_high,
        psi_rule=args.psi_rule or settings.characters.psi,
        chi_rule=args.chi_rule or settings.characters.chi,
        order_floor=args.order_floor if args.order_floor is not None else settings.characters.order_floor,
        budget=args.budget if args.budget is not None else settings.budgets.enumeration,
        scan_cap=args.scan_cap if args.scan_cap is not None else settings.field.scan_cap,
        dlog_cap=args.dlog_cap if args.dlog_cap is not None else settings.field.dlog_cap,
        workers=args.workers if args.workers is not None else settings.workers,
        out=args.out,
        report_format=args.report_format,
        expectations=args.expectations,
        arguments=arguments,
    )


def load_definitions(paths: Sequence[str], max_depth: int) -> Program:
    """Parse every definitions file into one program; each file must be self-contained."""
    program = Program()
    for path in paths:
        try:
            parsed = parse_file(path, max_depth)
        except CdlSyntaxError as e:
            raise CharlabError(f"{path}:{e}") from e
        for decl in parsed.declarations:
            if program.get(decl.name) is not None:
                raise CharlabError(f"{path}: '{decl.name}' is already declared by an earlier definitions file")
            program.declarations.append(decl)
        logger.debug("Loaded %d declarations from %s", len(parsed.declarations), path)
    return program


def emit(experiment: Experiment, run: RunConfig) -> None:
    fmt = run.resolved_format.value
    if run.out:
        experiment.report.write(run.out, fmt)
    else:
        sys.stdout.write(experiment.report.render(fmt))


def _flush_partial(experiment: Optional[Experiment], run: Optional[RunConfig]) -> None:
    if experiment is None or run is None:
        return
    experiment.report.partial = True
    try:
        emit(experiment, run)
    except OSError as e:
        logger.error("Could not write partial report: %s", e)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    run: Optional[RunConfig] = None
    experiment: Optional[Experiment] = None
    try:
        config, base = load_settings(args)
        settings: Settings = config.defaults
        run = build_run_config(args, config, base)
        program = load_definitions(run.definitions, settings.formula_max_depth)
        experiment = EXPERIMENTS[run.subcommand](run, settings, program)
        experiment.run()
        emit(experiment, run)
    except KeyboardInterrupt:
        print("charlab: interrupted", file=sys.stderr)
        _flush_partial(experiment, run)
        return EXIT_INTERRUPTED
    except (CharlabError, ValueError, OSError) as e:
        print(f"charlab: error: {e}", file=sys.stderr)
        _flush_partial(experiment, run)
        return EXIT_INPUT_ERROR
    except AssertionError as e:
        print(f"charlab: error: internal check failed: {e}", file=sys.stderr)
        _flush_partial(experiment, run)
        return EXIT_INPUT_ERROR

    assert run is not None and experiment is not None
    if run.expectations:
        try:
            assert_expectations(experiment.report, run.expectations)
        except AssertionMismatch as e:
            print(f"charlab: assertion failed: {e}", file=sys.stderr)
            return EXIT_ASSERTION
        except (ValueError, OSError) as e:
            print(f"charlab: error: {e}", file=sys.stderr)
            return EXIT_INPUT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
