"""
Command-line front end for orthoseries.

    python -m src.main mrs --weight freud:4 --t 24
    python -m src.main converge --weight erdos:1:2 --f sgn --x 1 --n 8,16,32

Results go to stdout (or --output), log records to stderr. Exit codes: 0 on
success, 1 on numerical failure, 2 on usage or domain errors.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Any, List, Optional, Sequence
import argparse
import copy
import io
import json
import logging
import os
import sys

import pandas as pd
import yaml

from .bvfun.bv_function import build_bv
from .common.errors import DomainError, NumericError
from .common.utils import NumberFormat, setup_logging
from .fourier.expansion import coefficients, kernel
from .orthopoly.gauss import gauss_rule
from .orthopoly.recurrence import DiscretizationConfig, RecurrenceTable, cached_recurrence_table
from .verify.lemmas import LemmaSuiteConfig, lemma_suite
from .verify.theorem import TheoremConstants, convergence_experiment
from .weights.mrs import MrsCache, mrs_number
from .weights.weight_family import WEIGHT_GRAMMAR, WeightSpec, make_weight

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "configs" / "orthoseries_config.yaml"
CACHE_ENV_VAR = "ORTHOSERIE_CACHE"

EXIT_OK = 0
EXIT_NUMERIC = 1
EXIT_USAGE = 2


def default_config() -> Dict[str, Any]:
    """
    Built-in defaults; the YAML file and CLI flags override them.
    """
    return {
        'logging': {'level': 'INFO', 'file': None},
        'cache': {'directory': '.orthoseries_cache'},
        'discretization': DiscretizationConfig().to_dict(),
        'theorem': TheoremConstants().to_dict(),
        'verify': {**LemmaSuiteConfig().to_dict(), 'workers': 1},
        'run': {'seed': 42, 'format': 'csv'}
    }


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path: Optional[Path] = None) -> Dict[str, Any]:
    """
    Load a YAML configuration merged onto the defaults.

    A missing or unreadable file falls back to the defaults with a warning.
    """
    config = default_config()
    config_file = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    if not config_file.exists():
        if path is not None:
            logger.warning(f"config file {config_file} not found, using defaults")
        return config
    try:
        with open(config_file, 'r') as f:
            loaded = yaml.safe_load(f) or {}
        if not isinstance(loaded, dict):
            raise ValueError("top level of the config must be a mapping")
        return _deep_merge(config, loaded)
    except (OSError, ValueError, yaml.YAMLError) as e:
        logger.warning(f"failed to load config {config_file}, using defaults: {e}")
        return config


@dataclass
class RunConfig:
    """Parsed and validated view of config file, environment and flags."""
    command: str
    weight: str
    f: Optional[str] = None
    n_list: List[int] = field(default_factory=list)
    x_list: List[float] = field(default_factory=list)
    t: Optional[float] = None
    constants: TheoremConstants = field(default_factory=TheoremConstants)
    disc: DiscretizationConfig = field(default_factory=DiscretizationConfig)
    suite: LemmaSuiteConfig = field(default_factory=LemmaSuiteConfig)
    workers: int = 1
    output_format: str = "csv"
    output: Optional[Path] = None
    cache_dir: Optional[Path] = None
    split_form: bool = False
    seed: int = 42

    @classmethod
    def from_args(cls, args: argparse.Namespace, config: Dict[str, Any]) -> "RunConfig":
        cache_dir = args.cache_dir or os.environ.get(CACHE_ENV_VAR) or config['cache'].get('directory')
        seed = args.seed if args.seed is not None else int(config['run']['seed'])
        verify = dict(config['verify'])
        workers = int(verify.pop('workers', 1))
        verify['seed'] = seed

        n_list: List[int] = []
        x_list: List[float] = []
        try:
            if getattr(args, 'N', None) is not None:
                n_list = [int(args.N)]
            if getattr(args, 'n', None) is not None:
                n_list = NumberFormat.parse_int_list(args.n)
            if getattr(args, 'x', None) is not None:
                x_list = NumberFormat.parse_float_list(args.x)
        except ValueError as e:
            raise DomainError(f"bad list argument: {e}") from e
        if any(n < 1 for n in n_list):
            raise DomainError(f"degrees must be positive, got {n_list}")

        output_format = (args.format or config['run'].get('format', 'csv')).lower()
        if output_format not in ('csv', 'json'):
            raise DomainError(f"output format must be csv or json, got {output_format!r}")

        return cls(
            command=args.command,
            weight=args.weight,
            f=getattr(args, 'f', None),
            n_list=n_list,
            x_list=x_list,
            t=getattr(args, 't', None),
            constants=TheoremConstants.from_dict(config['theorem']),
            disc=DiscretizationConfig.from_dict(config['discretization']),
            suite=LemmaSuiteConfig.from_dict(verify),
            workers=max(1, workers),
            output_format=output_format,
            output=Path(args.output) if args.output else None,
            cache_dir=Path(cache_dir) if cache_dir else None,
            split_form=bool(getattr(args, 'split_form', False)),
            seed=seed
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orthoseries",
        description="Orthogonal expansions for exponential weights: MRS numbers, recurrences, "
                    "Gauss rules, partial sums and convergence bounds."
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--weight", required=True, help=WEIGHT_GRAMMAR)
    common.add_argument("--config", default=None, help="YAML configuration file")
    common.add_argument("--cache-dir", default=None, help=f"cache directory (overrides ${CACHE_ENV_VAR})")
    common.add_argument("--format", choices=("csv", "json"), default=None, help="output format")
    common.add_argument("--output", default=None, help="write results to this file instead of stdout")
    common.add_argument("--log-level", default=None, type=str.upper,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="log level")
    common.add_argument("--seed", type=int, default=None, help="seed for random test polynomials")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mrs", parents=[common], help="print the MRS number a_t")
    p.add_argument("--t", type=float, required=True)

    p = sub.add_parser("recur", parents=[common], help="build and cache a recurrence table")
    p.add_argument("--N", type=int, required=True)

    p = sub.add_parser("nodes", parents=[common], help="print an n-point Gauss rule")
    p.add_argument("--n", required=True)

    p = sub.add_parser("expand", parents=[common], help="print expansion coefficients")
    p.add_argument("--f", required=True)
    p.add_argument("--N", type=int, required=True)

    p = sub.add_parser("kernel", parents=[common], help="print K_n(x, t)")
    p.add_argument("--n", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--t", type=float, required=True)

    p = sub.add_parser("converge", parents=[common], help="run a convergence experiment")
    p.add_argument("--f", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--n", required=True)
    p.add_argument("--split-form", action="store_true", help="use the split variation form of the bound")

    p = sub.add_parser("verify-lemmas", parents=[common], help="run the equivalence suite")
    p.add_argument("--n", required=True)
    return parser


class OrthoSeriesRunner:
    """
    Runs one subcommand with shared caches.
    """

    def __init__(self, run: RunConfig):
        self.run = run
        self.logger = logging.getLogger(__name__)
        self.mrs_cache = MrsCache()
        self.spec: WeightSpec = make_weight(run.weight)

    @property
    def mrs_path(self) -> Optional[Path]:
        return self.run.cache_dir / "mrs.json" if self.run.cache_dir else None

    def load_caches(self) -> None:
        if self.mrs_path is not None:
            self.mrs_cache.load(self.mrs_path)

    def save_caches(self) -> None:
        if self.mrs_path is not None:
            self.mrs_cache.save(self.mrs_path)

    def table(self, N: int) -> RecurrenceTable:
        return cached_recurrence_table(self.spec, N, self.run.disc, self.run.cache_dir, self.mrs_cache)

    def _single_degree(self) -> int:
        if len(self.run.n_list) != 1:
            raise DomainError(f"{self.run.command} takes a single degree, got {self.run.n_list}")
        return self.run.n_list[0]

    @staticmethod
    def _frame_text(frame: pd.DataFrame) -> str:
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, float_format='%.17g', lineterminator='\n')
        return buffer.getvalue()

    def _emit(self, frame: pd.DataFrame, payload: Dict[str, Any]) -> str:
        if self.run.output_format == 'json':
            return json.dumps(payload, indent=1, sort_keys=True) + "\n"
        return self._frame_text(frame)

    def cmd_mrs(self) -> str:
        if self.run.t is None or not self.run.t > 0.0:
            raise DomainError(f"mrs needs --t > 0, got {self.run.t}")
        value = mrs_number(self.spec, self.run.t, self.mrs_cache)
        if self.run.output_format == 'json':
            return json.dumps(value.to_record(self.spec.descriptor), indent=1, sort_keys=True) + "\n"
        return NumberFormat.format_float(value.a_t) + "\n"

    def cmd_recur(self) -> str:
        table = self.table(self._single_degree())
        frame = pd.DataFrame({'k': range(table.N + 1), 'A': table.A, 'B': table.B})
        return self._emit(frame, table.to_dict())

    def cmd_nodes(self) -> str:
        n = self._single_degree()
        rule = gauss_rule(self.table(n), n, self.spec)
        ks = list(range(1, n + 1))
        frame = pd.DataFrame({'k': ks,
                              'node': [rule.node(k) for k in ks],
                              'weight': [rule.christoffel_number(k) for k in ks]})
        payload = {'weight': self.spec.descriptor, 'n': n, 'nodes': rule.nodes.tolist(),
                   'weights': rule.weights.tolist()}
        return self._emit(frame, payload)

    def cmd_expand(self) -> str:
        f = build_bv(self.run.f)
        N = self._single_degree()
        table = self.table(N)
        rule = gauss_rule(table, N, self.spec) if f.is_polynomial else None
        coeffs = coefficients(table, self.spec, rule, f, N, self.mrs_cache)
        frame = pd.DataFrame({'k': range(N), 'c': coeffs.c})
        return self._emit(frame, coeffs.to_dict())

    def cmd_kernel(self) -> str:
        n = self._single_degree()
        if len(self.run.x_list) != 1:
            raise DomainError(f"kernel takes a single x, got {self.run.x_list}")
        x = self.run.x_list[0]
        value = kernel(self.table(n), self.spec, n, x, self.run.t, self.mrs_cache)
        if self.run.output_format == 'json':
            payload = {'weight': self.spec.descriptor, 'n': n, 'x': x, 't': self.run.t, 'K_n': value}
            return json.dumps(payload, indent=1, sort_keys=True) + "\n"
        return NumberFormat.format_float(value) + "\n"

    def cmd_converge(self) -> str:
        f = build_bv(self.run.f)
        table = self.table(max(self.run.n_list))
        report = convergence_experiment(self.spec, f, self.run.x_list, self.run.n_list, self.run.constants,
                                        split_form=self.run.split_form, workers=self.run.workers,
                                        table=table, disc=self.run.disc, cache=self.mrs_cache)
        return report.to_json() if self.run.output_format == 'json' else report.to_csv()

    def cmd_verify_lemmas(self) -> str:
        table = self.table(max(self.run.n_list))
        report = lemma_suite(self.spec, self.run.n_list, self.run.suite, table=table,
                             disc=self.run.disc, cache=self.mrs_cache)
        if not report.passed:
            self.logger.warning(f"{self.spec.descriptor}: {report.report['failed_checks']} "
                                f"equivalence checks outside their brackets")
        return report.to_json()

    def execute(self) -> str:
        handlers = {
            'mrs': self.cmd_mrs,
            'recur': self.cmd_recur,
            'nodes': self.cmd_nodes,
            'expand': self.cmd_expand,
            'kernel': self.cmd_kernel,
            'converge': self.cmd_converge,
            'verify-lemmas': self.cmd_verify_lemmas
        }
        self.load_caches()
        text = handlers[self.run.command]()
        self.save_caches()
        return text


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse argv, run the subcommand and return the exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    config = load_config(args.config)
    setup_logging(args.log_level or config['logging'].get('level', 'INFO'),
                  config['logging'].get('file'))

    try:
        run = RunConfig.from_args(args, config)
        text = OrthoSeriesRunner(run).execute()
    except DomainError as e:
        logger.error(f"domain error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as e:
        logger.error(f"numerical failure: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC

    if run.output is not None:
        run.output.parent.mkdir(parents=True, exist_ok=True)
        run.output.write_text(text)
        logger.info(f"wrote {run.command} output to {run.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
