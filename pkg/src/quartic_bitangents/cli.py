"""Command-line front end: selftest, period-matrix sampling, full pipeline runs.

Subcommands
    selftest     exact combinatorial checks of the characteristic layer
    random-tau   sample an admissible period matrix, write it as JSON
    run          full pipeline on a period matrix, emit a JSON report

Exit codes: 0 pass, 2 bad input, 3 degenerate period matrix, 4 verification
failure, 5 numerical failure inside the construction.

A period matrix file is a JSON object {"tau": T} with T a 3x3 array of
[re, im] pairs; every complex number in reports uses the same encoding.
Reports are deterministic: identical input and config give identical bytes.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import characteristics as chars
from .bitangents import assemble_full, compute_X, merge_constants
from .errors import (
    DegenerateTau,
    InvalidInput,
    QuarticBitangentsError,
    RetriesExhausted,
)
from .quartic import (
    MONOMIALS,
    VerificationThresholds,
    extract_Q,
    minor_quartic,
    verify_all,
)
from .theta import (
    PeriodMatrix,
    ThetaTable,
    TruncationConfig,
    build_theta_table,
    degeneracy_indicator,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3
EXIT_VERIFICATION = 4
EXIT_NUMERICAL = 5

MAX_TAU_DRAWS = 100


@dataclass
class RunConfig:
    tau_path: str | None = None
    seed: int | None = None
    scale: float = 0.1
    tol: float = 1e-12
    degeneracy_threshold: float = 1e-6
    checks: bool = True
    out_path: str | None = None
    verbose: bool = False

    def validate(self):
        if (self.tau_path is None) == (self.seed is None):
            raise InvalidInput("exactly one of --tau and --seed must be given")
        if not self.tol > 0:
            raise InvalidInput("--tol must be positive")
        if not self.degeneracy_threshold > 0:
            raise InvalidInput("--degeneracy-threshold must be positive")


def _pair(value: complex) -> list[float]:
    return [float(value.real), float(value.imag)]


def _pairs(vector) -> list[list[float]]:
    return [_pair(complex(v)) for v in np.asarray(vector).ravel()]


def _matrix_pairs(matrix) -> list[list[list[float]]]:
    matrix = np.asarray(matrix)
    return [[_pair(complex(v)) for v in row] for row in matrix]


def load_period_matrix(path: str) -> PeriodMatrix:
    """Read {"tau": 3x3 of [re, im]}; symmetrise only sub-1e-15 asymmetry."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read period matrix from {path}: {exc}") from exc
    if not isinstance(payload, dict) or "tau" not in payload:
        raise InvalidInput('period matrix file must be a JSON object with a "tau" key')
    raw = payload["tau"]
    try:
        arr = np.array(
            [[complex(entry[0], entry[1]) for entry in row] for row in raw], dtype=complex
        )
    except (TypeError, IndexError, ValueError) as exc:
        raise InvalidInput("tau entries must be [re, im] pairs") from exc
    if arr.shape != (3, 3):
        raise InvalidInput(f"tau must be 3x3, got {arr.shape}")
    asym = np.max(np.abs(arr - arr.T))
    if asym > 1e-15:
        raise InvalidInput(f"tau is asymmetric by {asym:.3e} (> 1e-15); refusing to symmetrise")
    if asym > 0:
        arr = (arr + arr.T) / 2.0
    return PeriodMatrix(arr)


def draw_period_matrix(
    seed: int,
    scale: float,
    cfg: TruncationConfig,
    degeneracy_threshold: float,
) -> tuple[PeriodMatrix, ThetaTable, int]:
    """i*I + scale*(symmetric noise), redrawn until admissible.

    Admissible means Im tau positive definite and degeneracy indicator above
    the threshold.  The seed fully determines the output.
    """
    if scale < 0 or scale > 0.5:
        raise InvalidInput("scale must lie in [0, 0.5]")
    rng = np.random.default_rng(seed)
    upper = np.triu_indices(3)
    for draw in range(1, MAX_TAU_DRAWS + 1):
        sym_re = np.zeros((3, 3))
        sym_im = np.zeros((3, 3))
        sym_re[upper] = rng.uniform(-1.0, 1.0, 6)
        sym_im[upper] = rng.uniform(-1.0, 1.0, 6)
        sym_re += np.triu(sym_re, 1).T
        sym_im += np.triu(sym_im, 1).T
        tau = scale * sym_re + 1j * (np.eye(3) + scale * sym_im)
        if np.linalg.eigvalsh(tau.imag)[0] <= 0:
            continue
        period = PeriodMatrix(tau)
        table = build_theta_table(period, cfg)
        if degeneracy_indicator(table) > degeneracy_threshold:
            return period, table, draw
    raise RetriesExhausted(
        f"no admissible period matrix in {MAX_TAU_DRAWS} draws (seed {seed}, scale {scale})"
    )


def selftest_checks():
    """Yield (name, ok, detail) for every exact combinatorial check."""
    evens = chars.even_characteristics()
    odds = chars.odd_characteristics()
    yield "even_count", len(evens) == 36, f"{len(evens)} != 36"
    yield "odd_count", len(odds) == 28, f"{len(odds)} != 28"

    azygetic = sum(
        1 for a, b, c in itertools.combinations(odds, 3) if chars.triple_sign(a, b, c) == -1
    )
    yield "azygetic_triples", azygetic == 2016, f"{azygetic} != 2016"
    yield "syzygetic_triples", 3276 - azygetic == 1260, f"{3276 - azygetic} != 1260"

    sets_ = chars.enumerate_aronhold_sets()
    yield "aronhold_total", len(sets_) == 288, f"{len(sets_)} != 288"
    per_base: dict[chars.Characteristic, int] = {}
    for s in sets_:
        per_base[s.base] = per_base.get(s.base, 0) + 1
    yield "aronhold_bases", len(per_base) == 36, f"{len(per_base)} bases"
    yield "aronhold_per_base", set(per_base.values()) == {8}, f"counts {sorted(set(per_base.values()))}"

    standard = chars.standard_aronhold_set()
    base_zero = [s for s in sets_ if s.base == chars.ZERO]
    yield (
        "standard_set_enumerated",
        any(s.member_set() == standard.member_set() for s in base_zero),
        "standard Aronhold set missing among base-zero sets",
    )

    built = chars.build_char_matrix(standard).codes()
    golden = chars.LAYOUT_CODES
    mismatch = next(
        (
            f"slot ({i},{k}): built {built[i][k]} != golden {golden[i][k]}"
            for i in range(8)
            for k in range(8)
            if built[i][k] != golden[i][k]
        ),
        "",
    )
    yield "layout_golden", built == golden, mismatch or "layout mismatch"

    matrix = chars.build_char_matrix(standard)
    off = [m for _, _, m in matrix.off_diagonal_pairs()]
    yield (
        "layout_odd_bijection",
        sorted(m.label for m in off) == sorted(m.label for m in odds),
        "off-diagonal entries are not the 28 odd characteristics",
    )


def cmd_selftest(_args) -> int:
    failed = None
    for name, ok, detail in selftest_checks():
        print(f"{'PASS' if ok else 'FAIL'} {name}" + ("" if ok else f": {detail}"))
        if not ok and failed is None:
            failed = name
    if failed is not None:
        print(f"selftest failed at check: {failed}", file=sys.stderr)
        return 1
    return EXIT_OK


def cmd_random_tau(args) -> int:
    cfg = TruncationConfig(tol=args.tol)
    period, table, draws = draw_period_matrix(
        args.seed, args.scale, cfg, args.degeneracy_threshold
    )
    payload = {
        "tau": _matrix_pairs(period.tau),
        "seed": args.seed,
        "scale": args.scale,
        "draws": draws,
        "degeneracy_indicator": degeneracy_indicator(table),
    }
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_report(cfg: RunConfig, table: ThetaTable) -> tuple[dict, bool]:
    """Assemble the matrix, extract the quartic, and gather the JSON report."""
    merged = assemble_full(table, final_congruence=False)
    full = assemble_full(table, final_congruence=True)
    constants = merge_constants(table)
    x = compute_X(table, constants)
    q_matrix = extract_Q(table, full)
    quartic = minor_quartic(full, range(4), range(4))

    layout = full.layout.codes()
    report = {
        "config": {
            "package_version": __version__,
            "tau_source": cfg.tau_path if cfg.tau_path is not None else f"seed:{cfg.seed}",
            "scale": cfg.scale if cfg.seed is not None else None,
            "theta_tol": cfg.tol,
            "degeneracy_threshold": cfg.degeneracy_threshold,
            "checks": "on" if cfg.checks else "off",
        },
        "theta": {
            "tau": _matrix_pairs(table.tau.tau),
            "radius": table.radius,
            "tail_bound": table.tail_bound,
            "degeneracy_indicator": degeneracy_indicator(table),
            "constants": {
                f"{m.code:02d}": _pair(v) for m, v in sorted(table.constants.items(), key=lambda kv: kv[0].label)
            },
        },
        "bitangents": {
            f"{m.code:02d}": _pairs(g)
            for m, g in sorted(table.gradients.items(), key=lambda kv: kv[0].label)
        },
        "matrix": {
            "layout": [[f"{code:02d}" for code in row] for row in layout],
            "scalars": _matrix_pairs(full.scalars),
            "scalars_before_congruence": _matrix_pairs(merged.scalars),
            "merge_constants": {"A": _pair(constants.A), "B": _pair(constants.B), "C": _pair(constants.C)},
            "x_coefficients": {
                "65_row5": _pair(x.x65_row5),
                "65_row6": _pair(x.x65_row6),
                "53": _pair(x.x53),
                "74": _pair(x.x74),
                "36": _pair(x.x36),
                "11": _pair(x.x11),
                "27": _pair(x.x27),
            },
            "q_scalars": _matrix_pairs(q_matrix.scalars),
        },
        "quartic": {
            "monomials": ["".join(map(str, m)) for m in MONOMIALS],
            "coefficients": _pairs(quartic.coeffs),
            "normalization": {
                "pivot_monomial": "".join(map(str, MONOMIALS[quartic.pivot_index])),
                "pivot_value": _pair(quartic.pivot_value),
            },
        },
    }

    passed = True
    if cfg.checks:
        thresholds = VerificationThresholds(degeneracy_floor=cfg.degeneracy_threshold)
        verification = verify_all(table, full, thresholds)
        report["verification"] = verification.to_dict()
        passed = verification.passed
    return report, passed


def cmd_run(args) -> int:
    cfg = RunConfig(
        tau_path=args.tau,
        seed=args.seed,
        scale=args.scale,
        tol=args.tol,
        degeneracy_threshold=args.degeneracy_threshold,
        checks=args.checks == "on",
        out_path=args.out,
        verbose=args.verbose,
    )
    cfg.validate()
    truncation = TruncationConfig(tol=cfg.tol)

    if cfg.tau_path is not None:
        period = load_period_matrix(cfg.tau_path)
        table = build_theta_table(period, truncation)
        indicator = degeneracy_indicator(table)
        if indicator < cfg.degeneracy_threshold:
            raise DegenerateTau(
                f"degeneracy indicator {indicator:.3e} below threshold {cfg.degeneracy_threshold:g}"
            )
    else:
        period, table, _ = draw_period_matrix(
            cfg.seed, cfg.scale, truncation, cfg.degeneracy_threshold
        )

    report, passed = build_report(cfg, table)
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if cfg.out_path:
        with open(cfg.out_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    if cfg.verbose:
        print(f"verification: {'pass' if passed else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if passed else EXIT_VERIFICATION


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quartic-bitangents",
        description="Bitangent matrices of smooth plane quartics from theta gradients.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("selftest", help="exact combinatorial self-checks")

    p_tau = sub.add_parser("random-tau", help="sample an admissible period matrix")
    p_tau.add_argument("--seed", type=int, required=True)
    p_tau.add_argument("--scale", type=float, default=0.1, help="perturbation scale in [0, 0.5]")
    p_tau.add_argument("--tol", type=float, default=1e-12)
    p_tau.add_argument("--degeneracy-threshold", type=float, default=1e-6)
    p_tau.add_argument("--out", type=str, default=None)

    p_run = sub.add_parser("run", help="full pipeline with JSON report")
    p_run.add_argument("--tau", type=str, default=None, help="period matrix JSON file")
    p_run.add_argument("--seed", type=int, default=None, help="sample tau from this seed instead")
    p_run.add_argument("--scale", type=float, default=0.1)
    p_run.add_argument("--tol", type=float, default=1e-12)
    p_run.add_argument("--degeneracy-threshold", type=float, default=1e-6)
    p_run.add_argument("--checks", choices=("on", "off"), default="on")
    p_run.add_argument("--out", type=str, default=None)
    p_run.add_argument("--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"selftest": cmd_selftest, "random-tau": cmd_random_tau, "run": cmd_run}
    try:
        return handlers[args.command](args)
    except InvalidInput as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DegenerateTau as exc:
        print(f"degenerate period matrix: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except QuarticBitangentsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
