"""Command-line front end: ``kpartite {eval,sweep,verify}``.

Every flag can also come from a run configuration given with ``--config``
(``key = value`` lines, keys are the long flag names without the leading
dashes); flags on the command line win. The state-file schema is described
in :mod:`kpartite.textconfig`.

Exit codes: 0 success, 1 validation error, 2 suite failure, 3 I/O error.

Examples::

    kpartite eval --family GhzMix10 --p 0.2 --q 0.1 --criterion thm1 --k 3
    kpartite eval --family WQutritMix --p 1 --criterion thm2 --k 2,3 --base 0000 --omega 1,2
    kpartite sweep --family GhzMix10 --criterion thm1,critI --k 3,4 --out figs
    kpartite verify --seed 42
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from . import criteria, sweep, verify
from .criteria import ElementFiducial
from .qstate import FamilySpec, StateError
from .sweep import CriterionSpec, SweepError
from .textconfig import ConfigError, parse_int_list, parse_key_values, parse_label, parse_state_file
from .twocopy import SwapFiducial

EXIT_OK, EXIT_INVALID, EXIT_SUITE, EXIT_IO = 0, 1, 2, 3

DEFAULTS = {
    "family": "GhzMix10",
    "n": None,
    "p": 0.0,
    "q": 0.0,
    "criterion": "thm1",
    "k": None,
    "resolution": 201,
    "rays": 64,
    "tol": 1e-6,
    "seed": 0,
    "out": ".",
    "format": "csv,svg",
    "workers": 1,
    "suite": ",".join(verify.SUITES),
    "samples": None,
}

# value types for keys read from a config document
_CONFIG_TYPES = {
    "n": int, "p": float, "q": float, "resolution": int, "rays": int, "tol": float,
    "seed": int, "workers": int, "samples": int,
}


class UsageError(Exception):
    """Bad flags or configuration; maps to exit code 1."""


def _family_preset(name: str) -> tuple[str, int | None]:
    """Map a family alias to ``(kind, n_sites)``."""
    m = re.fullmatch(r"(?i)ghz(?:mix)?(\d+)?", name)
    if m:
        return "ghz", int(m.group(1)) if m.group(1) else None
    if name.lower() in ("wqutrit", "wqutritmix", "w"):
        return "wqutrit", None
    raise UsageError(f"unknown family {name!r}; use GhzMix<N>, ghz, WQutritMix or --state-file")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for suite failures here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kpartite", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="run configuration document (key = value lines)")
        p.add_argument("--family", help="GhzMix<N>, ghz (with --n), or WQutritMix")
        p.add_argument("--n", type=int, help="number of qubits for the ghz family")
        p.add_argument("--state-file", help="state file; overrides --family")
        p.add_argument("--criterion", help="comma list of " + ", ".join(sweep.CRITERIA))
        p.add_argument("--k", help="comma list of levels k")
        p.add_argument("--phi", help="swap fiducial as two labels 'x,y'")
        p.add_argument("--base", help="element-criteria base label")
        p.add_argument("--omega", help="element-criteria level set, e.g. 1,2")
        p.add_argument("--workers", type=int)
        p.add_argument("--seed", type=int, help="accepted for archived configs; eval and sweep are deterministic")

    ev = sub.add_parser("eval", help="evaluate criteria at one (p, q)")
    common(ev)
    ev.add_argument("--p", type=float)
    ev.add_argument("--q", type=float)

    sw = sub.add_parser("sweep", help="grid sweep and threshold curves over the (p, q) simplex")
    common(sw)
    sw.add_argument("--resolution", type=int, help="grid points per axis; 0 skips the grid")
    sw.add_argument("--rays", type=int, help="rays for threshold curves; 0 skips the curves")
    sw.add_argument("--tol", type=float, help="bisection tolerance along each ray")
    sw.add_argument("--out", help="output directory")
    sw.add_argument("--format", help="comma list of csv, svg")

    ve = sub.add_parser("verify", help="run the self-check suites")
    ve.add_argument("--config")
    ve.add_argument("--suite", help="comma list of " + ", ".join(verify.SUITES))
    ve.add_argument("--seed", type=int)
    ve.add_argument("--samples", type=int, help="samples per suite (suite default if omitted)")
    ve.add_argument("--n", type=int, help="qubit count for the oracle suite")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults < config document < command-line flags."""
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        doc = parse_key_values(Path(args.config).read_text())
        for key, raw in doc.items():
            key = key.replace("-", "_")
            if key not in vars(args) or key in ("config", "command"):
                raise UsageError(f"unknown configuration key {key!r}")
            try:
                merged[key] = _CONFIG_TYPES.get(key, str)(raw)
            except ValueError as exc:
                raise UsageError(f"config key {key!r}: {exc}") from exc
    for key, value in vars(args).items():
        if value is not None:
            merged[key] = value
    return merged


def _split(text: str) -> list[str]:
    return [part for part in re.split(r"[\s,]+", str(text).strip()) if part]


def load_family(cfg: dict) -> FamilySpec:
    if cfg.get("state_file"):
        state = parse_state_file(Path(cfg["state_file"]).read_text())
        a, b = state.pure_pair()
        return FamilySpec("custom", components=(a, b))
    kind, n = _family_preset(cfg["family"])
    if kind == "ghz":
        n = cfg["n"] if cfg["n"] is not None else (n or 10)
        return FamilySpec("ghz", n_sites=n)
    return FamilySpec("wqutrit")


def _default_ks(name: str, n: int) -> list[int]:
    if name in ("thm3", "critII"):
        return [n]
    return [2]


def build_specs(cfg: dict, dims) -> list[CriterionSpec]:
    swap = element = None
    if cfg.get("phi"):
        parts = _split(cfg["phi"])
        if len(parts) != 2:
            raise UsageError(f"--phi needs two labels 'x,y', got {cfg['phi']!r}")
        swap = SwapFiducial.basis(parse_label(parts[0]), parse_label(parts[1]))
    if cfg.get("base") or cfg.get("omega"):
        base = parse_label(cfg["base"]) if cfg.get("base") else tuple(0 for _ in dims)
        omega = parse_int_list(cfg["omega"]) if cfg.get("omega") else list(range(1, dims[0]))
        element = ElementFiducial(base, omega)
    ks = parse_int_list(cfg["k"]) if cfg.get("k") else None
    specs = []
    for name in _split(cfg["criterion"]):
        # critIII has no free level; it ignores the k list
        levels = [2] if name == "critIII" else ks or _default_ks(name, len(dims))
        for k in levels:
            spec = CriterionSpec(name, k, swap=swap, element=element)
            if not (name == "thm2" and k == 1):
                spec.validate(dims)
            specs.append(spec)
    return specs


def _warn(notes) -> None:
    for note in notes:
        print(f"warning: {note}", file=sys.stderr)


def cmd_eval(cfg: dict, out=None) -> int:
    out = out or sys.stdout
    family = load_family(cfg)
    specs = build_specs(cfg, family.dims)
    rho = family.at(cfg["p"], cfg["q"])
    print("\t".join(criteria.CriterionVerdict.FIELDS), file=out)
    for spec in specs:
        if spec.name == "thm2" and spec.k == 1:
            verdicts = criteria.pairwise_separability(rho, spec.element_fiducial(family.dims))
        else:
            verdicts = [spec.evaluate(rho)]
        for v in verdicts:
            _warn(v.warnings)
            print(v.record(), file=out)
    return EXIT_OK


def cmd_sweep(cfg: dict, out=None) -> int:
    out = out or sys.stdout
    family = load_family(cfg)
    specs = build_specs(cfg, family.dims)
    formats = [f.lower() for f in _split(cfg["format"])]
    for f in formats:
        if f not in ("csv", "svg"):
            raise UsageError(f"unknown format {f!r}")
    target = Path(cfg["out"])
    target.mkdir(parents=True, exist_ok=True)
    workers, label = cfg["workers"], family.label
    curves = []
    for spec in specs:
        stem = f"{label}_{spec.name}_k{spec.k}"
        if cfg["resolution"]:
            grid = sweep.grid_sweep(family, spec, cfg["resolution"], workers)
            for f in formats:
                path = target / f"{stem}_grid.{f}"
                path.write_text(sweep.export(grid, f, f"{label} {spec.name} k={spec.k}"))
                print(path, file=out)
        if cfg["rays"]:
            curve = sweep.threshold_curve(family, spec, cfg["rays"], cfg["tol"], workers=workers)
            curves.append(curve)
            if curve.omitted:
                print(f"{stem}: {len(curve.omitted)} of {cfg['rays']} rays without a crossing",
                      file=sys.stderr)
            for f in formats:
                path = target / f"{stem}.{f}"
                path.write_text(sweep.export(curve, f, f"{label} {spec.name} k={spec.k}"))
                print(path, file=out)
    if len(curves) > 1 and "svg" in formats:
        names = "_".join(dict.fromkeys(s.name for s in specs))
        path = target / f"{label}_{names}.svg"
        path.write_text(sweep.curves_to_svg(curves, f"{label} threshold curves"))
        print(path, file=out)
    return EXIT_OK


def cmd_verify(cfg: dict, out=None) -> int:
    out = out or sys.stdout
    names = _split(cfg["suite"])
    for name in names:
        if name not in verify.SUITES:
            raise UsageError(f"unknown suite {name!r}; choose from {', '.join(verify.SUITES)}")
    n = cfg["n"] if cfg.get("n") is not None else 3
    if not 2 <= n <= 6:
        raise UsageError(f"--n must be in [2, 6] for the oracle suite, got {n}")
    reports = verify.run_suites(names, seed=cfg["seed"], samples=cfg["samples"], n_qubits=n)
    for r in reports:
        print(r.summary(), file=out)
        for msg in r.failures[:10]:
            print(f"  {msg}", file=out)
    total = sum(r.checks for r in reports)
    failed = sum(len(r.failures) for r in reports)
    print(f"total: {total} checks, {failed} failures", file=out)
    return EXIT_OK if failed == 0 else EXIT_SUITE


COMMANDS = {"eval": cmd_eval, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except (UsageError, ConfigError, SweepError, StateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
