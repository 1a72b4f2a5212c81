"""Command-line front door.

Commands: attractor | classify | witness | sweep | operator-report.
Each command reads a flat key=value config file (trailing key=value
arguments override it), referencing matrices and vectors by CSV path, and
writes its artifacts into --out. Exit codes: 0 success, 2 config/parse
error, 3 numeric precondition failure, 4 degenerate construction.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import serialize
from .connectivity import classify, attach_witness
from .errors import DegenerateConstructionError, PreconditionError
from .ifs import IfsSystem, attractor, contraction, fixed_point
from .operators import (
    as_operator,
    corollary_217_residual,
    defect_operator,
    flip_identity_residual,
    high_defect_contraction,
    low_defect_contraction,
    operator_norm,
    polar_decompose,
    symmetric_eigen,
)
from .serialize import fmt
from .sw_family import (
    GridSpec,
    annihilation_witness,
    build_ifs,
    connectivity_witness,
    distance_to_exceptional_union,
    sw_config,
    sweep,
)


class ConfigError(Exception):
    """Bad config file, bad override, unknown key, or unreadable input."""


def _parse_kv_line(line: str, where: str) -> tuple[str, str] | None:
    stripped = line.strip()
    if not stripped or stripped.startswith("#"):
        return None
    if "=" not in stripped:
        raise ConfigError(f"{where}: expected key=value, got {stripped!r}")
    key, _, value = stripped.partition("=")
    return key.strip(), value.strip()


def load_config(path: str | None, overrides: list[str]) -> dict[str, str]:
    cfg: dict[str, str] = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        for lineno, line in enumerate(text.splitlines(), start=1):
            kv = _parse_kv_line(line, f"{path}:{lineno}")
            if kv:
                cfg[kv[0]] = kv[1]
    for item in overrides:
        kv = _parse_kv_line(item, "override")
        if kv:
            cfg[kv[0]] = kv[1]
    return cfg


class ConfigReader:
    """Typed access to config keys with unknown-key detection."""

    def __init__(self, cfg: dict[str, str]):
        self.cfg = dict(cfg)
        self.seen: set[str] = set()

    def _raw(self, key: str, default=None, required=False):
        self.seen.add(key)
        if key in self.cfg:
            return self.cfg[key]
        if required:
            raise ConfigError(f"missing required config key {key!r}")
        return default

    def path(self, key: str, required=False):
        return self._raw(key, required=required)

    def real(self, key: str, default=None, required=False):
        raw = self._raw(key, required=required)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"config key {key!r}: not a number: {raw!r}") from None

    def integer(self, key: str, default=None, required=False):
        raw = self._raw(key, required=required)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"config key {key!r}: not an integer: {raw!r}") from None

    def word(self, key: str, default=None, required=False, choices=None):
        raw = self._raw(key, default=default, required=required)
        if raw is not None and choices is not None and raw not in choices:
            raise ConfigError(f"config key {key!r}: expected one of {sorted(choices)}, got {raw!r}")
        return raw

    def inline_vector(self, key: str, default=None, required=False):
        raw = self._raw(key, required=required)
        if raw is None:
            return default
        try:
            return np.array([float(f) for f in raw.split(",")], dtype=float)
        except ValueError:
            raise ConfigError(f"config key {key!r}: not a comma-separated vector: {raw!r}") from None

    def reject_unknown(self):
        unknown = sorted(set(self.cfg) - self.seen)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")


def _read_matrix(path_value: str, what: str) -> np.ndarray:
    try:
        return serialize.read_matrix(path_value)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"{what}: {exc}") from None


def _read_vector(path_value: str, what: str) -> np.ndarray:
    try:
        return serialize.read_vector(path_value)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"{what}: {exc}") from None


def _build_system(reader: ConfigReader) -> IfsSystem:
    """System from s_matrix [+ s_offset] and optionally t_matrix + w_vector."""
    s = _read_matrix(reader.path("s_matrix", required=True), "s_matrix")
    s_offset_path = reader.path("s_offset")
    t_path = reader.path("t_matrix")
    w_path = reader.path("w_vector")
    if t_path is None:
        offset = _read_vector(s_offset_path, "s_offset") if s_offset_path else None
        return IfsSystem(maps=(contraction(s, offset),))
    if s_offset_path is not None:
        raise ConfigError("s_offset is only supported for single-map systems")
    t = _read_matrix(t_path, "t_matrix")
    w = _read_vector(w_path, "w_vector") if w_path else np.zeros(t.shape[0])
    return build_ifs(sw_config(s, t, w))


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_attractor(args) -> int:
    reader = ConfigReader(load_config(args.config, args.overrides))
    sys_ = _build_system(reader)
    target_r = reader.real("target_r", required=True)
    rho = reader.real("rho")
    budget = reader.integer("budget", default=10_000)
    reader.reject_unknown()
    approx = attractor(sys_, target_r, rho, budget)
    out = _out_dir(args)
    serialize.write_attractor(out / "attractor.csv", out / "attractor.meta", approx)
    print(f"radius={fmt(approx.radius)} iterations={approx.iterations} "
          f"points={approx.cloud.size}")
    return 0


def _witness_bundle(reader: ConfigReader, u: np.ndarray):
    construction = reader.word("witness.construction", required=True,
                               choices={"low", "high"})
    eps = reader.real("witness.eps", required=True)
    vec = _read_vector(reader.path("witness.vector", required=True), "witness.vector")
    if construction == "low":
        return connectivity_witness(u, eps, vec)
    return annihilation_witness(u, eps, vec)


def cmd_classify(args) -> int:
    reader = ConfigReader(load_config(args.config, args.overrides))
    target_r = reader.real("target_r", required=True)
    rho = reader.real("rho")
    if args.witness:
        s = _read_matrix(reader.path("s_matrix", required=True), "s_matrix")
        m = reader.integer("witness.m", default=1)
        bundle = _witness_bundle(reader, np.linalg.matrix_power(s, m))
        reader.reject_unknown()
        sys_ = build_ifs(sw_config(s, bundle.t, bundle.w))
        witness_verdict = attach_witness(sys_, bundle.intersection_witness(), m)
        approx = attractor(sys_, target_r, rho)
        verdict = classify(sys_, approx, witness=witness_verdict)
    else:
        sys_ = _build_system(reader)
        reader.reject_unknown()
        approx = attractor(sys_, target_r, rho)
        verdict = classify(sys_, approx)
    out = _out_dir(args)
    (out / "verdict.txt").write_text(verdict.line() + "\n")
    print(verdict.line())
    return 0


def cmd_witness(args) -> int:
    reader = ConfigReader(load_config(args.config, args.overrides))
    batch = reader.integer("batch")
    if batch is None:
        u = _read_matrix(reader.path("u_matrix", required=True), "u_matrix")
        bundle = _witness_bundle(reader, u)
        reader.reject_unknown()
        out = _out_dir(args)
        serialize.write_matrix(out / "witness_t.csv", bundle.t)
        serialize.write_vector(out / "witness_w.csv", bundle.w)
        serialize.write_vector(out / "witness_e.csv", bundle.e)
        report = [
            f"construction: {bundle.tag}",
            f"projection rank: {bundle.certificate.rank}",
            f"norm of T (certified): {fmt(bundle.certificate.norm)}",
            f"norm bound: {fmt(bundle.certificate.bound)}",
            f"identity residual: {fmt(bundle.residual)}",
        ]
        (out / "witness_report.txt").write_text("\n".join(report) + "\n")
        print("\n".join(report))
        return 0
    # batch mode: random contractions, certificate summary table
    dim = reader.integer("dim", required=True)
    eps = reader.real("witness.eps", required=True)
    construction = reader.word("witness.construction", required=True,
                               choices={"low", "high"})
    norm_cap = reader.real("norm_cap", default=0.95)
    reader.reject_unknown()
    rng = np.random.default_rng(args.seed)
    rows = ["index,norm_u,rank,norm_t,bound,residual,status"]
    build = connectivity_witness if construction == "low" else annihilation_witness
    failures = 0
    for k in range(batch):
        raw = rng.standard_normal((dim, dim))
        u = raw * (rng.uniform(0.3, norm_cap) / operator_norm(raw))
        vec = rng.standard_normal(dim)
        try:
            bundle = build(u, eps, vec)
        except DegenerateConstructionError:
            rows.append(f"{k},{fmt(operator_norm(u))},0,,,,degenerate")
            continue
        except PreconditionError as exc:
            failures += 1
            rows.append(f"{k},{fmt(operator_norm(u))},,,,,failed: {exc}")
            continue
        cert = bundle.certificate
        rows.append(f"{k},{fmt(operator_norm(u))},{cert.rank},{fmt(cert.norm)},"
                    f"{fmt(cert.bound)},{fmt(bundle.residual)},ok")
    out = _out_dir(args)
    (out / "witness_batch.csv").write_text("\n".join(rows) + "\n")
    print("\n".join(rows))
    if failures:
        raise PreconditionError(f"{failures} of {batch} witness constructions failed")
    return 0


def _parse_grid(reader: ConfigReader, dim: int) -> GridSpec:
    base = reader.inline_vector("grid.base", default=np.zeros(dim))
    axes = []
    ranges = []
    steps = []
    for k in (1, 2):
        axis = reader.inline_vector(f"grid.axis{k}")
        lo = reader.real(f"grid.min{k}")
        hi = reader.real(f"grid.max{k}")
        n = reader.integer(f"grid.steps{k}")
        present = [axis is not None, lo is not None, hi is not None, n is not None]
        if not any(present):
            continue
        if not all(present):
            raise ConfigError(f"grid axis {k}: need all of grid.axis{k}/min{k}/max{k}/steps{k}")
        if axis.shape[0] != dim:
            raise ConfigError(f"grid.axis{k}: length {axis.shape[0]} does not match dimension {dim}")
        axes.append(axis)
        ranges.append((lo, hi))
        steps.append(n)
    if not axes:
        raise ConfigError("sweep needs at least grid.axis1/min1/max1/steps1")
    if base.shape[0] != dim:
        raise ConfigError(f"grid.base: length {base.shape[0]} does not match dimension {dim}")
    return GridSpec(base=base, axes=tuple(axes), ranges=tuple(ranges), steps=tuple(steps))


def cmd_sweep(args) -> int:
    reader = ConfigReader(load_config(args.config, args.overrides))
    s = _read_matrix(reader.path("s_matrix", required=True), "s_matrix")
    t = _read_matrix(reader.path("t_matrix", required=True), "t_matrix")
    target_r = reader.real("target_r", required=True)
    rho = reader.real("rho")
    n_max = reader.integer("n_max", default=8)
    grid = _parse_grid(reader, s.shape[0])
    reader.reject_unknown()
    report = sweep(s, t, grid, target_r, rho, n_max, threads=args.threads)
    out = _out_dir(args)
    serialize.write_sweep_csv(out / "sweep.csv", report)
    serialize.write_sweep_meta(out / "sweep.meta", report)
    if grid.ndim == 2:
        serialize.write_sweep_pgm(out / "sweep.pgm", report)
    from .figures import render_sweep_figure

    render_sweep_figure(report, out / "sweep.png")
    for line in serialize.sweep_meta_lines(report):
        print(line)
    return 0


def cmd_operator_report(args) -> int:
    reader = ConfigReader(load_config(args.config, args.overrides))
    matrix = _read_matrix(reader.path("matrix", required=True), "matrix")
    eps_raw = reader.word("eps", default="0.1,0.5")
    reader.reject_unknown()
    try:
        eps_values = [float(f) for f in eps_raw.split(",")]
    except ValueError:
        raise ConfigError(f"eps: not a comma-separated list of numbers: {eps_raw!r}") from None
    u = as_operator(matrix)
    norm = operator_norm(u)
    lines = [f"operator norm: {fmt(norm)}"]
    if norm >= 1.0:
        raise PreconditionError("operator norm must be < 1 for the contraction report")
    spectrum = symmetric_eigen(defect_operator(u))
    lines.append("defect spectrum: " +
                 ", ".join(fmt(v) for v in spectrum.eigenvalues))
    for eps in eps_values:
        low = low_defect_contraction(u, eps)
        high = high_defect_contraction(u, eps)
        lines.append(f"eps={fmt(eps)}: low rank={low.rank} "
                     f"norm={fmt(low.norm)} bound={fmt(low.bound)}; "
                     f"high rank={high.rank} norm={fmt(high.norm)} bound={fmt(high.bound)}")
    try:
        lines.append(f"flip-identity residual: {fmt(flip_identity_residual(u))}")
        lines.append(f"conjugation-identity residual: {fmt(corollary_217_residual(u))}")
    except PreconditionError as exc:
        lines.append(f"identity residuals: skipped ({exc})")
    out = _out_dir(args)
    (out / "operator_report.txt").write_text("\n".join(lines) + "\n")
    from .figures import render_spectrum_figure

    render_spectrum_figure(spectrum.eigenvalues, eps_values, out / "spectrum.png")
    print("\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ifslab",
        description="Certified attractor approximation and connectivity analysis "
                    "for affine iterated function systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, witness_flag=False):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker processes")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
        if witness_flag:
            p.add_argument("--witness", action="store_true",
                           help="build and attach the exact connectivity witness")
        p.add_argument("overrides", nargs="*", metavar="key=value",
                       help="config overrides")

    common(sub.add_parser("attractor", help="certified attractor cloud"))
    common(sub.add_parser("classify", help="tri-state connectivity verdict"),
           witness_flag=True)
    common(sub.add_parser("witness", help="exact connectivity witness constructions"))
    common(sub.add_parser("sweep", help="grid sweep over the translation vector"))
    common(sub.add_parser("operator-report", help="norms, defect spectrum, certificates"))
    return parser


_HANDLERS = {
    "attractor": cmd_attractor,
    "classify": cmd_classify,
    "witness": cmd_witness,
    "sweep": cmd_sweep,
    "operator-report": cmd_operator_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DegenerateConstructionError as exc:
        print(f"degenerate construction: {exc}", file=sys.stderr)
        return 4
    except PreconditionError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
