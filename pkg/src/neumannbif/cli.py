"""Command line: ``spectrum``, ``classify``, ``verify`` and ``diagram``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure,
4 disagreement between the numerical verification and the predictions.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Optional, Sequence

from threadpoolctl import threadpool_limits

from .bifurcation_classifier import classify_range
from .config import RunConfig, load_config
from .errors import ConfigError, NeumannBifError
from .neumann_spectrum import RootCache, eigenvalues_up_to
from .operator_spectrum import matrix_spectrum

log = logging.getLogger("neumannbif")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_DISAGREE = 4

SPECTRUM_HEADER = ["beta", "degree_l", "radial_index_m", "root_x", "harmonic_dim", "eigenspace_dim"]
CLASSIFY_HEADER = ["lambda0", "c1", "c2", "c3", "thm0", "local_bifurcation", "global_bifurcation",
                   "symmetry_breaking", "radial_only", "kernel_dim_normal", "fired", "explanation"]
BRANCH_HEADER = ["branch_id", "kind", "lambda", "residual", "min_singular", "radial_energy_fraction",
                 "dominant_degree", "coeff_norm"]
DIAGRAM_HEADER = ["series_id", "kind", "lambda0", "lambda", "branch_measure", "isotropy"]

CONDITION_LABELS = {"c1": "C1", "c2": "C2", "c3": "C3", "thm0": "thm0"}


class Disagreement(Exception):
    pass


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _json_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    return json.dumps([dict(zip(header, row)) for row in rows], indent=1) + "\n"


def _emit(text: str, target: Optional[Path]) -> None:
    if target is None:
        sys.stdout.write(text)
    else:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text)


def _table(cfg: RunConfig, header, rows, target: Optional[Path]) -> None:
    rows = list(rows)
    text = _json_text(header, rows) if cfg.output_format == "json" else _csv_text(header, rows)
    _emit(text, target)


@contextmanager
def _cache(cfg: RunConfig, path: Optional[str]):
    """Root cache bound to ``--cache``; written back if new roots were computed."""
    from . import neumann_spectrum

    cache = RootCache(cfg.dimension_N, Path(path) if path else None)
    previous = neumann_spectrum._shared_caches.get(cfg.dimension_N)
    neumann_spectrum._shared_caches[cfg.dimension_N] = cache
    try:
        yield cache
    finally:
        if previous is not None:
            neumann_spectrum._shared_caches[cfg.dimension_N] = previous
        else:
            neumann_spectrum._shared_caches.pop(cfg.dimension_N, None)
        if path and cache.dirty:
            cache.save()


def _beta_max(cfg: RunConfig, spec) -> float:
    from .galerkin.pipeline import auto_beta_max

    return cfg.beta_max if cfg.beta_max is not None else auto_beta_max(spec.alphas, cfg.lambda_range)


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(cfg: RunConfig, args) -> int:
    if cfg.beta_max is None:
        spec = matrix_spectrum(cfg.coupling_matrix())
        beta_max = _beta_max(cfg, spec)
    else:
        beta_max = cfg.beta_max
    eigs = eigenvalues_up_to(cfg.dimension_N, beta_max, threads=args.threads,
                             coincidence_tol=cfg.tolerances.get("coincidence", 1e-9))
    spaces = eigs.distinct()

    def space_dim(beta: float) -> int:
        return min(spaces, key=lambda s: abs(s.beta - beta)).total_dim

    rows = [(e.beta, e.degree_l, e.radial_index_m, e.root_x, e.harmonic_dim, space_dim(e.beta)) for e in eigs]
    _table(cfg, SPECTRUM_HEADER, rows, args.target)
    return EXIT_OK


def classification_rows(cfg: RunConfig, threads: int = 1) -> list[tuple]:
    spec = matrix_spectrum(cfg.coupling_matrix())
    lo, hi = cfg.lambda_range
    eigs = eigenvalues_up_to(cfg.dimension_N, _beta_max(cfg, spec), threads=threads,
                             coincidence_tol=cfg.tolerances.get("coincidence", 1e-9))
    rows = []
    for rec in classify_range(spec, eigs, lo, hi):
        fired = "+".join(CONDITION_LABELS[name] for name in rec.fired()) or "none"
        explanation = "; ".join(
            f"{item['clause']} {'fired' if item['fired'] else 'not fired'}: {item['detail']}"
            for item in rec.explanation)
        rows.append((rec.lambda0, rec.c1, rec.c2, rec.c3, rec.thm0, rec.local_bifurcation,
                     rec.global_bifurcation, rec.symmetry_breaking, rec.radial_only,
                     rec.kernel_dim_normal, fired, explanation))
    return rows


def cmd_classify(cfg: RunConfig, args) -> int:
    _table(cfg, CLASSIFY_HEADER, classification_rows(cfg, args.threads), args.target)
    return EXIT_OK


def branch_rows(report) -> list[tuple]:
    rows = []
    for p in report.trivial.points:
        rows.append((0, "trivial", p.lam, p.residual_norm, p.jacobian_min_singulars[0],
                     p.isotropy.radial_energy_fraction, p.isotropy.dominant_degree, p.coeff_norm))
    for bid, branch in enumerate(report.branches, start=1):
        lam0 = branch.origin[0]
        rows.append((bid, "bifurcating", lam0, 0.0, 0.0, 1.0, 0, 0.0))  # root on the trivial orbit
        for p in branch.points:
            rows.append((bid, "bifurcating", p.lam, p.residual_norm, p.jacobian_min_singulars[0],
                         p.isotropy.radial_energy_fraction, p.isotropy.dominant_degree, p.coeff_norm))
    return rows


def cmd_verify(cfg: RunConfig, args) -> int:
    from .galerkin.pipeline import run_verification
    from .galerkin.verifier import StepPolicy

    if cfg.dimension_N != 2:
        raise ConfigError("dimension_N", "verification runs on the disk only, N must be 2")
    model = cfg.build_model()
    tol = cfg.tolerances
    defaults = StepPolicy()
    policy = StepPolicy(trivial_step=tol.get("trivial_step", defaults.trivial_step),
                        ds_initial=tol.get("ds_initial", defaults.ds_initial),
                        ds_max=tol.get("ds_max", defaults.ds_max),
                        branch_points=tol.get("branch_points", defaults.branch_points))
    report = run_verification(model, cfg.l_max, cfg.m_max, cfg.lambda_range, cfg.beta_max, policy,
                              threads=args.threads)
    _table(cfg, BRANCH_HEADER, branch_rows(report), args.target)
    summary = json.dumps(report.summary(), indent=1) + "\n"
    if args.target is not None:
        _emit(summary, args.target.with_name(args.target.name + ".summary.json"))
        if cfg.write_states:
            states = [{"branch_id": bid, "origin": list(b.origin),
                       "points": [{"lambda": p.lam, "coeffs": p.coeffs.tolist()} for p in b.points]}
                      for bid, b in enumerate(report.branches, start=1)]
            _emit(json.dumps({"model": model.describe(), "branches": states}) + "\n",
                  args.target.with_name(args.target.name + ".states.json"))
    sys.stderr.write(summary)
    if not report.agreement:
        sys.stderr.write("disagreements:\n" + "".join(f"  - {d}\n" for d in report.disagreements))
        raise Disagreement()
    return EXIT_OK


def _read_branches(path: Path) -> list[dict]:
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != BRANCH_HEADER:
                raise ConfigError("output.branches", f"{path} is not a branch file")
            return list(reader)
    except OSError as exc:
        raise ConfigError("output.branches", f"cannot read {path}: {exc.strerror}") from exc


def diagram_series(rows: list[dict]) -> list[tuple]:
    """Reshape branch rows into (series_id, kind, lambda0, lambda, measure, isotropy) tuples."""
    groups: dict[int, list[dict]] = {}
    for row in rows:
        groups.setdefault(int(row["branch_id"]), []).append(row)
    trivial = groups.pop(0, [])
    ordered = sorted(groups.items(), key=lambda kv: (float(kv[1][0]["lambda"]), kv[0]))
    out = []
    if trivial or not ordered:
        for row in trivial:
            out.append((0, "trivial", "", float(row["lambda"]), 0.0, "SO(2)"))
    for sid, (_, pts) in enumerate(ordered, start=1):
        lam0 = float(pts[0]["lambda"])
        for row in pts:
            frac = float(row["radial_energy_fraction"])
            label = "SO(2)" if frac > 0.999 else f"degree-{row['dominant_degree']}"
            out.append((sid, "bifurcating", lam0, float(row["lambda"]), float(row["coeff_norm"]), label))
    return out


def render_svg(series: list[tuple], width: int = 640, height: int = 400) -> str:
    pad = 48
    lams = [s[3] for s in series] or [0.0, 1.0]
    meas = [s[4] for s in series] or [0.0, 1.0]
    x0, x1 = min(lams), max(lams)
    y0, y1 = 0.0, max(max(meas), 1e-12)
    x1 = x1 if x1 > x0 else x0 + 1.0

    def sx(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    colours = ["#444444", "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"]
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
             f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle">lambda</text>',
             f'<text x="14" y="{height / 2:.1f}" transform="rotate(-90 14 {height / 2:.1f})" '
             f'text-anchor="middle">|u - u0|</text>',
             f'<text x="{pad}" y="{height - pad + 16}" text-anchor="middle">{x0:.3g}</text>',
             f'<text x="{width - pad}" y="{height - pad + 16}" text-anchor="middle">{x1:.3g}</text>',
             f'<text x="{pad - 4}" y="{pad + 4}" text-anchor="end">{y1:.3g}</text>']
    ids = sorted({s[0] for s in series})
    for sid in ids:
        pts = " ".join(f"{sx(s[3]):.2f},{sy(s[4]):.2f}" for s in series if s[0] == sid)
        colour = colours[sid % len(colours)]
        lines.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_diagram(cfg: RunConfig, args) -> int:
    source = cfg.resolve(cfg.branches_path or cfg.output_path)
    if source is None:
        raise ConfigError("output.branches", "no branch file to read")
    if not source.exists():
        raise ConfigError("output.branches", f"{source} does not exist")
    series = diagram_series(_read_branches(source))
    _table(cfg, DIAGRAM_HEADER, series, args.target)
    if cfg.svg_path:
        _emit(render_svg(series), cfg.resolve(cfg.svg_path))
    return EXIT_OK


COMMAND_HELP = {
    "spectrum": "Neumann eigenvalues up to the cutoff with eigenspace dimensions",
    "classify": "candidate bifurcation levels in the range and their verdicts",
    "verify": "Galerkin check of the predictions on the disk for a model",
    "diagram": "bifurcation diagram data (and SVG) from a verify branch file",
}

COMMANDS = {"spectrum": cmd_spectrum, "classify": cmd_classify, "verify": cmd_verify, "diagram": cmd_diagram}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neumannbif",
                                     description="Neumann spectra, bifurcation classification and disk verification.")
    parser.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in COMMANDS.items():
        p = sub.add_parser(name, help=COMMAND_HELP[name])
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--cache", help="root cache file, read if present and updated with new roots")
        p.add_argument("--out", help="output file; overrides output.path, stdout if neither is set")
        p.add_argument("--threads", type=int, default=1, help="worker threads for root scanning")
        p.add_argument("--seed", type=int, default=0, help="accepted for randomized test drivers; unused")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        cfg = load_config(args.config)
        args.target = Path(args.out) if args.out else cfg.resolve(cfg.output_path)
        if args.command == "diagram" and args.out is None and cfg.branches_path is None:
            args.target = None  # output.path names the branch file to read
        with threadpool_limits(limits=1), _cache(cfg, args.cache):
            return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except Disagreement:
        return EXIT_DISAGREE
    except (NeumannBifError, ArithmeticError, ValueError) as exc:
        sys.stderr.write(f"numerical failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
