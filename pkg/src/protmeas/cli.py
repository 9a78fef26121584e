"""Command-line surface: scans, fits, Dyson tables, and oracle runs.

Every artifact is deterministic for a fixed configuration: grids are fixed,
floats are emitted with 12 significant digits, CSV rows use LF endings, and
JSON objects carry a schema_version field.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import analysis
from .config import (
    ConfigError,
    load_config,
    load_profile,
    load_system,
    parse_pointer,
    parse_profile,
    parse_system,
)
from .dyson import DysonRequest, amplitude_table, nested_integral_identity, second_order_breakdown
from .model import ModelValidationError, SystemModel, build_pointer
from .oracle import full_measurement_run
from .profiles import CouplingProfile, ProfileError, fourier_transform, numeric_fourier_transform

SCHEMA_VERSION = 1

_VALIDATION_ERRORS = (ConfigError, ModelValidationError, ProfileError, ValueError)


def fmt(v: float) -> str:
    """Fixed 12-significant-digit scientific notation for reproducible diffs."""
    return f"{v:.11e}"


def _write(out_dir: str | None, name: str, text: str) -> None:
    if out_dir is None:
        click.echo(text, nl=False)
    else:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        (path / name).write_text(text, encoding="utf-8", newline="\n")
        click.echo(f"wrote {path / name}", err=True)


def _json_text(obj: dict) -> str:
    obj = {"schema_version": SCHEMA_VERSION, **obj}
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _default_qubit() -> SystemModel:
    return SystemModel(
        energies=np.array([-0.5, 0.5]),
        observable=np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
        initial_level=0,
    )


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="TOML config providing system/profile/pointer tables.")
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output directory (default: stdout).")
@click.option("--format", "fmt_kind", type=click.Choice(["csv", "json", "text"]),
              default=None, help="Output format where a command supports several.")
@click.pass_context
def main(ctx, config_path, out_dir, fmt_kind):
    """Protective-measurement coupling windows, amplitudes, and scaling fits."""
    ctx.ensure_object(dict)
    ctx.obj.update(config=config_path, out=out_dir, format=fmt_kind)


def _config_table(ctx, name: str) -> dict | None:
    path = ctx.obj.get("config")
    if path is None:
        return None
    return load_config(path).get(name)


def _profile_from_ctx(ctx, kind, T, turn_on_fraction, area=1.0) -> CouplingProfile:
    table = _config_table(ctx, "profile")
    if table is not None and kind is None:
        return parse_profile(table, base_dir=Path(ctx.obj["config"]).parent)
    if kind is None:
        kind = "boxcar"
    if kind == "trapezoid":
        return CouplingProfile.trapezoid(T, turn_on_fraction or 0.2, area=area)
    return CouplingProfile(kind, T, area=area)


def _system_from_ctx(ctx, system_path) -> SystemModel:
    if system_path is not None:
        return load_system(system_path)
    table = _config_table(ctx, "system")
    if table is not None:
        return parse_system(table)
    return _default_qubit()


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(2)


@main.command()
@click.option("--profile-kind", default="boxcar", show_default=True)
@click.option("--turn-on-fraction", type=float, default=None)
@click.option("--T", "duration", type=float, default=1.0, show_default=True)
@click.option("--x-max", type=float, default=100.0, show_default=True)
@click.option("--points", type=int, default=500, show_default=True)
@click.option("--numeric/--no-numeric", default=False,
              help="Also emit the quadrature transform as a cross-check column.")
@click.pass_context
def ft(ctx, profile_kind, turn_on_fraction, duration, x_max, points, numeric):
    """Tabulate the coupling-window Fourier transform over x = omega T."""
    try:
        profile = _profile_from_ctx(ctx, profile_kind, duration, turn_on_fraction)
        xs = np.linspace(0.0, x_max, points)
        lines = ["x,transform" + (",numeric" if numeric else "")]
        for x in xs:
            omega = x / profile.duration
            gt = fourier_transform(profile, omega)
            row = f"{fmt(x)},{fmt(gt)}"
            if numeric:
                row += f",{fmt(numeric_fourier_transform(profile, omega))}"
            lines.append(row)
        _write(ctx.obj["out"], "ft.csv", "\n".join(lines) + "\n")
    except _VALIDATION_ERRORS as exc:
        _fail(exc)


@main.command()
@click.option("--profile-kind", default="boxcar", show_default=True)
@click.option("--x-min", type=float, default=0.0, show_default=True)
@click.option("--x-max", type=float, default=400 * math.pi)
@click.option("--points", type=int, default=200, show_default=True)
@click.option("--fit-xmin", type=float, default=20 * math.pi,
              help="Antinode threshold for the exponent fit.")
@click.option("--system", "system_path", type=click.Path(), default=None)
@click.pass_context
def scan(ctx, profile_kind, x_min, x_max, points, fit_xmin, system_path):
    """Probability scan with envelope antinodes and a power-law exponent fit."""
    try:
        system = _system_from_ctx(ctx, system_path)
        result = analysis.probability_scan(system, profile_kind, (x_min, x_max), points)
        beta, stderr = analysis.fit_envelope_exponent(result, fit_xmin)
        lines = ["x,probability,is_antinode"]
        env = set(np.round(result.envelope_x, 12))
        for x, y in zip(result.samples_x, result.samples_y):
            lines.append(f"{fmt(x)},{fmt(y)},0")
        for x, y in zip(result.envelope_x, result.envelope_y):
            lines.append(f"{fmt(x)},{fmt(y)},1")
        _write(ctx.obj["out"], "scan.csv", "\n".join(lines) + "\n")
        _write(ctx.obj["out"], "scan.json", _json_text({
            "profile_kind": profile_kind,
            "beta": beta, "beta_stderr": stderr,
            "fit_xmin": fit_xmin,
        }))
    except _VALIDATION_ERRORS as exc:
        _fail(exc)


@main.command()
@click.option("--xmin", type=float, default=20 * math.pi,
              help="Antinode threshold for the exponent fits.")
@click.option("--xmax", type=float, default=400 * math.pi)
@click.option("--out", "out_dir", type=click.Path(), default=None)
@click.pass_context
def table1(ctx, xmin, xmax, out_dir):
    """Exponents and peak widths for the three canonical coupling windows."""
    out_dir = out_dir or ctx.obj["out"]
    try:
        rows = analysis.table1_report(x_min=xmin, x_max=xmax)
    except _VALIDATION_ERRORS as exc:
        _fail(exc)
    header = f"{'profile':<14} {'beta':>10} {'stderr':>10} {'fwhm':>10}  status"
    text_lines = [header, "-" * len(header)]
    json_rows = []
    for r in rows:
        if r.error is not None:
            text_lines.append(f"{r.profile_kind:<14} {'--':>10} {'--':>10} {'--':>10}  ERROR: {r.error}")
        else:
            status = "pass" if (r.beta_ok and r.fwhm_ok) else "FAIL"
            text_lines.append(
                f"{r.profile_kind:<14} {r.beta:>10.4f} {r.beta_stderr:>10.4f} "
                f"{r.fwhm:>10.4f}  {status}"
            )
        json_rows.append({
            "profile_kind": r.profile_kind,
            "beta": r.beta, "beta_stderr": r.beta_stderr,
            "beta_expected": r.beta_expected, "beta_ok": r.beta_ok,
            "fwhm": r.fwhm, "fwhm_expected": r.fwhm_expected, "fwhm_ok": r.fwhm_ok,
            "error": r.error,
        })
    _write(out_dir, "table1.txt", "\n".join(text_lines) + "\n")
    _write(out_dir, "table1.json", _json_text({"rows": json_rows, "x_min": xmin}))
    if not all(r.beta_ok and r.fwhm_ok for r in rows):
        sys.exit(1)


@main.command()
@click.option("--system", "system_path", type=click.Path(), default=None)
@click.option("--profile", "profile_path", type=click.Path(), default=None)
@click.option("--profile-kind", default=None)
@click.option("--T", "duration", type=float, default=10.0, show_default=True)
@click.option("--a", "momentum", type=float, default=1.0, show_default=True)
@click.option("--max-order", type=int, default=4, show_default=True)
@click.pass_context
def dyson(ctx, system_path, profile_path, profile_kind, duration, momentum, max_order):
    """Order-resolved Dyson amplitude table for one pointer momentum."""
    try:
        system = _system_from_ctx(ctx, system_path)
        if profile_path is not None:
            profile = load_profile(profile_path)
        else:
            profile = _profile_from_ctx(ctx, profile_kind, duration, None)
        req = DysonRequest(system=system, profile=profile, max_order=max_order,
                           pointer_momentum=momentum)
        table = amplitude_table(req)
        assembled = table.assemble(momentum)
    except _VALIDATION_ERRORS as exc:
        _fail(exc)
    if ctx.obj["format"] == "json":
        rows = [
            {"order": ell, "m": m,
             "re": table.orders[ell, m].real, "im": table.orders[ell, m].imag}
            for ell in range(max_order + 1) for m in range(system.dim)
        ]
        _write(ctx.obj["out"], "dyson.json", _json_text({
            "rows": rows,
            "assembled": [{"m": m, "re": c.real, "im": c.imag}
                          for m, c in enumerate(assembled)],
            "profile_kind": profile.kind, "T": profile.duration,
            "a": momentum, "max_order": max_order,
            "truncation_bound": table.truncation_bound(momentum),
        }))
    else:
        lines = [f"{'order':>5} {'m':>3} {'re':>19} {'im':>19}"]
        for ell in range(max_order + 1):
            for m in range(system.dim):
                v = table.orders[ell, m]
                lines.append(f"{ell:>5} {m:>3} {fmt(v.real):>19} {fmt(v.imag):>19}")
        lines.append("")
        lines.append(f"assembled C_m at a = {fmt(momentum)}:")
        for m, c in enumerate(assembled):
            lines.append(f"{'':>5} {m:>3} {fmt(c.real):>19} {fmt(c.imag):>19}")
        _write(ctx.obj["out"], "dyson.txt", "\n".join(lines) + "\n")


@main.command()
@click.option("--system", "system_path", type=click.Path(), default=None)
@click.option("--profile", "profile_path", type=click.Path(), default=None)
@click.option("--profile-kind", default=None)
@click.option("--T", "duration", type=float, default=None)
@click.option("--grid", type=int, default=64, show_default=True)
@click.option("--steps", type=int, default=None)
@click.option("--x0", type=float, default=0.0)
@click.option("--sigma-x", type=float, default=1.0)
@click.option("--grid-span", type=float, default=4.0)
@click.pass_context
def oracle(ctx, system_path, profile_path, profile_kind, duration, grid, steps,
           x0, sigma_x, grid_span):
    """Exact full measurement run over the pointer-momentum grid."""
    try:
        system = _system_from_ctx(ctx, system_path)
        if profile_path is not None:
            profile = load_profile(profile_path)
            if duration is not None and duration != profile.duration:
                profile = CouplingProfile(profile.kind, duration,
                                          turn_on_fraction=profile.turn_on_fraction,
                                          area=profile.area)
        else:
            profile = _profile_from_ctx(ctx, profile_kind, duration or 10.0, None)
        pointer_table = _config_table(ctx, "pointer")
        if pointer_table is not None:
            pointer = parse_pointer(pointer_table)
        else:
            pointer = build_pointer(x0=x0, sigma_x=sigma_x, grid_size=grid,
                                    grid_span=grid_span)
        result = full_measurement_run(system, profile, pointer, profile.duration,
                                      steps=steps)
    except _VALIDATION_ERRORS as exc:
        _fail(exc)
    summary = {
        "pointer_shift": result.pointer_shift,
        "pointer_shift_density": result.pointer_shift_density,
        "disturbance": result.disturbance,
        "purity": result.purity,
        "convergence": result.convergence,
        "steps": result.step_count,
    }
    if ctx.obj["format"] == "json":
        _write(ctx.obj["out"], "oracle.json", _json_text(summary))
    else:
        d = system.dim
        header = "a," + ",".join(
            f"re_{m},im_{m}" for m in range(d)
        ) + ",survival"
        lines = [header]
        for a, row in zip(pointer.momenta, result.final_amplitudes):
            cells = [fmt(a)]
            for m in range(d):
                cells += [fmt(row[m].real), fmt(row[m].imag)]
            cells.append(fmt(abs(row[system.initial_level]) ** 2))
            lines.append(",".join(cells))
        _write(ctx.obj["out"], "oracle.csv", "\n".join(lines) + "\n")
        _write(ctx.obj["out"], "oracle.json", _json_text(summary))


@main.command()
@click.option("--system", "system_path", type=click.Path(), default=None)
@click.option("--T", "duration", type=float, default=200.0, show_default=True)
@click.option("--profiles", default="boxcar,triangle,raised-cosine", show_default=True)
@click.option("--grid", type=int, default=64, show_default=True)
@click.pass_context
def pointer(ctx, system_path, duration, profiles, grid):
    """Pointer shifts for several coupling windows, with a correction band."""
    try:
        system = _system_from_ctx(ctx, system_path)
        pointer_model = build_pointer(x0=0.0, sigma_x=1.0, grid_size=grid, grid_span=4.0)
        a_edge = pointer_model.grid_span
        breakdown = second_order_breakdown(system, a_edge, duration)
        band = (2 * a_edge * abs(breakdown.delta_e2) * duration
                + a_edge**2 * (abs(breakdown.mixing_term) + abs(breakdown.normalization_term))
                + 1e-6)
        rows = []
        for kind in profiles.split(","):
            kind = kind.strip()
            profile = CouplingProfile(kind, duration)
            run = full_measurement_run(system, profile, pointer_model, duration)
            expected = profile.cumulative_area(profile.half_duration) * system.diagonal_expectation
            rows.append({
                "profile_kind": kind,
                "shift": run.pointer_shift,
                "shift_density": run.pointer_shift_density,
                "expected": expected,
                "within_band": bool(abs(run.pointer_shift - expected) <= band),
                "disturbance": run.disturbance,
            })
    except _VALIDATION_ERRORS as exc:
        _fail(exc)
    _write(ctx.obj["out"], "pointer.json", _json_text({
        "rows": rows, "band": band, "T": duration,
    }))
    lines = [f"{'profile':<14} {'shift':>16} {'expected':>16}  in-band"]
    for r in rows:
        lines.append(f"{r['profile_kind']:<14} {r['shift']:>16.9f} "
                     f"{r['expected']:>16.9f}  {'yes' if r['within_band'] else 'NO'}")
    _write(ctx.obj["out"], "pointer.txt", "\n".join(lines) + "\n")


@main.command()
@click.option("--profile-kind", default="boxcar", show_default=True)
@click.option("--turn-on-fraction", type=float, default=None)
@click.option("--T", "duration", type=float, default=1.0, show_default=True)
@click.option("--max-ell", type=int, default=6, show_default=True)
@click.pass_context
def identity(ctx, profile_kind, turn_on_fraction, duration, max_ell):
    """Nested time-ordered integrals of g against the 1/l! identity."""
    try:
        profile = _profile_from_ctx(ctx, profile_kind, duration, turn_on_fraction)
        lines = ["ell,value,expected,abs_error"]
        for ell in range(1, max_ell + 1):
            value = nested_integral_identity(profile, ell)
            expected = profile.area**ell / math.factorial(ell)
            lines.append(f"{ell},{fmt(value)},{fmt(expected)},{fmt(abs(value - expected))}")
        _write(ctx.obj["out"], "identity.csv", "\n".join(lines) + "\n")
    except _VALIDATION_ERRORS as exc:
        _fail(exc)


@main.command()
@click.pass_context
def run(ctx):
    """Dispatch the subcommand named by the config's [run] table."""
    path = ctx.obj.get("config")
    if path is None:
        _fail(ConfigError("run", "the run command requires --config"))
    try:
        cfg = load_config(path)
        run_table = cfg.get("run")
        if not isinstance(run_table, dict) or "command" not in run_table:
            raise ConfigError("run.command", "missing")
        command = run_table["command"]
        target = main.commands.get(command)
        if target is None or command == "run":
            raise ConfigError("run.command", f"unknown subcommand {command!r}")
        args = {k.replace("-", "_"): v for k, v in run_table.items() if k != "command"}
    except _VALIDATION_ERRORS as exc:
        _fail(exc)
    ctx.invoke(target, **args)


def run_experiment(config_path: str | Path, out_dir: str | Path | None = None) -> int:
    """Programmatic entry point mirroring ``protmeas run --config ...``."""
    args = ["--config", str(config_path)]
    if out_dir is not None:
        args += ["--out", str(out_dir)]
    args.append("run")
    try:
        main.main(args=args, standalone_mode=False)
    except SystemExit as exc:
        return int(exc.code or 0)
    except click.ClickException as exc:
        exc.show()
        return 2
    return 0


if __name__ == "__main__":
    main()
