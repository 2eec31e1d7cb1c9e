"""Command-line orchestration.

Flags take the form ``--key value``; ``--config FILE`` points at a plain
key=value file whose entries the command-line flags override.  Unknown
keys are rejected.  Every run writes ``manifest.json`` echoing the fully
resolved configuration (that file alone reproduces the run), a
``summary.json`` of (key, value, units, oracle-provenance) records, and
one or more comma-separated tables.  Numbers are printed with 17
significant digits so that dumps round-trip bit-exactly.

Exit codes: 0 success, 1 usage error, 2 domain error, 3 convergence
failure.  Verification subcommands always exit 0 when the computation
itself succeeds; their pass/fail verdicts live in the summary.
"""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotics, closed_forms, cylgrid, minimizer, quadrature
from . import exponents as expo
from .errors import ConvergenceError, DomainError, HscylError, UsageError
from .specfn import sphere_measure
from .svgplot import render_line_plot

__all__ = ["RunConfig", "parse_args", "run", "main"]

_VERSION = "0.1.0"


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


# per-subcommand parameter schema: key -> (type, default); REQUIRED means no default
_REQUIRED = object()

_SCHEMAS = {
    "exponents": {
        "n": (int, _REQUIRED), "k": (int, _REQUIRED),
        "p": (float, 2.0), "s": (float, 1.0),
        "gamma": (float, None), "q": (float, None),
    },
    "quadrature": {
        "identity": (str, _REQUIRED),
        "n": (int, 3), "k": (int, 2), "m": (float, 2.0),
        "s": (float, 1.0), "a": (float, 2.0),
        "x-norm": (float, 1.0), "y-norm": (float, 0.0),
        "tol": (float, 1e-10),
    },
    "constant": {
        "n": (int, _REQUIRED), "k": (int, _REQUIRED), "tol": (float, 1e-10),
    },
    "verify-extremal": {
        "n": (int, 3), "k": (int, 2), "lam": (float, 1.0),
        "levels": (int, 3), "nodes": (int, 24), "box": (float, 4.0),
        "tol": (float, 1e-10),
    },
    "verify-prop4": {
        "a": (int, 1), "b": (int, 1), "lam": (float, 1.0),
        "alpha": (float, 1.0), "beta": (float, 1.0),
        "nodes": (int, 1024), "lo": (float, 1.0), "hi": (float, 2.0),
    },
    "minimize": {
        "n": (int, 3), "k": (int, 2), "s": (float, 1.0),
        "rho-max": (float, 120.0), "r-max": (float, 120.0),
        "n-rho": (int, 256), "n-r": (int, 256),
        "grading": (float, minimizer.DEFAULT_MINIMIZE_GRADING),
        "step": (float, 2.0), "max-iters": (int, 4000), "tol": (float, 1e-10),
        "init": (str, "positive-bump"), "init-scale": (float, None),
        "stepper": (str, "semi-implicit"),
    },
    "decay-fit": {
        "grid": (str, None), "samples": (str, None),
        "direction": (str, "rho-axis"),
        "min-radius": (float, 0.0), "max-radius": (float, None),
        "n": (int, None), "p": (float, 2.0),
        "mode": (str, "solution-two-sided"), "tol": (float, 0.1),
    },
    "plot": {
        "input": (str, _REQUIRED), "output": (str, _REQUIRED),
        "log-x": (bool, False), "log-y": (bool, False),
        "title": (str, ""), "x-col": (str, None), "y-col": (str, None),
    },
}

# owning module, used to qualify propagated error messages
_OWNERS = {
    "exponents": "exponents", "quadrature": "quadrature",
    "constant": "closed_forms", "verify-extremal": "closed_forms",
    "verify-prop4": "cylgrid", "minimize": "minimizer",
    "decay-fit": "asymptotics", "plot": "cli",
}


@dataclass
class RunConfig:
    subcommand: str
    parameters: dict = field(default_factory=dict)
    output_dir: Path = Path(".")


def _convert(key: str, raw: str, typ):
    try:
        if typ is bool:
            return _parse_bool(raw)
        return typ(raw)
    except UsageError:
        raise
    except (TypeError, ValueError):
        raise UsageError(f"malformed value for --{key}: {raw!r} is not a {typ.__name__}")


def parse_args(argv) -> RunConfig:
    """Parse [subcommand, --key, value, ...] into a validated RunConfig."""
    if not argv:
        raise UsageError(
            "usage: hscyl SUBCOMMAND [--key value]... ; subcommands: "
            + ", ".join(sorted(_SCHEMAS))
        )
    sub = argv[0]
    if sub not in _SCHEMAS:
        raise UsageError(f"unknown subcommand {sub!r}; expected one of "
                         + ", ".join(sorted(_SCHEMAS)))
    schema = _SCHEMAS[sub]

    raw: dict[str, str] = {}
    i = 1
    config_path = None
    output_dir = None
    while i < len(argv):
        token = argv[i]
        if not token.startswith("--"):
            raise UsageError(f"expected a --flag, got {token!r}")
        key = token[2:]
        if i + 1 >= len(argv):
            raise UsageError(f"flag --{key} is missing its value")
        value = argv[i + 1]
        i += 2
        if key == "config":
            config_path = value
            continue
        if key == "output-dir":
            output_dir = value
            continue
        if key not in schema:
            raise UsageError(f"unknown flag --{key} for subcommand {sub}")
        raw[key] = value

    file_values: dict[str, str] = {}
    if config_path is not None:
        try:
            lines = Path(config_path).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise UsageError(f"cannot read config file {config_path}: {exc}")
        for lineno, line in enumerate(lines, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{config_path}:{lineno}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key == "output-dir":
                if output_dir is None:
                    output_dir = value
                continue
            if key not in schema:
                raise UsageError(f"{config_path}:{lineno}: unknown key {key!r} for {sub}")
            file_values[key] = value

    merged = {**file_values, **raw}  # flags override the file
    params = {}
    for key, (typ, default) in schema.items():
        if key in merged:
            params[key] = _convert(key, merged[key], typ)
        elif default is _REQUIRED:
            raise UsageError(f"subcommand {sub} requires --{key}")
        else:
            params[key] = default
    return RunConfig(subcommand=sub, parameters=params,
                     output_dir=Path(output_dir) if output_dir else Path("."))


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_manifest(config: RunConfig) -> None:
    config.output_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "tool": "hscyl",
        "version": _VERSION,
        "subcommand": config.subcommand,
        "parameters": {k: (None if v is None else v)
                       for k, v in sorted(config.parameters.items())},
        "output_dir": str(config.output_dir),
    }
    with open(config.output_dir / "manifest.json", "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_summary(config: RunConfig, records) -> None:
    path = config.output_dir / "summary.json"
    payload = [
        {"key": key, "value": value, "units": units, "oracle": oracle}
        for key, value, units, oracle in records
    ]
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2, sort_keys=False)
        fh.write("\n")
    for key, value, _, _ in records:
        print(f"{key} = {_fmt(value) if isinstance(value, (int, float)) else value}")


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------

def _run_exponents(config: RunConfig) -> None:
    p = config.parameters
    ctx = expo.ExponentContext(n=p["n"], k=p["k"], p=p["p"], s=p["s"])
    ok = expo.admissible(ctx)
    records = [("admissible", ok, "", "window predicate")]
    if ok:
        rep = expo.aux_exponents(ctx)
        records += [
            ("p_star_s", rep.p_star_s, "", "exponent algebra"),
            ("p_prime", rep.p_prime, "", "exponent algebra"),
            ("r", rep.r, "", "exponent algebra"),
            ("r_prime", "inf" if math.isinf(rep.r_prime) else rep.r_prime, "",
             "exponent algebra"),
            ("sigma", rep.sigma, "", "exponent algebra"),
            ("p_sigma", rep.p_sigma, "", "exponent algebra"),
            ("decay_bound", rep.decay_bound, "", "exponent algebra"),
        ]
        _write_csv(config.output_dir / "exponents.csv",
                   ["n", "k", "p", "s", "p_star_s", "p_prime", "r", "r_prime",
                    "sigma", "p_sigma", "decay_bound"],
                   [[ctx.n, ctx.k, ctx.p, ctx.s, rep.p_star_s, rep.p_prime, rep.r,
                     rep.r_prime, rep.sigma, rep.p_sigma, rep.decay_bound]])
    if p["gamma"] is not None:
        low, high = expo.galaxy_mass_window(p["gamma"])
        records += [("mass_window_low", low, "", "exponent algebra"),
                    ("mass_window_high", high, "", "exponent algebra")]
        if p["q"] is not None:
            records.append(("mass_window_inside",
                            expo.galaxy_mass_inside(p["q"], p["gamma"]), "",
                            "window predicate"))
    _write_summary(config, records)


def _run_quadrature(config: RunConfig) -> None:
    p = config.parameters
    identity = p["identity"]
    tol = p["tol"]
    if identity == "beta-full":
        closed = closed_forms.beta_integral_full(p["n"], p["k"], p["m"], p["s"])
        quad = quadrature.integrate_cylindrical(
            lambda rho, r: (1.0 + rho**2 + r**2) ** (-p["m"]),
            p["n"], p["k"], p["s"], tol=tol)
        oracle = "adaptive cylindrical quadrature"
    elif identity == "beta-radial":
        closed = closed_forms.beta_integral_radial(p["k"], p["a"], p["s"])
        quad = quadrature.integrate_radial(
            lambda rho: (1.0 + rho**2) ** (-p["a"]), p["k"], p["s"], tol=tol)
        oracle = "adaptive radial quadrature"
    elif identity == "newtonian-ball":
        n, k = p["n"], p["k"]
        z = np.zeros(n)
        z[0] = p["x-norm"]
        if k < n:
            z[k] = p["y-norm"]
        quad = quadrature.singular_newtonian_integral(z, n, k, p["s"],
                                                      tol=max(tol, 1e-7))
        if p["s"] == 0.0:
            znorm = float(np.linalg.norm(z))
            closed = sphere_measure(n) * (0.5 * znorm) ** 2 / 2.0
        else:
            closed = float("nan")
        oracle = "nested shifted-spherical quadrature"
    else:
        raise UsageError(f"unknown identity {identity!r}; expected beta-full, "
                         f"beta-radial or newtonian-ball")
    rel = abs(quad.value - closed) / abs(closed) if math.isfinite(closed) else float("nan")
    _write_csv(config.output_dir / "comparison.csv",
               ["identity", "closed_form", "quadrature", "relative_error",
                "error_estimate", "evaluations"],
               [[identity, closed, quad.value, rel, quad.error_estimate,
                 quad.evaluations]])
    _write_summary(config, [
        ("identity", identity, "", ""),
        ("closed_form", closed, "", "Beta-function composition"),
        ("quadrature", quad.value, "", oracle),
        ("relative_error", rel, "", "cross-check"),
    ])


def _run_constant(config: RunConfig) -> None:
    p = config.parameters
    const = closed_forms.sharp_constant_K(p["n"], p["k"], tol=p["tol"])
    _write_csv(config.output_dir / "constant.csv",
               ["n", "k", "K", "K_printed", "printed_discrepancy", "Lambda",
                "mu", "attained_ratio", "normalization_integral"],
               [[const.n, const.k, const.K, const.K_printed,
                 const.printed_discrepancy, const.Lambda, const.mu,
                 const.attained_ratio, const.normalization_integral]])
    _write_summary(config, [
        ("K", const.K, "", "quadrature of the normalization integral"),
        ("K_printed", const.K_printed, "", "literal published display"),
        ("printed_discrepancy", const.printed_discrepancy, "", "cross-check"),
        ("Lambda", const.Lambda, "", "K^(2(n-1)/(n-2))"),
        ("mu", const.mu, "", "4 Lambda / (n-2)^2"),
        ("attained_ratio", const.attained_ratio, "", "Lambda^(-1/2)"),
    ])


def _run_verify_extremal(config: RunConfig) -> None:
    p = config.parameters
    n, k, lam, box = p["n"], p["k"], p["lam"], p["box"]
    const = closed_forms.sharp_constant_K(n, k, tol=p["tol"])
    params = closed_forms.ExtremalParams(n=n, k=k, lam=lam)
    profile = closed_forms.extremal_profile(params, const)

    rows = []
    prev = None
    for level in range(p["levels"] + 1):
        nodes = p["nodes"] * 2**level
        grid = cylgrid.build_grid(n, k, box, box, nodes, nodes, grading=1.0)
        res = cylgrid.el_residual(grid.sampled(profile), const.Lambda, 1.0)
        lo, hi = box / 8.0, 0.75 * box
        rho_win = (grid.rho_nodes >= lo) & (grid.rho_nodes <= hi)
        r_win = (grid.r_nodes >= lo) & (grid.r_nodes <= hi)
        window = np.abs(res.values[np.ix_(rho_win, r_win)])
        worst = float(window.max())
        rows.append([level, nodes, box / nodes, worst,
                     prev / worst if prev else float("nan")])
        prev = worst
    ratios = [row[4] for row in rows[1:]]
    ratios_ok = all(3.5 <= q <= 4.5 for q in ratios)

    q = expo.hs_conjugate(2.0, 1.0, n)
    norm = quadrature.integrate_cylindrical(
        lambda rho, r: profile(rho, r) ** q, n, k, s=1.0, tol=p["tol"])
    norm_defect = abs(norm.value - 1.0)

    _write_csv(config.output_dir / "residuals.csv",
               ["level", "nodes", "h", "max_residual", "ratio"], rows)
    _write_summary(config, [
        ("residual_ratios_ok", ratios_ok, "", "refinement study, factor 4 +- 0.5"),
        ("finest_max_residual", rows[-1][3], "", "windowed max-norm"),
        ("normalization_defect", norm_defect, "", "cylindrical quadrature of the "
                                                  "constraint integral"),
        ("normalization_ok", bool(norm_defect <= 1e-6), "", "target 1e-6"),
    ])


def _run_verify_prop4(config: RunConfig) -> None:
    p = config.parameters
    params = closed_forms.ShiftedQuadraticParams(a=p["a"], b=p["b"], lam=p["lam"],
                                      alpha=p["alpha"], beta=p["beta"])
    n, k = params.n, params.a + 1
    grid = cylgrid.window_grid(n, k, p["lo"], p["hi"], p["lo"], p["hi"],
                               p["nodes"], p["nodes"])

    lam2 = params.lam**2
    phi = grid.sampled(lambda rho, r: lam2 * ((rho + params.alpha) ** 2
                                              + (r + params.beta) ** 2))
    res_41 = cylgrid.shifted_quadratic_residual(phi, params)
    v = grid.sampled(closed_forms.shifted_power_profile(params))
    lap = cylgrid.cyl_laplacian(v)
    source = ((params.p_coef / grid.rho_nodes)[:, None]
              + (params.q_coef / grid.r_nodes)[None, :])
    res_42 = lap.values + v.values ** (n / (n - 2.0)) * source

    trim = slice(1, -1)
    max_41 = float(np.abs(res_41.values[trim, trim]).max())
    max_42 = float(np.abs(res_42[trim, trim]).max())
    _write_csv(config.output_dir / "residuals.csv",
               ["a", "b", "lam", "alpha", "beta", "p_coef", "q_coef",
                "residual_quadratic", "residual_solution"],
               [[params.a, params.b, params.lam, params.alpha, params.beta,
                 params.p_coef, params.q_coef, max_41, max_42]])
    _write_summary(config, [
        ("p_coef", params.p_coef, "", "alpha (n-2) lam^2 a"),
        ("q_coef", params.q_coef, "", "beta (n-2) lam^2 b"),
        ("residual_quadratic_max", max_41, "", "stencil residual, interior"),
        ("residual_solution_max", max_42, "", "stencil residual, interior"),
        ("pass", bool(max_41 <= 1e-6 and max_42 <= 1e-6), "", "target 1e-6"),
    ])


def _run_minimize(config: RunConfig) -> None:
    p = config.parameters
    spec = cylgrid.GridSpec(rho_max=p["rho-max"], r_max=p["r-max"],
                            n_rho=p["n-rho"], n_r=p["n-r"], grading=p["grading"])
    opts = minimizer.MinimizeOptions(step=p["step"], max_iters=p["max-iters"],
                                     tol=p["tol"], init=p["init"],
                                     init_scale=p["init-scale"],
                                     stepper=p["stepper"])
    result = minimizer.minimize_rayleigh(p["n"], p["k"], p["s"], spec, opts)
    _write_csv(config.output_dir / "history.csv",
               ["iteration", "energy", "constraint_defect"], result.history)
    cylgrid.dump_grid(result.grid, config.output_dir / "minimizer.csv")
    _write_summary(config, [
        ("E_min", result.E_min, "", "normalized gradient flow"),
        ("K_est", result.K_est, "", "E_min^(-1/2)"),
        ("iterations", result.iterations, "", ""),
        ("truncation_estimate", result.truncation_estimate, "",
         "fundamental-decay tail model"),
        ("core_scale", result.core_scale, "", "half-peak radius"),
    ])


def _run_decay_fit(config: RunConfig) -> None:
    p = config.parameters
    if (p["grid"] is None) == (p["samples"] is None):
        raise UsageError("decay-fit needs exactly one of --grid or --samples")
    if p["grid"] is not None:
        grid = cylgrid.load_grid(p["grid"])
        samples = asymptotics.sample_ray(grid, p["direction"],
                                         min_radius=p["min-radius"],
                                         max_radius=p["max-radius"])
    else:
        rows = Path(p["samples"]).read_text(encoding="ascii").splitlines()
        pairs = [tuple(float(tok) for tok in line.split(","))
                 for line in rows[1:] if line.strip()]
        radii = np.array([row[0] for row in pairs])
        values = np.array([row[1] for row in pairs])
        samples = asymptotics.RaySamples(p["direction"], radii, values)
    fit = asymptotics.fit_decay(samples)
    records = [
        ("exponent", fit.exponent, "", "log-log least squares"),
        ("amplitude", fit.amplitude, "", "log-log least squares"),
        ("r_squared", fit.r_squared, "", "goodness of fit"),
    ]
    if p["n"] is not None:
        verdict = asymptotics.check_decay_bounds(fit, p["n"], p["p"], p["mode"],
                                                 p["tol"])
        records += [
            ("mode", verdict.mode, "", ""),
            ("bound", verdict.bound, "", "theoretical rate"),
            ("pass", verdict.passed, "", f"tolerance {verdict.tol}"),
        ]
    _write_csv(config.output_dir / "decay_fit.csv",
               ["direction", "exponent", "amplitude", "r_squared"],
               [[samples.direction, fit.exponent, fit.amplitude, fit.r_squared]])
    _write_summary(config, records)


def _read_table(path: str):
    lines = [ln for ln in Path(path).read_text(encoding="ascii").splitlines()
             if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise UsageError(f"{path} is empty")
    header = lines[0].split(",")
    data = np.array([[float(tok) for tok in ln.split(",")] for ln in lines[1:]])
    return header, data


def _run_plot(config: RunConfig) -> None:
    p = config.parameters
    header, data = _read_table(p["input"])
    if header == ["rho", "r", "value"]:
        # grid dump: plot the profile along the first r row
        r_min = data[:, 1].min()
        rows = data[data[:, 1] == r_min]
        series = [(rows[:, 0], rows[:, 2], "value(rho)")]
        xlabel, ylabel = "rho", "value"
    else:
        x_col = p["x-col"] or header[0]
        y_col = p["y-col"] or header[1]
        try:
            xi, yi = header.index(x_col), header.index(y_col)
        except ValueError:
            raise UsageError(f"columns {x_col!r}/{y_col!r} not in {header}")
        series = [(data[:, xi], data[:, yi], y_col)]
        xlabel, ylabel = x_col, y_col
    render_line_plot(series, p["output"], log_x=p["log-x"], log_y=p["log-y"],
                     title=p["title"], xlabel=xlabel, ylabel=ylabel)
    _write_summary(config, [("plot", str(p["output"]), "", "")])


_RUNNERS = {
    "exponents": _run_exponents,
    "quadrature": _run_quadrature,
    "constant": _run_constant,
    "verify-extremal": _run_verify_extremal,
    "verify-prop4": _run_verify_prop4,
    "minimize": _run_minimize,
    "decay-fit": _run_decay_fit,
    "plot": _run_plot,
}


def run(config: RunConfig) -> int:
    """Dispatch a parsed configuration; returns the process exit status."""
    _write_manifest(config)
    _RUNNERS[config.subcommand](config)
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_args(argv)
        return run(config)
    except UsageError as exc:
        print(f"hscyl: usage error: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        owner = _OWNERS.get(argv[0] if argv else "", "hscyl")
        print(f"hscyl {owner}: convergence error: {exc}", file=sys.stderr)
        return 3
    except DomainError as exc:
        owner = _OWNERS.get(argv[0] if argv else "", "hscyl")
        print(f"hscyl {owner}: domain error: {exc}", file=sys.stderr)
        return 2
    except HscylError as exc:
        print(f"hscyl: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
