"""Command line front end.

Eight subcommands over one run-config contract:

* ``spectrum``  -- eigenvalues of one invariant-class suboperator
* ``nustar``    -- critical viscosity of the first unstable class
* ``zvtrack``   -- eigenvalue trajectories along a descending viscosity
  schedule, classified against the inviscid spectrum
* ``laxcheck``  -- transported-eigenfield residual, 2D or 3D
* ``darboux``   -- gauge transform of a shear eigenfunction pair
* ``simulate``  -- time integration of the wave / envelope / angle models
* ``poincare``  -- strobe or section samples of a trajectory
* ``lyapunov``  -- largest Lyapunov exponent by two-orbit renormalization

Every parameter can come from a flag or from a flat ``key = value`` config
file (``--config``); flags win.  Flag values and config values pass through
the same casters, so error messages agree.  All validation happens before
any file is created; results are written atomically by ``write_result``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time

import numpy as np

from . import __version__
from .diagnostics import lyapunov_max, poincare_samples
from .errors import ComputationalError, ValidationError
from .fields import load_field, random_real_field
from .fields3d import TorusGrid3D, random_scalar_field, random_solenoidal_field
from .forcing import ABCState, ForcingSpec, abc_lyapunov, abc_step
from .grids import TorusGrid2D
from .lax import (
    DarbouxInput,
    darboux_apply,
    darboux_shear_example,
    darboux_verify,
    transported_eigenfield_check_2d,
    transported_eigenfield_check_3d,
)
from .models import (
    GLParams,
    SGParams,
    gl_limit_cycle,
    gl_limit_cycle_state,
    gl_uniform_state,
    model_step,
    sg_state,
    state_vector,
)
from .runio import (
    CONFIG_SCHEMA_VERSION,
    SCHEMA_VERSION,
    RunConfig,
    coerce_params,
    csv_line,
    enum_of,
    json_payload_line,
    parse_config_lines,
    write_result,
    worker_count,
)
from .spectra import (
    ModeClass,
    class_spectrum,
    classify_limits,
    critical_viscosity,
    euler_spectrum,
    track_zero_viscosity,
)

# ---------------------------------------------------------------------------
# casters shared by flags and config files


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ValidationError(f"expected true/false, got {text!r}")


def _floats(n: int):
    def cast(text):
        if isinstance(text, tuple):
            return text
        parts = [p.strip() for p in str(text).split(",")]
        if len(parts) != n:
            raise ValidationError(f"expected {n} comma-separated reals, got {text!r}")
        return tuple(float(p) for p in parts)

    return cast


def _kick(text):
    """'k:amp,k:amp' -> ((k, amp), ...); empty string -> ()."""
    if isinstance(text, tuple):
        return text
    out = []
    for item in str(text).split(","):
        item = item.strip()
        if not item:
            continue
        k, sep, amp = item.partition(":")
        if not sep:
            raise ValidationError(f"kick entries look like 'mode:amplitude', got {item!r}")
        out.append((int(k), float(amp)))
    return tuple(out)


def _complex(text) -> complex:
    if isinstance(text, complex):
        return text
    try:
        return complex(str(text).strip().replace(" ", ""))
    except ValueError:
        raise ValidationError(f"expected a complex literal like 0.3+0.1j, got {text!r}")


# ---------------------------------------------------------------------------
# command table


@dataclasses.dataclass(frozen=True)
class Command:
    name: str
    help: str
    schema: dict  # key -> caster
    defaults: dict  # fully typed; keys absent here are required
    required: frozenset
    formats: tuple  # supported output formats, native first
    run: object  # (params, cfg) -> (payload_lines, summary, params_echo|None)


def _jsonable(value):
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _echo(params: dict) -> dict:
    return {k: _jsonable(v) for k, v in sorted(params.items()) if not k.startswith("_")}


# -- spectrum ---------------------------------------------------------------

SPECTRUM_CSV_HEADER = "class_k1,class_k2,alpha,gamma,nu,trunc,re,im"


def _run_spectrum(p, cfg):
    cls = ModeClass(p["k1"], p["k2"])
    spec = class_spectrum(cls, p["alpha"], p["gamma"], p["nu"], p["trunc"])
    refined = class_spectrum(cls, p["alpha"], p["gamma"], p["nu"], 2 * p["trunc"])
    lines = []
    if cfg.fmt == "csv":
        lines.append(SPECTRUM_CSV_HEADER)
        for v in spec.values:
            lines.append(
                csv_line(p["k1"], p["k2"], p["alpha"], p["gamma"], p["nu"], p["trunc"], v.real, v.imag)
            )
    else:
        for v in spec.values:
            lines.append(json_payload_line({"class": [p["k1"], p["k2"]], "re": v.real, "im": v.imag}))
    summary = {
        "n_eigenvalues": len(spec.values),
        "rightmost_re": spec.values[0].real,
        "rightmost_refine_delta": float(abs(spec.values[0] - refined.values[0])),
    }
    return lines, summary, None


# -- nustar -----------------------------------------------------------------


def _run_nustar(p, cfg):
    res = critical_viscosity(p["alpha"], p["gamma"], p["trunc"], p["tol"])
    rec = {
        "nu_star": res.nu_star,
        "bracket_lo": res.bracket[0],
        "bracket_hi": res.bracket[1],
        "iterations": res.iterations,
        "refine_delta": res.refine_delta,
        "trunc": res.trunc,
    }
    return [json_payload_line(rec)], {"nu_star": res.nu_star, "refine_delta": res.refine_delta}, None


# -- zvtrack ----------------------------------------------------------------


def _run_zvtrack(p, cfg):
    if not (0.0 < p["nu_min"] < p["nu_max"]):
        raise ValidationError("need 0 < nu_min < nu_max")
    if p["n_nus"] < 3:
        raise ValidationError(f"n_nus must be >= 3, got {p['n_nus']}")
    cls = ModeClass(p["k1"], p["k2"])
    nus = np.geomspace(p["nu_max"], p["nu_min"], p["n_nus"])
    workers = worker_count(p["n_nus"])
    track = track_zero_viscosity(cls, p["alpha"], p["gamma"], nus, p["trunc"], workers=workers)
    euler = euler_spectrum(cls, p["alpha"], p["gamma"], p["trunc"])
    cl = classify_limits(track, euler, p["tol"])
    refined = euler_spectrum(cls, p["alpha"], p["gamma"], 2 * p["trunc"])

    lines = []
    for traj in cl.trajectories:
        lines.append(
            json_payload_line(
                {
                    "class": [p["k1"], p["k2"]],
                    "nus": [float(nu) for nu in traj.nus],
                    "re": [float(v.real) for v in traj.values],
                    "im": [float(v.imag) for v in traj.values],
                    "label": traj.label,
                    "limit_re": float(traj.limit.real),
                    "limit_im": float(traj.limit.imag),
                }
            )
        )
    lam0 = max((v.real for v in euler.points), default=None)
    lam0_ref = max((v.real for v in refined.points), default=None)
    summary = {
        "class_label": cl.class_label,
        "addition_set": [[v.real, v.imag] for v in cl.addition_set],
        "cluster_extent": euler.cluster_extent,
        "cluster_extent_refined": refined.cluster_extent,
        "lambda0": lam0,
        "lambda0_refine_delta": None if None in (lam0, lam0_ref) else abs(lam0 - lam0_ref),
        "workers": workers,
    }
    return lines, summary, None


# -- laxcheck ---------------------------------------------------------------


def _run_laxcheck(p, cfg):
    rng = np.random.default_rng(cfg.seed)
    if p["dim"] == "2":
        n = p["grid"] if p["grid"] else 64
        grid = TorusGrid2D(alpha=p["alpha"], nx=n, ny=n)
        om0 = random_real_field(grid, p["kmax"], rng, p["amp_omega"])
        ph0 = random_real_field(grid, p["kmax"], rng, p["amp_phi"])
        res = transported_eigenfield_check_2d(
            om0, ph0, p["t_end"], p["dt"], negative_control=p["control"]
        )
    else:
        n = p["grid"] if p["grid"] else 32
        grid3 = TorusGrid3D(nx=n, ny=n, nz=n)
        om0 = random_solenoidal_field(grid3, p["kmax"], rng, p["amp_omega"])
        ph0 = random_scalar_field(grid3, p["kmax"], rng, p["amp_phi"])
        if p["mode"] == "curl":
            res = transported_eigenfield_check_3d(
                om0, ph0, p["t_end"], p["dt"], negative_control=p["control"]
            )
        else:
            u1 = random_solenoidal_field(grid3, p["kmax"], rng, p["amp_u"])
            u2 = random_solenoidal_field(grid3, p["kmax"], rng, p["amp_u"])
            res = transported_eigenfield_check_3d(
                om0,
                ph0,
                p["t_end"],
                p["dt"],
                enforce_curl=False,
                velocity=lambda t: u1 * np.cos(t) + u2 * np.sin(t),
                negative_control=p["control"],
            )
    rec = res.to_json_dict(_echo(p))
    return [json_payload_line(rec)], {"check": res.check, "residual_inf": res.residual_inf}, None


# -- darboux ----------------------------------------------------------------


def _run_darboux(p, cfg):
    paths = [p["omega"], p["p"], p["f"], p["bigf"]]
    if any(paths):
        if not all(paths):
            raise ValidationError("pass all four of --omega/--p/--f/--bigf or none")
        fields = [load_field(path) for path in paths]
        for fld in fields:
            if not hasattr(fld, "grid") or not isinstance(fld.grid, TorusGrid2D):
                raise ValidationError("darboux inputs must be 2D field snapshots")
        inp = DarbouxInput(*fields, eta=p["eta"])
    else:
        inp = darboux_shear_example(p["nx"], p["ny"], p["eta"])
    res = darboux_apply(inp)
    chk = darboux_verify(inp, res)
    rec = chk.to_json_dict(
        {"eta": p["eta"], "nx": inp.omega.grid.nx, "ny": inp.omega.grid.ny, "example": not any(paths)}
    )
    summary = {
        "check": chk.check,
        "residual_inf": chk.residual_inf,
        "masked_fraction": res.masked_fraction,
    }
    return [json_payload_line(rec)], summary, None


# -- simulate / poincare / lyapunov -----------------------------------------

SHARED_SIM_KEYS = frozenset({"model", "t_end", "dt", "sample_every", "iterates", "period", "renorm_dt", "d0"})
MODEL_KEYS = {
    "sg": frozenset(
        {
            "c", "a", "eps", "parity", "n_modes", "u0", "v0", "kick",
            "forcing_mode", "forcing_alpha0", "forcing_betas", "forcing_omegas",
            "forcing_phases", "forcing_mu", "forcing_eps", "forcing_abc", "forcing_abc_state",
        }
    ),
    "dernls": frozenset({"eps", "mu", "kcut", "gamma", "n_modes", "q0"}),
    "pnls": frozenset({"eps", "omega", "alpha", "beta", "gamma", "n_modes", "q0"}),
    "abc": frozenset({"abc", "theta0"}),
}


def _check_model_keys(model: str, p: dict):
    bad = sorted(set(p["_provided"]) - MODEL_KEYS[model] - SHARED_SIM_KEYS)
    if bad:
        raise ValidationError(f"parameters {bad} do not apply to model {model!r}")
    if model == "dernls" and not p["kcut"]:
        p["kcut"] = max(1, p["n_modes"] // 2)  # resolve the 0 sentinel


def _model_echo(model: str, p: dict) -> dict:
    keep = MODEL_KEYS[model] | SHARED_SIM_KEYS
    return _echo({k: v for k, v in p.items() if k in keep and v is not None})


def _build_forcing(p) -> ForcingSpec:
    if p["forcing_mode"] == "cos_t":
        return ForcingSpec(mode="cos_t")
    # the drive's phase coupling strength follows the model's eps unless
    # overridden: the two are one parameter in the perturbed wave problem
    eps = p["forcing_eps"] if p["forcing_eps"] is not None else p["eps"]
    return ForcingSpec(
        mode="quasiperiodic",
        alpha0=p["forcing_alpha0"],
        betas=p["forcing_betas"],
        omegas=p["forcing_omegas"],
        phases=p["forcing_phases"],
        mu=p["forcing_mu"],
        eps=eps,
        abc=p["forcing_abc"],
        abc_state=p["forcing_abc_state"],
    )


def _build_state(model: str, p: dict):
    if model == "sg":
        params = SGParams(
            c=p["c"], a=p["a"], eps=p["eps"], parity=p["parity"],
            n_modes=p["n_modes"], forcing=_build_forcing(p),
        )
        u = np.zeros(p["n_modes"] + 1)
        v = np.zeros(p["n_modes"] + 1)
        u[0], v[0] = p["u0"], p["v0"]
        for k, amp in p["kick"]:
            if not (0 <= k <= p["n_modes"]):
                raise ValidationError(f"kick mode {k} outside [0, {p['n_modes']}]")
            u[k] += amp
        return sg_state(params, u, v)
    kw = dict(variant=model, eps=p["eps"], gamma=p["gamma"], n_modes=p["n_modes"])
    if model == "dernls":
        kw.update(mu=p["mu"], K=p["kcut"])
    else:
        kw.update(omega=p["omega"], alpha=p["alpha"], beta=p["beta"])
    params = GLParams(**kw)
    if str(p["q0"]).strip() == "limit-cycle":
        if model != "dernls":
            raise ValidationError("the limit-cycle initial state is specific to dernls")
        return gl_limit_cycle_state(params)
    return gl_uniform_state(params, _complex(p["q0"]))


def _record(model: str, t: float, state) -> str:
    if model == "abc":
        re, im = list(state.theta), []
    elif model == "sg":
        re, im = state.u.tolist(), state.v.tolist()
    else:
        re, im = state.q.real.tolist(), state.q.imag.tolist()
    return json_payload_line({"model": model, "t": round(t, 12), "coeffs_re": re, "coeffs_im": im})


def _run_simulate(p, cfg):
    model = p["model"]
    _check_model_keys(model, p)
    steps = int(round(p["t_end"] / p["dt"]))
    if steps < 1:
        raise ValidationError("t_end must cover at least one step")
    if p["sample_every"] < 1:
        raise ValidationError(f"sample_every must be >= 1, got {p['sample_every']}")
    track_cycle = model == "dernls" and str(p["q0"]).strip() == "limit-cycle"

    if model == "abc":
        st = ABCState(theta=p["theta0"], abc=p["abc"])
        step = abc_step
    else:
        st = _build_state(model, p)
        step = model_step
    lines = [_record(model, 0.0, st)]
    worst = 0.0
    for i in range(1, steps + 1):
        st = step(st, p["dt"])
        if track_cycle:
            ref = np.zeros_like(st.q)
            ref[0] = gl_limit_cycle(st.params, st.t)
            worst = max(worst, float(np.max(np.abs(st.q - ref))))
        if i % p["sample_every"] == 0 or i == steps:
            lines.append(_record(model, i * p["dt"], st))
    summary = {"n_records": len(lines), "t_end": steps * p["dt"]}
    if track_cycle:
        summary["max_limit_cycle_err"] = worst
    return lines, summary, _model_echo(model, p)


def _run_poincare(p, cfg):
    model = p["model"]
    if model == "abc":
        raise ValidationError("poincare supports the wave and envelope models, not abc")
    _check_model_keys(model, p)
    st = _build_state(model, p)
    res = poincare_samples(st, p["iterates"], dt=p["dt"], period=p["period"])
    dim = state_vector(st).size
    lines = []
    if cfg.fmt == "csv":
        lines.append("iterate,t," + ",".join(f"s{j}" for j in range(dim)))
        for i, (s, t) in enumerate(zip(res.samples, res.times), start=1):
            lines.append(csv_line(i, t, *state_vector(s)))
    else:
        for i, (s, t) in enumerate(zip(res.samples, res.times), start=1):
            lines.append(json_payload_line({"iterate": i, "t": t, "state": state_vector(s).tolist()}))
    summary = {"n_samples": len(res.samples), "escaped": res.escaped}
    return lines, summary, _model_echo(model, p)


def _run_lyapunov(p, cfg):
    model = p["model"]
    _check_model_keys(model, p)
    if model == "abc":
        res = abc_lyapunov(
            p["abc"], p["t_end"], renorm_dt=p["renorm_dt"], dt=p["dt"], d0=p["d0"], theta0=p["theta0"]
        )
    else:
        st = _build_state(model, p)
        res = lyapunov_max(
            st, p["t_end"], dt=p["dt"], renorm_dt=p["renorm_dt"], d0=p["d0"], seed=cfg.seed
        )
    lines = []
    if cfg.fmt == "csv":
        lines.append("t,lambda_running")
        for t, lam in res.series:
            lines.append(csv_line(t, lam))
    else:
        for t, lam in res.series:
            lines.append(json_payload_line({"t": t, "lambda_running": lam}))
    spread = res.last_decade_spread()
    summary = {
        "lambda": None if np.isnan(res.lam) else res.lam,
        "escaped": res.escaped,
        "last_decade_spread": None if not np.isfinite(spread) else spread,
    }
    return lines, summary, _model_echo(model, p)


# ---------------------------------------------------------------------------
# schemas

_SIM_STATE_SCHEMA = {
    "model": enum_of("sg", "dernls", "pnls", "abc"),
    "dt": float,
    # wave model
    "c": float, "a": float, "parity": enum_of("even", "odd"),
    "u0": float, "v0": float, "kick": _kick,
    "forcing_mode": enum_of("cos_t", "quasiperiodic"),
    "forcing_alpha0": float, "forcing_betas": _floats(4), "forcing_omegas": _floats(4),
    "forcing_phases": _floats(4), "forcing_mu": float, "forcing_eps": float,
    "forcing_abc": _floats(3), "forcing_abc_state": _floats(3),
    # envelope models
    "eps": float, "mu": float, "kcut": int, "gamma": float,
    "omega": float, "alpha": float, "beta": float, "n_modes": int, "q0": str,
    # angle model
    "abc": _floats(3), "theta0": _floats(3),
}

_SIM_STATE_DEFAULTS = {
    "dt": 0.01,
    "c": 0.9, "a": 1.0, "parity": "even", "u0": 0.0, "v0": 0.0, "kick": (),
    "forcing_mode": "cos_t", "forcing_alpha0": 0.0,
    "forcing_betas": (0.0, 0.0, 0.0, 0.0),
    "forcing_omegas": (1.0, float(np.sqrt(2)), float(np.sqrt(3)), float(np.sqrt(5))),
    "forcing_phases": (0.0, 0.0, 0.0, 0.0),
    "forcing_mu": 2.0, "forcing_eps": None, "forcing_abc": (1.0, 1.0, 1.0),
    "forcing_abc_state": (0.0, 0.0, 0.0),
    "eps": 0.0, "mu": 6.0, "kcut": 0, "gamma": 0.0,
    "omega": 0.8, "alpha": 1.0, "beta": 1.0, "n_modes": 64, "q0": "limit-cycle",
    "abc": (1.0, 1.0, 1.0), "theta0": (4.0, 1.0, 5.5),
}

COMMANDS = {}


def _register(name, help, schema, defaults, required, formats, run):
    COMMANDS[name] = Command(name, help, schema, defaults, frozenset(required), formats, run)


_register(
    "spectrum",
    "eigenvalues of one invariant-class suboperator",
    {"k1": int, "k2": int, "alpha": float, "gamma": float, "nu": float, "trunc": int},
    {"alpha": 0.7, "gamma": 0.5, "trunc": 64},
    {"k1", "k2", "nu"},
    ("csv", "jsonl"),
    _run_spectrum,
)

_register(
    "nustar",
    "critical viscosity where the first unstable class restabilizes",
    {"alpha": float, "gamma": float, "trunc": int, "tol": float},
    {"alpha": 0.7, "gamma": 0.5, "trunc": 100, "tol": 1e-6},
    set(),
    ("jsonl",),
    _run_nustar,
)

_register(
    "zvtrack",
    "eigenvalue trajectories along a descending viscosity schedule",
    {
        "k1": int, "k2": int, "alpha": float, "gamma": float, "trunc": int,
        "nu_max": float, "nu_min": float, "n_nus": int, "tol": float,
    },
    {
        "k1": 1, "k2": 0, "alpha": 0.7, "gamma": 0.5, "trunc": 64,
        "nu_max": 0.1, "nu_min": 1e-4, "n_nus": 25, "tol": 0.02,
    },
    set(),
    ("jsonl",),
    _run_zvtrack,
)

_register(
    "laxcheck",
    "transported-eigenfield residual of the vorticity pair",
    {
        "dim": enum_of("2", "3"), "grid": int, "dt": float, "t_end": float,
        "kmax": int, "amp_omega": float, "amp_phi": float, "amp_u": float,
        "alpha": float, "mode": enum_of("curl", "free"), "control": _bool,
    },
    {
        "dim": "2", "grid": 0, "dt": 1e-3, "t_end": 1.0, "kmax": 4,
        "amp_omega": 0.1, "amp_phi": 5.0, "amp_u": 0.2, "alpha": 1.0,
        "mode": "curl", "control": False,
    },
    set(),
    ("jsonl",),
    _run_laxcheck,
)

_register(
    "darboux",
    "gauge transform of a shear eigenfunction pair",
    {"omega": str, "p": str, "f": str, "bigf": str, "eta": float, "nx": int, "ny": int},
    {"omega": None, "p": None, "f": None, "bigf": None, "eta": 1e-3, "nx": 128, "ny": 8},
    set(),
    ("jsonl",),
    _run_darboux,
)

_register(
    "simulate",
    "time integration of the wave / envelope / angle models",
    {**_SIM_STATE_SCHEMA, "t_end": float, "sample_every": int},
    {**_SIM_STATE_DEFAULTS, "t_end": 10.0, "sample_every": 10},
    {"model"},
    ("jsonl",),
    _run_simulate,
)

_register(
    "poincare",
    "strobe or section samples of a trajectory",
    {**_SIM_STATE_SCHEMA, "iterates": int, "period": float},
    {**_SIM_STATE_DEFAULTS, "iterates": 20, "period": None},
    {"model"},
    ("csv", "jsonl"),
    _run_poincare,
)

_register(
    "lyapunov",
    "largest Lyapunov exponent by two-orbit renormalization",
    {**_SIM_STATE_SCHEMA, "t_end": float, "renorm_dt": float, "d0": float},
    {**_SIM_STATE_DEFAULTS, "t_end": 1000.0, "renorm_dt": 0.5, "d0": 1e-8},
    {"model"},
    ("csv", "jsonl"),
    _run_lyapunov,
)


# ---------------------------------------------------------------------------
# argument plumbing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nel", description="numerical laboratory for shear spectra and wave chaos"
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"nel {__version__} (output schema {SCHEMA_VERSION}, config schema {CONFIG_SCHEMA_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    for cmd in COMMANDS.values():
        sp = sub.add_parser(cmd.name, help=cmd.help)
        for key in cmd.schema:
            sp.add_argument("--" + key.replace("_", "-"), dest=key, default=None, metavar="V")
        sp.add_argument("--config", default=None, help="flat key = value file; flags win")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None, help="output path (default: stdout)")
        sp.add_argument("--format", choices=("csv", "jsonl"), default=None)
    return parser


def _collect(args, cmd: Command):
    """Merge config-file and flag values into one raw dict plus line map."""
    raw, lines = {}, {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            file_raw, file_lines = parse_config_lines(fh.read())
        raw.update(file_raw)
        lines.update(file_lines)
    for key in cmd.schema:
        val = getattr(args, key)
        if val is not None:
            raw[key] = val
            lines.pop(key, None)  # flag value: no config line to blame
    return raw, lines


def _execute(args) -> int:
    cmd = COMMANDS[args.command]
    raw, lines = _collect(args, cmd)
    typed = coerce_params(raw, cmd.schema, lines)
    missing = sorted(cmd.required - set(typed))
    if missing:
        raise ValidationError(f"missing required parameters: {', '.join(missing)}")
    merged = {**cmd.defaults, **typed}
    merged["_provided"] = frozenset(typed)
    fmt = args.format or cmd.formats[0]
    if fmt not in cmd.formats:
        raise ValidationError(f"{cmd.name} writes {'/'.join(cmd.formats)} output, not {fmt}")
    cfg = RunConfig(command=cmd.name, params=_echo(merged), seed=args.seed, out=args.out, fmt=fmt)
    t0 = time.perf_counter()
    payload, summary, echo = cmd.run(merged, cfg)
    if echo is not None:
        cfg = dataclasses.replace(cfg, params=echo)
    write_result(cfg, payload, time.perf_counter() - t0, summary)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return _execute(args)
    except ValidationError as exc:
        print(f"nel: error: {exc}", file=sys.stderr)
        return 2
    except ComputationalError as exc:
        print(f"nel: numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"nel: i/o failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
