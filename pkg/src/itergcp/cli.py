"""Command-line interface: ``itergcp {pmf,simulate,verify,moments,lrd}``.

Settings come from built-in defaults, then an optional YAML file
(``--config``), then command-line flags, later sources winning.
Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 budget exceeded.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from typing import Any, Callable

import numpy as np
import yaml

from . import compound, gcp, igcp, kernels, mc, multivariate, qiter, timechange
from .core import BudgetExceeded, DomainError, fmt_real

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3

PROCESSES = ("gcp", "igcp", "nh_igcp", "compound", "multivariate", "qiter", "tc_igcp")

DEFAULTS: dict[str, Any] = {
    "process": {
        "kind": "igcp",
        "outer": [1.0, 0.5],
        "inner": [0.6, 0.2],
        "alpha": 0.6,
        "layers": [[0.6, 0.2], [0.8]],
        "components": [[0.5, 0.3], [0.4]],
        "law": {"kind": "geometric", "p": 0.5},
        "schedule": None,
    },
    "t": 1.0,
    "s": 1.0,
    "n_max": 20,
    "t_grid": None,
    "mc": {"samples": 1000, "seed": 0, "workers": 1},
    "paths": False,
    "suite": "default",
    "check": None,
    "output": {"path": None, "format": "csv"},
}


class ConfigError(DomainError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def _merge(base: dict, over: dict) -> dict:
    out = dict(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list {text!r}") from exc


def _float_lists(text: str) -> list[list[float]]:
    return [_floats(part) for part in text.split(";") if part.strip()]


def _cli_overrides(ns: argparse.Namespace) -> dict:
    over: dict[str, Any] = {}
    proc: dict[str, Any] = {}
    if ns.process is not None:
        proc["kind"] = ns.process
    if ns.outer is not None:
        proc["outer"] = _floats(ns.outer)
    if ns.inner is not None:
        proc["inner"] = _floats(ns.inner)
    if ns.alpha is not None:
        proc["alpha"] = ns.alpha
    if ns.layers is not None:
        proc["layers"] = _float_lists(ns.layers)
    if ns.components is not None:
        proc["components"] = _float_lists(ns.components)
    if ns.law is not None:
        kind, _, param = ns.law.partition(":")
        law = {"kind": kind}
        if param:
            key = {"geometric": "p", "exponential": "rate", "point_mass": "a"}.get(kind)
            if kind == "gcp_unit":
                law["rates"] = _floats(param)
            elif kind == "explicit_discrete":
                law["pmf"] = _floats(param)
            elif key is None:
                raise ConfigError(f"unknown jump law {kind!r}")
            else:
                law[key] = float(param)
        proc["law"] = law
    if proc:
        over["process"] = proc
    for key in ("t", "s", "n_max", "suite", "check"):
        v = getattr(ns, key, None)
        if v is not None:
            over[key] = v
    if getattr(ns, "t_grid", None) is not None:
        over["t_grid"] = _floats(ns.t_grid)
    if getattr(ns, "paths", False):
        over["paths"] = True
    mcfg = {k: getattr(ns, a) for k, a in (("samples", "samples"), ("seed", "seed"), ("workers", "workers"))
            if getattr(ns, a, None) is not None}
    if mcfg:
        over["mc"] = mcfg
    outp = {}
    if ns.output is not None:
        outp["path"] = ns.output
    if ns.format is not None:
        outp["format"] = ns.format
    if outp:
        over["output"] = outp
    return over


def load_config(ns: argparse.Namespace) -> dict:
    cfg = DEFAULTS
    if ns.config:
        try:
            with open(ns.config, encoding="utf-8") as fh:
                data = yaml.safe_load(fh) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a mapping")
        cfg = _merge(cfg, data)
    cfg = _merge(cfg, _cli_overrides(ns))
    if cfg["process"]["kind"] not in PROCESSES:
        raise ConfigError(f"unknown process {cfg['process']['kind']!r}")
    if cfg["output"]["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    return cfg


def _law(entry: dict) -> compound.JumpLaw:
    kind = entry.get("kind")
    if kind == "geometric":
        return compound.JumpLaw.geometric(entry.get("p", 0.5))
    if kind == "exponential":
        return compound.JumpLaw.exponential(entry.get("rate", 1.0))
    if kind == "point_mass":
        return compound.JumpLaw.point_mass(entry.get("a", 1.0))
    if kind == "gcp_unit":
        return compound.JumpLaw.gcp_unit(entry["rates"])
    if kind == "explicit_discrete":
        return compound.JumpLaw.explicit(entry["pmf"])
    raise ConfigError(f"unknown jump law {kind!r}")


def build_process(cfg: dict):
    """Validated parameter object for the configured process."""
    p = cfg["process"]
    kind = p["kind"]
    try:
        if kind == "gcp":
            return gcp.GcpParams(p["outer"])
        if kind == "igcp":
            return igcp.IgcpParams.from_rates(p["outer"], p["inner"])
        if kind == "nh_igcp":
            sch = p.get("schedule")
            if not sch:
                raise ConfigError("nh_igcp needs a schedule with breaks and rates")
            return gcp.GcpParams(p["outer"]), gcp.RateSchedule(np.asarray(sch["breaks"], float),
                                                               np.asarray(sch["rates"], float))
        if kind == "compound":
            return igcp.IgcpParams.from_rates(p["outer"], p["inner"]), _law(p["law"])
        if kind == "multivariate":
            return multivariate.MvIgcpParams(p["components"], p["inner"])
        if kind == "qiter":
            return qiter.QIterParams(p["outer"], p["layers"])
        return timechange.TcIgcpParams.from_rates(p["outer"], p["inner"], float(p["alpha"]))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"incomplete parameters for {kind}: {exc}") from exc


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _csv(header: list[str], rows: list[list[Any]], comments: list[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(fmt_real(v) if isinstance(v, float) else str(v) for v in r) + "\n")
    return buf.getvalue()


def _table(cfg: dict, header: list[str], rows: list[list[Any]], meta: dict) -> str:
    if cfg["output"]["format"] == "json":
        payload = {"meta": meta, "columns": header, "rows": rows}
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    return _csv(header, rows, [f"{k}={json.dumps(v, sort_keys=True)}" for k, v in sorted(meta.items())])


def _emit(cfg: dict, text: str) -> None:
    path = cfg["output"]["path"]
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def pmf_table(cfg: dict) -> tuple[list[str], list[list[Any]]]:
    kind = cfg["process"]["kind"]
    t = float(cfg["t"])
    n_max = int(cfg["n_max"])
    if t < 0 or n_max < 0:
        raise ConfigError("t and n_max must be non-negative")
    proc = build_process(cfg)
    if kind == "multivariate":
        lat, tail = multivariate.mv_pmf_lattice(proc, [n_max] * proc.q, t)
        header = [f"n{i + 1}" for i in range(proc.q)] + ["probability", "tail_bound"]
        rows = [list(idx) + [float(lat[idx]), float(tail)] for idx in np.ndindex(*lat.shape)]
        return header, rows
    if kind == "gcp":
        v = gcp.gcp_pmf_vector(proc, t, n_max)
    elif kind == "igcp":
        v = igcp.igcp_pmf_vector(proc, t, n_max)
    elif kind == "nh_igcp":
        outer, sch = proc
        rows = []
        for n in range(n_max + 1):
            r = igcp.nh_igcp_pmf(outer, sch, n, t)
            rows.append([n, float(r.value), float(r.tail_bound)])
        return ["n", "probability", "tail_bound"], rows
    elif kind == "compound":
        params, law = proc
        if not law.discrete:
            raise ConfigError("pmf needs a discrete jump law")
        v = compound.compound_igcp_pmf_vector(params, law, t, n_max)
    elif kind == "qiter":
        v = qiter.qiter_pmf_vector(proc, t, n_max)
    else:
        v = timechange.tc_igcp_pmf_vector(proc, t, n_max)
    return ["n", "probability", "tail_bound"], [[n, float(p), float(v.tail_bound)] for n, p in enumerate(v.probs)]


def _sampler(cfg: dict) -> Callable[[np.random.Generator, int], np.ndarray]:
    kind = cfg["process"]["kind"]
    t = float(cfg["t"])
    if t < 0:
        raise ConfigError("t must be non-negative")
    proc = build_process(cfg)
    if kind == "gcp":
        return lambda rng, n: gcp.sample_gcp_values(proc, t, rng, n)
    if kind == "igcp":
        return lambda rng, n: igcp.sample_igcp_value(proc, t, rng, n)
    if kind == "nh_igcp":
        return lambda rng, n: igcp.sample_nh_igcp_value(proc[0], proc[1], t, rng, n)
    if kind == "compound":
        return lambda rng, n: compound.sample_compound_value(proc[0], proc[1], t, rng, n)
    if kind == "multivariate":
        return lambda rng, n: multivariate.sample_mv_value(proc, t, rng, n)
    if kind == "qiter":
        return lambda rng, n: qiter.sample_qiter_value(proc, t, rng, n)
    return lambda rng, n: timechange.sample_tc_igcp_value(proc, t, rng, n)


def _mc_config(cfg: dict) -> mc.McConfig:
    m = cfg["mc"]
    return mc.McConfig(int(m["samples"]), int(m["seed"]), int(m.get("workers", 1)))


def cmd_pmf(cfg: dict) -> int:
    header, rows = pmf_table(cfg)
    meta = {"process": cfg["process"]["kind"], "t": float(cfg["t"])}
    _emit(cfg, _table(cfg, header, rows, meta))
    return EXIT_OK


def cmd_simulate(cfg: dict) -> int:
    conf = _mc_config(cfg)
    meta = {"process": cfg["process"]["kind"], "t": float(cfg["t"]), "master_seed": conf.master_seed,
            "chunk_size": conf.chunk_size, "stream": "philox(seed, chunk index)"}
    if cfg["paths"]:
        if cfg["process"]["kind"] not in ("gcp", "igcp"):
            raise ConfigError("path output is available for gcp and igcp")
        proc = build_process(cfg)
        horizon = float(cfg["t"])
        rows = []
        for sid, count in conf.chunks():
            rng = mc.stream(conf.master_seed, sid)
            for i in range(count):
                path = (gcp.sample_gcp_path(proc, horizon, rng) if cfg["process"]["kind"] == "gcp"
                        else igcp.sample_igcp_path(proc, horizon, rng))
                pid = sid * conf.chunk_size + i
                rows.extend([pid, float(tm), int(j)] for tm, j in zip(path.event_times, path.jump_sizes))
        _emit(cfg, _table(cfg, ["path", "time", "jump"], rows, meta))
        return EXIT_OK
    x = mc.run_mc_samples(_sampler(cfg), conf)
    if x.ndim == 1:
        header = ["sample", "value"]
        rows = [[i, int(v)] if float(v).is_integer() else [i, float(v)] for i, v in enumerate(x)]
    else:
        header = ["sample"] + [f"value{j + 1}" for j in range(x.shape[1])]
        rows = [[i] + [int(v) for v in row] for i, row in enumerate(x)]
    _emit(cfg, _table(cfg, header, rows, meta))
    return EXIT_OK


def _t_grid(cfg: dict) -> list[float]:
    grid = cfg["t_grid"] if cfg["t_grid"] is not None else [float(cfg["t"])]
    return [float(x) for x in grid]


def cmd_moments(cfg: dict) -> int:
    kind = cfg["process"]["kind"]
    proc = build_process(cfg)
    rows = []
    grid = _t_grid(cfg)
    if any(t < 0 for t in grid):
        raise ConfigError("times must be non-negative")
    if kind == "multivariate":
        header = ["t", "i", "l", "covariance"]
        for t in grid:
            for i in range(proc.q):
                for l in range(proc.q):
                    rows.append([t, i + 1, l + 1, multivariate.mv_covariance(proc, i, l, t)])
    else:
        header = ["t", "mean", "variance"]
        for t in grid:
            if kind == "gcp":
                m, v = gcp.gcp_moments(proc, t)
            elif kind == "igcp":
                m, v, _ = igcp.igcp_moments(proc, t, t)
            elif kind == "nh_igcp":
                m, v = igcp.nh_igcp_moments(proc[0], proc[1], t)
            elif kind == "compound":
                m, v = compound.compound_igcp_moments(proc[0], proc[1], t)
            elif kind == "qiter":
                m, v = qiter.qiter_moments(proc, t)
            else:
                m, v = timechange.tc_igcp_moments(proc, t)
            rows.append([t, float(m), float(v)])
    _emit(cfg, _table(cfg, header, rows, {"process": kind}))
    return EXIT_OK


def lrd_report(params: timechange.TcIgcpParams, s: float, grid: list[float]) -> dict:
    theta = timechange.lrd_exponent(params, s, grid)
    x = np.log(np.asarray(grid))
    y = np.log([timechange.tc_correlation_asymptotic(params, s, t) for t in grid])
    if len(grid) > 2:
        _, cov = np.polyfit(x, y, 1, cov="unscaled")
        resid = y - np.polyval(np.polyfit(x, y, 1), x)
        half = 1.96 * math.sqrt(cov[0, 0] * float((resid ** 2).sum()) / (len(grid) - 2))
    else:
        half = 0.0
    return {"alpha": params.alpha, "fitted_exponent": theta, "ci": [theta - half, theta + half],
            "grid": list(grid), "s": s, "classification": "LRD" if 0 < theta < 1 else "not LRD"}


def cmd_lrd(cfg: dict) -> int:
    if cfg["process"]["kind"] != "tc_igcp":
        raise ConfigError("lrd applies to the tc_igcp process")
    grid = cfg["t_grid"] if cfg["t_grid"] is not None else list(np.logspace(3, 6, 13))
    if len(grid) < 2:
        raise ConfigError("t grid needs at least two points")
    report = lrd_report(build_process(cfg), float(cfg["s"]), [float(g) for g in grid])
    _emit(cfg, json.dumps(report, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------

def _check(name: str, value: float, threshold: float, ok: bool) -> dict:
    return {"check": name, "value": float(value), "threshold": float(threshold), "pass": bool(ok)}


def _v_bell(seed: int) -> dict:
    err = 0.0
    for x in (0.3, 1.0, 2.5):
        rec = kernels.bell_polynomials(15, x)
        for n in range(16):
            ser = kernels.bell_series(n, x).value
            err = max(err, abs(rec[n] - ser) / max(1.0, abs(ser)))
    return _check("bell_recurrence_vs_series", err, 1e-12, err <= 1e-12)


def _v_ml(seed: int) -> dict:
    from scipy import special
    e1 = abs(kernels.mittag_leffler_3p(1.0, 1.0, 1.0, 1.0).value - math.e)
    e2 = abs(kernels.mittag_leffler_3p(0.5, 1.0, 1.0, -1.0).value - math.e * special.erfc(1.0))
    err = max(e1, e2)
    return _check("mittag_leffler_identities", err, 1e-10, err <= 1e-10)


def _v_igcp_forms(seed: int) -> dict:
    p = igcp.IgcpParams.from_rates([1.0, 0.5], [0.6, 0.2])
    err = max(abs(igcp.igcp_pmf(p, n, t).value - igcp.igcp_pmf_series_oracle(p, n, t).value)
              for t in (0.5, 1.0, 2.0) for n in range(13))
    return _check("igcp_bell_vs_series", err, 1e-8, err <= 1e-8)


def _v_igcp_ode(seed: int) -> dict:
    p = igcp.IgcpParams.from_rates([1.0, 0.5], [0.6, 0.2])
    err = igcp.igcp_ode_verify(p, 15, 2.0)
    return _check("igcp_ode_residual", err, 1e-6, err <= 1e-6)


def _v_levy(seed: int) -> dict:
    p = igcp.IgcpParams.from_rates([1.0, 0.5], [0.6, 0.2])
    s = math.fsum(igcp.igcp_levy_measure(p, n) for n in range(1, 200))
    err = abs(s - igcp.levy_total_mass(p))
    return _check("levy_total_mass", err, 1e-10, err <= 1e-10)


def _v_moments_mc(seed: int) -> dict:
    p = igcp.IgcpParams.from_rates([1.0, 0.5], [0.6, 0.2])
    est = mc.run_mc(lambda rng, n: igcp.sample_igcp_value(p, 1.0, rng, n), mc.McConfig(20_000, seed))
    z = abs(est.z_score(p.S * 1.0))
    return _check("igcp_mean_mc_zscore", z, 4.0, z <= 4.0)


def _v_martingale(seed: int) -> dict:
    p = igcp.IgcpParams.from_rates([1.0, 0.5], [0.6, 0.2])
    conf = mc.McConfig(20_000, seed)

    def sampler(rng, n):
        batch = igcp.sample_igcp_paths(p, 3.0, n, rng)
        return np.column_stack([igcp.martingale_residual(batch.values_at(t), p, t) for t in (1.0, 2.0, 3.0)])

    z = float(np.max(np.abs(mc.run_mc(sampler, conf).z_score(0.0))))
    return _check("martingale_residual_zscore", z, 4.0, z <= 4.0)


def _v_compound(seed: int) -> dict:
    p = igcp.IgcpParams.from_rates([1.0, 0.5], [0.6, 0.2])
    law = compound.JumpLaw.geometric(0.4)
    err = max(abs(compound.d_process_pgf(p, law, u, 1.0) - compound.compound_igcp_pgf(p, law, u, 1.0))
              for u in (0.0, 0.3, 0.7, 1.0))
    return _check("d_process_pgf_vs_compound_pgf", err, 1e-10, err <= 1e-10)


def _v_mv(seed: int) -> dict:
    p = multivariate.MvIgcpParams([[0.5, 0.3], [0.4]], [0.6, 0.2])
    err = max(abs(multivariate.mv_pmf(p, (a, b), 1.0).value - multivariate.mv_pmf_bell(p, (a, b), 1.0).value)
              for a in range(7) for b in range(7))
    return _check("mv_series_vs_bell", err, 1e-8, err <= 1e-8)


def _v_qiter(seed: int) -> dict:
    from scipy import stats
    lam, m1, m2, t = 0.7, 1.1, 0.9, 1.3
    p = qiter.QIterParams([lam], [[m1], [m2]])
    v = qiter.qiter_pmf_vector(p, t, 10)
    s = np.arange(80)
    m = np.arange(200)
    err = 0.0
    for n in range(11):
        brute = math.fsum(stats.poisson.pmf(si, m2 * t) * np.sum(stats.poisson.pmf(n, lam * m) * stats.poisson.pmf(m, m1 * si))
                          for si in s)
        err = max(err, abs(v.probs[n] - brute))
    return _check("qiter_recursion_vs_double_sum", err, 1e-8, err <= 1e-8)


def _v_tc(seed: int) -> dict:
    p = timechange.TcIgcpParams.from_rates([0.8], [0.9], 0.6)
    err = max(abs(timechange.tc_igcp_pmf(p, n, 1.0).value - timechange.tc_igcp_pmf_oracle(p, n, 1.0).value)
              for n in range(9))
    return _check("tc_pmf_vs_gfcp_oracle", err, 1e-6, err <= 1e-6)


def _v_lrd(seed: int) -> dict:
    p = timechange.TcIgcpParams.from_rates([1.0, 0.5], [0.6, 0.2], 0.6)
    dev = abs(timechange.lrd_exponent(p, 1.0, np.logspace(3, 6, 13)) - 0.6)
    return _check("lrd_exponent_deviation", dev, 0.03, dev <= 0.03)


SUITES: dict[str, list[Callable[[int], dict]]] = {
    "default": [_v_bell, _v_ml, _v_igcp_forms, _v_igcp_ode, _v_levy, _v_moments_mc, _v_martingale,
                _v_compound, _v_mv, _v_qiter, _v_tc, _v_lrd],
}
SUITES["quick"] = [_v_bell, _v_ml, _v_levy, _v_compound]

CHECK_NAMES = {
    "bell_recurrence_vs_series": _v_bell, "mittag_leffler_identities": _v_ml,
    "igcp_bell_vs_series": _v_igcp_forms, "igcp_ode_residual": _v_igcp_ode, "levy_total_mass": _v_levy,
    "igcp_mean_mc_zscore": _v_moments_mc, "martingale_residual_zscore": _v_martingale,
    "d_process_pgf_vs_compound_pgf": _v_compound, "mv_series_vs_bell": _v_mv,
    "qiter_recursion_vs_double_sum": _v_qiter, "tc_pmf_vs_gfcp_oracle": _v_tc,
    "lrd_exponent_deviation": _v_lrd,
}


def run_verify(suite: str = "default", check: str | None = None, seed: int = 0) -> list[dict]:
    if check is not None:
        if check not in CHECK_NAMES:
            raise ConfigError(f"unknown check {check!r}")
        fns = [CHECK_NAMES[check]]
    else:
        if suite not in SUITES:
            raise ConfigError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
        fns = SUITES[suite]
    report = []
    for fn in fns:
        try:
            report.append(fn(seed))
        except BudgetExceeded:
            name = next(k for k, v in CHECK_NAMES.items() if v is fn)
            report.append({"check": name, "value": None, "threshold": None,
                           "pass": False, "status": "budget_exceeded"})
    return report


def cmd_verify(cfg: dict) -> int:
    report = run_verify(cfg["suite"], cfg["check"], int(cfg["mc"]["seed"]))
    _emit(cfg, json.dumps(report, sort_keys=True, indent=2) + "\n")
    if any(r.get("status") == "budget_exceeded" for r in report):
        return EXIT_BUDGET
    return EXIT_OK if all(r["pass"] for r in report) else EXIT_VERIFY


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML file with settings")
    common.add_argument("--process", choices=PROCESSES)
    common.add_argument("--outer", help="outer GCP rates, e.g. 1,0.5")
    common.add_argument("--inner", help="inner GCP rates")
    common.add_argument("--alpha", type=float, help="stable index for tc_igcp")
    common.add_argument("--layers", help="q-iterated layers, ';'-separated rate lists")
    common.add_argument("--components", help="multivariate components, ';'-separated rate lists")
    common.add_argument("--law", help="jump law, e.g. geometric:0.4, exponential:2, gcp_unit:1,0.5")
    common.add_argument("--t", type=float, help="time")
    common.add_argument("--s", type=float, help="reference time for lrd")
    common.add_argument("--t-grid", dest="t_grid", help="comma-separated times")
    common.add_argument("--n-max", dest="n_max", type=int, help="largest state")
    common.add_argument("--samples", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--output", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"))

    parser = argparse.ArgumentParser(prog="itergcp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("pmf", parents=[common], help="probability table")
    sim = sub.add_parser("simulate", parents=[common], help="Monte Carlo draws or event paths")
    sim.add_argument("--paths", action="store_true", help="write event lists instead of values")
    ver = sub.add_parser("verify", parents=[common], help="run cross-check suites")
    ver.add_argument("--suite")
    ver.add_argument("--check")
    sub.add_parser("moments", parents=[common], help="mean and variance table")
    sub.add_parser("lrd", parents=[common], help="long-range dependence exponent report")
    return parser


COMMANDS = {"pmf": cmd_pmf, "simulate": cmd_simulate, "verify": cmd_verify,
            "moments": cmd_moments, "lrd": cmd_lrd}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    for attr in ("paths", "suite", "check"):
        if not hasattr(ns, attr):
            setattr(ns, attr, None if attr != "paths" else False)
    try:
        cfg = load_config(ns)
        return COMMANDS[ns.command](cfg)
    except BudgetExceeded as exc:
        print(json.dumps({"error": "budget_exceeded", "message": str(exc)}), file=sys.stderr)
        return EXIT_BUDGET
    except (DomainError, ValueError) as exc:
        print(json.dumps({"error": "invalid_input", "message": str(exc)}), file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
