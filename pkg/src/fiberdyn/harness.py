"""Experiment orchestration: configs, dispatch, persistence, self test.

Config files are plain-text INI (diffable): a [system] section (see
`systems.system_from_section`), an optional [observable] section and a
[task] section.  Every defaulted field is echoed into the output metadata
(config_echo.ini), so runs are self-describing and reproducible: re-running
an echoed config with the same seed yields byte-identical artifacts.
"""

import configparser
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import __version__
from .counting import DEFAULT_BUDGET
from .errors import ConfigError
from .katok import MeasureSampler, katok_entropy_estimate, summary_json_dict
from .observables import Observable, observable_from_section
from .pressure import (legendre_conjugate, pressure_curve, spectrum_crosscheck)
from .shadowing import (certificate_csv, mixing_gap, random_specification,
                        shadow, specification_from_text)
from .svgchart import line_chart
from .systems import SkewSystem, system_from_section

TASKS = ("pressure", "spectrum", "shadow", "katok", "crosscheck", "selftest")


@dataclass
class ExperimentConfig:
    task: str
    system: SkewSystem
    observable: Observable
    params: dict
    seed: int
    budget: int
    threads: int
    out_dir: str
    echo_text: str = ""
    config_hash: str = ""


def _parse_float_list(text):
    return [float(t) for t in text.replace(",", " ").split()]


_TASK_DEFAULTS = {
    "pressure": {"epsilon": None, "q_grid": "0", "n_min": "8", "n_max": "16",
                 "n_step": "1", "omega_samples": "1", "method": "auto"},
    "spectrum": {"epsilon": None, "q_grid": "-3 -2 -1 0 1 2 3",
                 "alpha_grid": "0.3 0.4 0.5 0.6 0.7",
                 "delta_schedule": "0.1 0.05", "n_min": "20", "n_max": "40",
                 "n_step": "1", "curve_n_min": "8", "curve_n_max": "16",
                 "omega_samples": "1", "method": "auto"},
    "crosscheck": {"epsilon": None, "q_grid": "-3 -2 -1 0 1 2 3",
                   "alpha_grid": "0.3 0.4 0.5 0.6 0.7",
                   "delta_schedule": "0.1 0.05", "n_min": "20", "n_max": "40",
                   "n_step": "1", "curve_n_min": "8", "curve_n_max": "16",
                   "omega_samples": "2", "method": "auto"},
    "shadow": {"epsilon": "0.1", "spec_file": "", "k": "4", "count": "1",
               "spacing": "", "max_len": "10"},
    "katok": {"epsilon": None, "delta": "0.1", "n_min": "4", "n_max": "10",
              "n_step": "1", "sample_size": "100000", "method": "auto",
              "use_eta": "false", "sampler_seed": "0"},
    "selftest": {},
}


def parse_config(text, *, seed=None, out_dir=None, budget=None, threads=None,
                 task_override=None) -> ExperimentConfig:
    """Parse and validate a config, applying CLI overrides and echoing defaults."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config", f"unparseable config: {exc}")

    task = task_override
    if parser.has_section("task") and parser["task"].get("kind"):
        task = parser["task"]["kind"].strip() if task is None else task
    if task is None:
        raise ConfigError("task", "missing task kind")
    if task not in TASKS:
        raise ConfigError("task", f"unknown task {task!r}")

    if task == "selftest":
        system = None
        observable = Observable("zero")
    else:
        if not parser.has_section("system"):
            raise ConfigError("system", "missing [system] section")
        system = system_from_section(parser["system"])
        if parser.has_section("observable"):
            observable = observable_from_section(parser["observable"])
        else:
            observable = Observable("digit" if system.fiber_kind == "doubling"
                                    else "zero")

    tsec = parser["task"] if parser.has_section("task") else {}
    params = {}
    for key, default in _TASK_DEFAULTS.get(task, {}).items():
        val = tsec.get(key) if hasattr(tsec, "get") else None
        if val is None:
            if default is None:
                # scale default depends on the fiber geometry
                val = "0.4" if (system is not None and
                                system.fiber_kind == "doubling") else "0.05"
            else:
                val = default
        params[key] = val.strip() if isinstance(val, str) else val

    seed = int(seed if seed is not None else (tsec.get("seed", "0") if hasattr(tsec, "get") else 0))
    budget = int(budget if budget is not None else
                 (tsec.get("budget", str(DEFAULT_BUDGET)) if hasattr(tsec, "get") else DEFAULT_BUDGET))
    threads = int(threads if threads is not None else
                  (tsec.get("threads", "1") if hasattr(tsec, "get") else 1))
    out_dir = out_dir or "fiberdyn_out"

    cfg = ExperimentConfig(task=task, system=system, observable=observable,
                           params=params, seed=seed, budget=budget,
                           threads=threads, out_dir=out_dir)
    cfg.echo_text = _echo_config(parser, cfg)
    cfg.config_hash = hashlib.sha256(
        (cfg.echo_text + f"seed={seed}").encode()).hexdigest()[:16]
    return cfg


def _echo_config(parser, cfg) -> str:
    """Canonical config text with every resolved field, deterministic order."""
    out = io.StringIO()
    if parser.has_section("system"):
        out.write("[system]\n")
        for key in sorted(parser["system"]):
            out.write(f"{key} = {parser['system'][key]}\n")
        out.write("\n")
    if parser.has_section("observable"):
        out.write("[observable]\n")
        for key in sorted(parser["observable"]):
            out.write(f"{key} = {parser['observable'][key]}\n")
        out.write("\n")
    out.write("[task]\n")
    out.write(f"kind = {cfg.task}\n")
    for key in sorted(cfg.params):
        out.write(f"{key} = {cfg.params[key]}\n")
    out.write(f"seed = {cfg.seed}\n")
    out.write(f"budget = {cfg.budget}\n")
    out.write(f"threads = {cfg.threads}\n")
    return out.getvalue()


def load_config(path, **overrides) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), **overrides)


# -- artifact writing ---------------------------------------------------------

def _provenance_lines(cfg):
    return (f"# fiberdyn {__version__}\n"
            f"# config_hash={cfg.config_hash} seed={cfg.seed}\n")


def _write_text(cfg, name, body, comment_style="#"):
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, name)
    if comment_style == "#":
        content = _provenance_lines(cfg) + body
    elif comment_style == "svg":
        content = (f"<!-- fiberdyn {__version__} config_hash={cfg.config_hash} "
                   f"seed={cfg.seed} -->\n") + body
    else:
        content = body
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(content)
    return path


def _write_json(cfg, name, payload):
    os.makedirs(cfg.out_dir, exist_ok=True)
    doc = {"provenance": {"version": __version__, "config_hash": cfg.config_hash,
                          "seed": cfg.seed}}
    doc.update(payload)
    path = os.path.join(cfg.out_dir, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _n_range(params, prefix="n"):
    return range(int(params[f"{prefix}_min"]),
                 int(params[f"{prefix}_max"]) + 1, int(params.get(f"{prefix}_step", 1)))


# -- task runners --------------------------------------------------------------

def _run_pressure(cfg):
    qs = _parse_float_list(cfg.params["q_grid"])
    curve = pressure_curve(cfg.system, cfg.observable, qs,
                           float(cfg.params["epsilon"]), _n_range(cfg.params),
                           omega_samples=int(cfg.params["omega_samples"]),
                           seed=cfg.seed, method=cfg.params["method"],
                           budget=cfg.budget, threads=cfg.threads)
    _write_text(cfg, "pressure_curve.csv", curve.to_csv())
    _write_text(cfg, "pressure_curve.svg",
                line_chart([("pressure", curve.q, curve.pressure)],
                           "fiber pressure curve", "q", "pressure"), "svg")
    _write_json(cfg, "pressure.json", {
        "q": [float(q) for q in curve.q],
        "pressure": [float(p) for p in curve.pressure],
        "stderr": [float(s) for s in curve.stderr],
        "convexity_defect": float(curve.convexity_defect),
    })
    return 0


def _run_spectrum(cfg, with_crosscheck=False):
    qs = _parse_float_list(cfg.params["q_grid"])
    alphas = _parse_float_list(cfg.params["alpha_grid"])
    deltas = _parse_float_list(cfg.params["delta_schedule"])
    report = spectrum_crosscheck(
        cfg.system, cfg.observable, alphas, q_grid=qs,
        eps=float(cfg.params["epsilon"]), n_range=_n_range(cfg.params),
        delta_schedule=deltas, omega_samples=int(cfg.params["omega_samples"]),
        seed=cfg.seed, method=cfg.params["method"], budget=cfg.budget,
        curve_n_range=_n_range(cfg.params, "curve_n"), threads=cfg.threads)
    curve = pressure_curve(cfg.system, cfg.observable, qs,
                           float(cfg.params["epsilon"]),
                           _n_range(cfg.params, "curve_n"),
                           omega_samples=int(cfg.params["omega_samples"]),
                           seed=cfg.seed, method=cfg.params["method"],
                           budget=cfg.budget, threads=cfg.threads)
    _write_text(cfg, "pressure_curve.csv", curve.to_csv())
    _write_text(cfg, "spectrum.csv", report.spectrum.to_csv())
    _write_text(cfg, "spectrum.svg",
                line_chart([("legendre", report.alpha, report.legendre),
                            ("counting", report.alpha, report.rates.mean(axis=1))],
                           "multifractal spectrum", "alpha", "rate"), "svg")
    lo, hi = report.observed_interval
    payload = {
        "max_interior_discrepancy": (None if math.isnan(report.max_interior_discrepancy)
                                     else float(report.max_interior_discrepancy)),
        "max_omega_spread": float(report.max_omega_spread),
        "observed_interval": (None if math.isnan(lo) else [float(lo), float(hi)]),
    }
    name = "crosscheck.json" if with_crosscheck else "spectrum.json"
    _write_json(cfg, name, payload)
    if with_crosscheck:
        _write_text(cfg, "crosscheck.csv", report.to_csv())
    return 0


def _run_shadow(cfg):
    eps = float(cfg.params["epsilon"])
    if cfg.params["spec_file"]:
        with open(cfg.params["spec_file"], "r", encoding="utf-8") as fh:
            spec = specification_from_text(fh.read())
        specs = [spec]
    else:
        rng = np.random.default_rng(cfg.seed)
        spacing = (int(cfg.params["spacing"]) if cfg.params["spacing"]
                   else mixing_gap(cfg.system, eps))
        specs = [random_specification(cfg.system, rng, int(cfg.params["k"]),
                                      spacing, max_len=int(cfg.params["max_len"]))
                 for _ in range(int(cfg.params["count"]))]
    results = []
    for i, spec in enumerate(specs):
        res = shadow(cfg.system, spec, eps)
        tag = "" if len(specs) == 1 else f"_{i}"
        _write_text(cfg, f"certificate{tag}.csv", certificate_csv(res))
        results.append({
            "point": [float(res.point[0]), float(res.point[1])],
            "max_distance": res.max_distance,
            "per_interval_max": list(res.per_interval_max),
            "gamma": res.gamma,
            "spacing_used": res.spacing_used,
            "ok": res.ok,
        })
    _write_json(cfg, "shadow.json", {"results": results, "epsilon": eps})
    return 0


def _run_katok(cfg):
    sampler = MeasureSampler(
        "uniform_circle" if cfg.system.fiber_dim == 1 else "haar_torus",
        seed=int(cfg.params["sampler_seed"]))
    w = cfg.system.driving.point(0.0)
    est = katok_entropy_estimate(
        cfg.system, sampler, w, float(cfg.params["epsilon"]),
        float(cfg.params["delta"]), _n_range(cfg.params),
        int(cfg.params["sample_size"]), seed=cfg.seed,
        method=cfg.params["method"], budget=cfg.budget,
        use_eta=cfg.params["use_eta"].lower() in ("1", "true", "yes"))
    _write_text(cfg, "katok_counts.csv", est.counts_csv())
    _write_json(cfg, "katok.json", summary_json_dict(est))
    return 0


def run(cfg: ExperimentConfig) -> int:
    """Dispatch a parsed config; returns the process exit status."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "config_echo.ini"), "w",
              encoding="utf-8", newline="\n") as fh:
        fh.write(cfg.echo_text)
    if cfg.task == "pressure":
        return _run_pressure(cfg)
    if cfg.task == "spectrum":
        return _run_spectrum(cfg)
    if cfg.task == "crosscheck":
        return _run_spectrum(cfg, with_crosscheck=True)
    if cfg.task == "shadow":
        return _run_shadow(cfg)
    if cfg.task == "katok":
        return _run_katok(cfg)
    if cfg.task == "selftest":
        report = selftest(seed=cfg.seed)
        _write_text(cfg, "selftest.txt", report.table)
        _write_json(cfg, "selftest.json", {"checks": report.rows, "passed": report.passed})
        print(report.table, end="")
        return 0 if report.passed else 1
    raise ConfigError("task", f"unknown task {cfg.task!r}")


def error_json(exc) -> str:
    kind = type(exc).__name__
    payload = {"error": {"type": kind, "message": str(exc)}}
    if isinstance(exc, ConfigError):
        payload["error"]["field"] = exc.field
    return json.dumps(payload, sort_keys=True)


# -- self test -----------------------------------------------------------------

@dataclass
class SelftestReport:
    rows: list
    passed: bool
    table: str


def _oracle_system():
    from .drivers import DrivingSystem
    return SkewSystem(DrivingSystem("point"), "doubling")


def _cat_system(with_forcing=True):
    from .drivers import DrivingSystem
    from .systems import FourierMap
    forcing = FourierMap(((0.3,), (0.0,)), ((), (0.2,))) if with_forcing else FourierMap()
    return SkewSystem(DrivingSystem("rotation"), "affine_torus",
                      matrix=np.array([[2, 1], [1, 1]]), forcing=forcing)


def selftest(seed: int = 0) -> SelftestReport:
    """Deterministic oracle battery; a compact run of the acceptance checks."""
    from .pressure import level_set_rate, pressure_estimate
    from .systems import bowen_ball_area, bowen_distance, hyperbolic_frame
    rows = []

    def check(name, ok, detail):
        rows.append({"name": name, "ok": bool(ok), "detail": detail})

    dbl = _oracle_system()
    digit = Observable("digit")
    wpt = dbl.driving.point()

    curve = pressure_curve(dbl, digit, [-3, -2, -1, 0, 1, 2, 3], 0.4, range(8, 17))
    errs = [abs(float(p) - math.log(1 + math.exp(float(q))))
            for q, p in zip(curve.q, curve.pressure)]
    check("oracle-pressure-curve", max(errs) <= 0.02, f"max error {max(errs):.2e}")

    spec = legendre_conjugate(curve, [0.3, 0.4, 0.5, 0.6, 0.7])
    H = lambda a: -a * math.log(a) - (1 - a) * math.log(1 - a)
    lerr = max(abs(float(v) - H(float(a))) for a, v in zip(spec.alpha, spec.legendre))
    rates = [level_set_rate(dbl, digit, wpt, a, [0.1, 0.05], 0.4, range(20, 41)).rate
             for a in (0.3, 0.4, 0.5, 0.6, 0.7)]
    rerr = max(abs(r - H(a)) for r, a in zip(rates, (0.3, 0.4, 0.5, 0.6, 0.7)))
    check("oracle-spectrum", lerr <= 0.05 and rerr <= 0.05,
          f"legendre err {lerr:.4f}, counting err {rerr:.4f}")

    cat = _cat_system()
    est = pressure_estimate(cat, Observable("zero"), 0.05, range(6, 13),
                            omega_samples=3, seed=seed)
    target = math.log((3 + math.sqrt(5)) / 2)
    check("cat-entropy", abs(est.slope - target) <= 0.05 * target
          and est.lemma_consistency <= 0.05,
          f"slope {est.slope:.6f} vs {target:.6f}, spread {est.lemma_consistency:.2e}")

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(200):
        x = cat.fiber_point(rng.random(2))
        y = cat.fiber_point(rng.random(2))
        n = int(rng.integers(1, 16))
        w1 = cat.driving.point(rng.random())
        w2 = cat.driving.point(rng.random())
        worst = max(worst, abs(bowen_distance(cat, w1, x, y, n)
                               - bowen_distance(cat, w2, x, y, n)))
    check("fiber-independence", worst <= 1e-12, f"max deviation {worst:.2e}")

    sh_fail = 0
    sh_worst = 0.0
    for eps in (0.05, 0.1, 0.2):
        gap = mixing_gap(cat, eps)
        for _ in range(20):
            k = int(rng.integers(1, 7))
            spc = random_specification(cat, rng, k, gap, max_len=8)
            res = shadow(cat, spc, eps)
            sh_worst = max(sh_worst, res.max_distance / eps)
            if not (res.ok and max(res.per_interval_max) <= eps / 2):
                sh_fail += 1
    check("shadowing", sh_fail == 0, f"failures {sh_fail}/60, worst rel distance {sh_worst:.3f}")

    kd = katok_entropy_estimate(dbl, MeasureSampler("uniform_circle", 1), wpt,
                                0.4, 0.1, range(6, 13), 30000, seed=seed)
    kc = katok_entropy_estimate(cat, MeasureSampler("haar_torus", 1),
                                cat.driving.point(0.0), 0.2, 0.1, range(3, 10),
                                400000, seed=seed)
    ok_k = (abs(kd.slope - math.log(2)) <= 0.1 * math.log(2)
            and abs(kc.slope - target) <= 0.1 * target)
    check("katok", ok_k, f"doubling {kd.slope:.4f}/{math.log(2):.4f}, "
                         f"cat {kc.slope:.4f}/{target:.4f}")

    areas = [bowen_ball_area(cat, n, 0.05) for n in range(3, 11)]
    lam = hyperbolic_frame(cat).lam_u
    prods = [a * lam**n for a, n in zip(areas, range(3, 11))]
    ratio = max(prods) / min(prods) - 1.0
    check("gibbs-area", ratio <= 0.02, f"relative spread {ratio:.2e}")

    check("curve-shape", curve.convexity_defect <= 1e-2
          and spec.concavity_defect <= 1e-2,
          f"convexity {curve.convexity_defect:.2e}, concavity {spec.concavity_defect:.2e}")

    passed = all(r["ok"] for r in rows)
    width = max(len(r["name"]) for r in rows)
    lines = [f"{r['name']:<{width}}  {'PASS' if r['ok'] else 'FAIL'}  {r['detail']}"
             for r in rows]
    lines.append(f"{'overall':<{width}}  {'PASS' if passed else 'FAIL'}")
    return SelftestReport(rows=rows, passed=passed, table="\n".join(lines) + "\n")
