"""Experiment runners: resource preparation, pattern execution, fits, artifacts.

Each runner writes CSV tables, a JSON summary carrying the config hash and
seed, and an SVG plot. Identical config and seed give byte-identical CSVs;
worker threads only parallelize independent (grid point, trial) tasks whose
RNG streams are keyed by task indices.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from . import channel as ch
from . import engine, fits, noise, vqe
from .config import ExperimentConfig, default_n
from .states import build_deformed, build_xx_rotated, cluster_circuit, xx_rotated_circuit
from .statevector import shot_rng


def _n_threads() -> int:
    env = os.environ.get("MBQC_LAB_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _pmap(fn, items):
    items = list(items)
    if len(items) <= 1 or _n_threads() == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=_n_threads()) as pool:
        return list(pool.map(fn, items))


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _write_json(path: Path, cfg: ExperimentConfig, metrics: dict, fit_info: dict) -> dict:
    payload = {
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "experiment": cfg.experiment,
        "metrics": metrics,
        "fits": fit_info,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
    return payload


def _new_figure():
    plt.rcParams["svg.hashsalt"] = "mbqc-lab"
    return plt.subplots(figsize=(6, 4))


def _alpha_grid(cfg: ExperimentConfig, count: int, endpoint: bool) -> np.ndarray:
    if cfg.alpha_list:
        return np.asarray(cfg.alpha_list)
    return np.linspace(0.0, np.pi / 2, count, endpoint=endpoint)


def _beta_grid(cfg: ExperimentConfig) -> np.ndarray:
    return np.linspace(cfg.beta_min, cfg.beta_max, cfg.beta_points)


def _optimal_theta(alpha: float, n: int) -> float:
    return vqe.optimize_theta(alpha, n).theta_min


def _theta_for(cfg: ExperimentConfig, alpha: float, n: int) -> float:
    return cfg.theta if cfg.theta >= 0 else _optimal_theta(alpha, n)


def _sample_tomography(result: engine.RunResult, shots: int,
                       rng: np.random.Generator) -> engine.Tomography:
    """Fresh shot batches on an already enumerated branch table."""
    bx = engine._sample_axis(result.branches, result.pattern, "X", shots, rng)
    by = engine._sample_axis(result.branches, result.pattern, "Y", shots, rng)
    trial = engine.RunResult(result.pattern, result.branches, bx, by, result.metadata)
    return engine.logical_tomography(trial), trial


# --------------------------------------------------------------------------
# experiment 0: variational energy curves and optimum


def run_exp0(cfg: ExperimentConfig, out: Path) -> dict:
    n = default_n(cfg)
    shots = cfg.effective_shots()
    thetas = np.linspace(0.0, np.pi / 2, 17)

    def term_rows(item):
        i, theta = item
        bd = vqe.sampled_expectations(theta, shots, shot_rng(cfg.seed, i), 0.0, n)
        return [
            [0.0, theta, "x_field", bd.x_field, bd.err_x_field, shots, cfg.seed],
            [0.0, theta, "k_boundary", bd.k_boundary, bd.err_k_boundary, shots, cfg.seed],
            [0.0, theta, "k_bulk", bd.k_bulk, bd.err_k_bulk, shots, cfg.seed],
        ]

    energy_rows = [r for rows in _pmap(term_rows, enumerate(thetas)) for r in rows]
    _write_csv(out / "exp0_energy.csv",
               ["alpha", "theta", "term", "value", "stderr", "shots", "seed"],
               energy_rows)

    alphas = _alpha_grid(cfg, 9, endpoint=True)
    opt_rows = []
    for j, alpha in enumerate(alphas):
        sampled = vqe.optimize_theta(alpha, n, grid_points=33,
                                     shots=shots, rng=shot_rng(cfg.seed, 1000 + j))
        analytic = vqe.optimize_theta(alpha, n)
        opt_rows.append([alpha, sampled.theta_min, sampled.theta_uncertainty,
                         sampled.energy_min, "sampled"])
        opt_rows.append([alpha, analytic.theta_min, analytic.theta_uncertainty,
                         analytic.energy_min, "analytic"])
        opt_rows.append([alpha, vqe.thermo_limit_theta(alpha), 0.0,
                         float("nan"), "thermo"])
    _write_csv(out / "exp0_optimum.csv",
               ["alpha", "theta_min", "theta_err", "energy_min", "mode"], opt_rows)

    fig, ax = _new_figure()
    for term, color in (("x_field", "C0"), ("k_boundary", "C1"), ("k_bulk", "C2")):
        pts = [(r[1], r[3]) for r in energy_rows if r[2] == term]
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o", ms=3,
                color=color, label=term)
    tline = np.linspace(0, np.pi / 2, 200)
    ax.plot(tline, np.sin(tline), "C0-", lw=1)
    ax.plot(tline, np.cos(tline), "C1-", lw=1)
    ax.plot(tline, np.cos(tline) ** 2, "C2-", lw=1)
    ax.set_xlabel("theta")
    ax.set_ylabel("expectation value")
    ax.legend()
    fig.savefig(out / "exp0.svg", metadata={"Date": None})
    plt.close(fig)

    metrics = {"transition_alpha": float(np.arctan(2.0)),
               "theta_uncertainty_convention": "one standard error"}
    return _write_json(out / "summary.json", cfg, metrics, {})


# --------------------------------------------------------------------------
# experiment 1: logical tomography ellipses


def run_exp1(cfg: ExperimentConfig, out: Path) -> dict:
    n = default_n(cfg)
    shots = cfg.effective_shots()
    alphas = _alpha_grid(cfg, 6, endpoint=False)
    betas = _beta_grid(cfg)
    rows, fit_info, curves = [], {}, {}
    for j, alpha in enumerate(alphas):
        theta = _theta_for(cfg, alpha, n)
        resource = build_deformed(n, theta)
        pattern_points = []

        def point(item):
            i, beta = item
            pat = engine.make_pattern(n, {3: beta}, mode="adaptive")
            res = engine.run_pattern(resource, pat, shots,
                                     shot_rng(cfg.seed, j * 1000 + i))
            return engine.logical_tomography(res)

        toms = _pmap(point, enumerate(betas))
        for beta, tom in zip(betas, toms):
            rows.append([alpha, theta, beta, tom.exp_x, tom.exp_y,
                         tom.err_x, tom.err_y, shots, cfg.seed])
            pattern_points.append((tom.exp_x, tom.exp_y))
        fit = fits.fit_ellipse(pattern_points)
        fit_info[f"alpha_{alpha:.4f}"] = {
            "a": fit.params["a"], "b": fit.params["b"],
            "var_a": fit.variances["a"], "var_b": fit.variances["b"],
            "sigma_theory": float(np.cos(theta)),
        }
        curves[alpha] = pattern_points
    _write_csv(out / "exp1.csv",
               ["alpha", "theta", "beta", "exp_x", "exp_y", "err_x", "err_y",
                "shots", "seed"], rows)

    fig, ax = _new_figure()
    angles = np.linspace(0, 2 * np.pi, 200)
    for alpha, pts in curves.items():
        info = fit_info[f"alpha_{alpha:.4f}"]
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o", ms=3)
        ax.plot(info["a"] * np.cos(angles), info["b"] * np.sin(angles), "-", lw=1)
    ax.set_xlabel("<X>")
    ax.set_ylabel("<Y>")
    ax.set_aspect("equal")
    fig.savefig(out / "exp1.svg", metadata={"Date": None})
    plt.close(fig)
    return _write_json(out / "summary.json", cfg, {}, fit_info)


# --------------------------------------------------------------------------
# experiment 2: string order equals computational order


def run_exp2(cfg: ExperimentConfig, out: Path) -> dict:
    n = default_n(cfg)
    shots = cfg.effective_shots()
    alphas = _alpha_grid(cfg, 6, endpoint=False)
    betas = np.linspace(0.1, 1.2, 8)
    rows, metrics = [], {"pairs": []}
    for j, alpha in enumerate(alphas):
        theta = _theta_for(cfg, alpha, n)
        resource = build_deformed(n, theta)
        tans, tans_log, tans_err = [], [], []
        for i, beta in enumerate(betas):
            pat = engine.make_pattern(n, {3: beta}, mode="adaptive")
            res = engine.run_pattern(resource, pat, shots,
                                     shot_rng(cfg.seed, j * 1000 + i))
            tom = engine.logical_tomography(res)
            tans.append(np.tan(beta))
            tans_log.append(tom.exp_y / tom.exp_x)
            tans_err.append(np.hypot(tom.err_y / tom.exp_x,
                                     tom.exp_y * tom.err_x / tom.exp_x ** 2))
        fit = fits.fit_line(tans, tans_log, tans_err)
        cop, cop_var = fit.params["slope"], fit.variances["slope"]
        bd = vqe.sampled_expectations(theta, shots, shot_rng(cfg.seed, 5000 + j), alpha, n)
        sop, sop_err = bd.k_boundary, bd.err_k_boundary
        combined = float(np.sqrt(cop_var) + sop_err)
        rows.append([alpha, theta, cop, float(np.sqrt(cop_var)), sop, sop_err])
        metrics["pairs"].append({
            "alpha": float(alpha), "cop": float(cop),
            "cop_err": float(np.sqrt(cop_var)), "sop": float(sop),
            "sop_err": float(sop_err),
            "agree_2stderr": bool(abs(cop - sop) <= 2 * combined),
        })
    _write_csv(out / "exp2.csv",
               ["alpha", "theta", "cop", "cop_err", "sop", "sop_err"], rows)

    fig, ax = _new_figure()
    ax.errorbar([r[0] for r in rows], [r[2] for r in rows],
                yerr=[r[3] for r in rows], fmt="o", label="computational order")
    ax.errorbar([r[0] for r in rows], [r[4] for r in rows],
                yerr=[r[5] for r in rows], fmt="x", label="string order")
    ax.set_xlabel("alpha")
    ax.set_ylabel("order parameter")
    ax.legend()
    fig.savefig(out / "exp2.svg", metadata={"Date": None})
    plt.close(fig)
    return _write_json(out / "summary.json", cfg, metrics, {})


# --------------------------------------------------------------------------
# experiment 3: rotation splitting


def run_exp3(cfg: ExperimentConfig, out: Path) -> dict:
    n = default_n(cfg)
    shots, trials = cfg.effective_shots(), cfg.effective_trials()
    alpha = cfg.alpha
    theta = _theta_for(cfg, alpha, n)
    sigma = float(np.cos(theta))
    betas = (np.linspace(0.0, 0.5, cfg.beta_points) if cfg.beta_max > 0.5
             else _beta_grid(cfg))
    resource = build_deformed(n, theta)
    rows, fit_info, lp_curves = [], {}, {}
    for m in cfg.m_list:
        sites = tuple(range(3, 3 + 2 * m, 2))
        if sites[-1] > n - 2:
            raise ValueError(f"splitting m={m} does not fit a chain of {n} sites")

        def point(item):
            i, beta = item
            pat = engine.make_pattern(n, {s: beta / m for s in sites},
                                      mode="sign_agnostic")
            base = engine.run_pattern(resource, pat, None)
            lps, toms = [], []
            for t in range(trials):
                rng = shot_rng(cfg.seed, m * 10 ** 6 + i * 1000 + t)
                tom, trial = _sample_tomography(base, shots, rng)
                lps.append(engine.grouped_purity_loss(trial)[0])
                toms.append(tom)
            lps = np.array(lps)
            lp = float(lps.mean())
            lp_err = float(lps.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
            ex = float(np.mean([t.exp_x for t in toms]))
            ey = float(np.mean([t.exp_y for t in toms]))
            ex_err = float(np.mean([t.err_x for t in toms]) / np.sqrt(trials))
            ey_err = float(np.mean([t.err_y for t in toms]) / np.sqrt(trials))
            return (beta, ex, ey, ex_err, ey_err, lp, lp_err)

        pts = _pmap(point, enumerate(betas))
        for beta, ex, ey, ex_err, ey_err, lp, lp_err in pts:
            rows.append([alpha, theta, beta, ex, ey, ex_err, ey_err,
                         shots, cfg.seed, m, lp, lp_err])
        lp_curves[m] = [(p[0], p[5], p[6]) for p in pts]
        fit = fits.fit_quadratic_offset([p[0] for p in pts], [p[5] for p in pts])
        closed = [ch.split_purity_loss(sigma, b, m) for b in betas]
        cfit = fits.fit_quadratic_offset(betas, closed)
        fit_info[f"m_{m}"] = {
            "curvature": fit.params["curvature"],
            "curvature_var": fit.variances["curvature"],
            "offset": fit.params["offset"],
            "curvature_theory": cfit.params["curvature"],
        }
    _write_csv(out / "exp3.csv",
               ["alpha", "theta", "beta", "exp_x", "exp_y", "err_x", "err_y",
                "shots", "seed", "m", "lp", "lp_err"], rows)

    inv_m = [1.0 / m for m in cfg.m_list]
    curvatures = [fit_info[f"m_{m}"]["curvature"] for m in cfg.m_list]
    line = fits.fit_line(inv_m, curvatures)
    fit_info["curvature_line"] = {"slope": line.params["slope"],
                                  "intercept": line.params["intercept"]}
    metrics = {"sigma": sigma, "theta": float(theta)}
    if cfg.noise_p > 0:
        noisy = {}
        for m in cfg.m_list:
            sites = tuple(range(3, 3 + 2 * m, 2))
            curve = []
            for beta in betas:
                pat = engine.make_pattern(n, {s: beta / m for s in sites},
                                          theta=theta, mode="sign_agnostic")
                tom = noise.exact_noisy_tomography(cluster_circuit(n), n, pat,
                                                   cfg.noise_p)
                curve.append(engine.purity_loss(tom.exp_x, tom.exp_y))
            noisy[f"m_{m}"] = curve
        metrics["noisy_lp"] = noisy
        metrics["noise_p"] = cfg.noise_p

    fig, ax = _new_figure()
    for m in cfg.m_list:
        pts = lp_curves[m]
        ax.errorbar([p[0] for p in pts], [p[1] for p in pts],
                    yerr=[p[2] for p in pts], fmt="o", ms=3, label=f"m={m}")
        dense_b = np.linspace(betas[0], betas[-1], 100)
        ax.plot(dense_b, [ch.split_purity_loss(sigma, b, m) for b in dense_b],
                "-", lw=1)
    ax.set_xlabel("beta")
    ax.set_ylabel("purity loss")
    ax.legend()
    fig.savefig(out / "exp3.svg", metadata={"Date": None})
    plt.close(fig)
    return _write_json(out / "summary.json", cfg, metrics, fit_info)


# --------------------------------------------------------------------------
# experiment 4: correlated regime packing


def _exp4_schemes(n: int, beta: float) -> dict[str, dict[int, float]]:
    return {
        "i": {3: beta / 2, 5: beta / 2},
        "ii": {3: beta / 2, n - 2: beta / 2},
        "iii": {s: beta / 4 for s in range(3, n - 1, 2)},
    }


def run_exp4(cfg: ExperimentConfig, out: Path) -> dict:
    n = default_n(cfg)
    shots, trials = cfg.effective_shots(), cfg.effective_trials()
    betas = (np.linspace(0.0, np.pi / 2, cfg.beta_points)
             if cfg.beta_max > np.pi / 2 else _beta_grid(cfg))
    resource = build_xx_rotated(n, cfg.phi, cfg.compile_mode)
    rows, lp_curves, fit_info = [], {}, {}
    for k, label in enumerate(("i", "ii", "iii")):

        def point(item):
            i, beta = item
            rots = _exp4_schemes(n, beta)[label]
            pat = engine.make_pattern(n, rots, mode="post_selected")
            base = engine.run_pattern(resource, pat, None)
            frac = base.accepted_fraction()
            lps, toms = [], []
            for t in range(trials):
                rng = shot_rng(cfg.seed, k * 10 ** 7 + i * 1000 + t)
                tom, _ = _sample_tomography(base, shots, rng)
                toms.append(tom)
                lps.append(engine.purity_loss(tom.exp_x, tom.exp_y))
            lps = np.array(lps)
            lp = float(lps.mean())
            lp_err = float(lps.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
            ex = float(np.mean([t.exp_x for t in toms]))
            ey = float(np.mean([t.exp_y for t in toms]))
            return (beta, ex, ey, lp, lp_err, frac)

        pts = _pmap(point, enumerate(betas))
        for beta, ex, ey, lp, lp_err, frac in pts:
            rows.append([cfg.phi, beta, ex, ey, shots, cfg.seed, label,
                         lp, lp_err, frac])
        lp_curves[label] = [(p[0], p[3], p[4]) for p in pts]
        fit = fits.fit_quadratic_offset([p[0] for p in pts], [p[3] for p in pts])
        fit_info[f"scheme_{label}"] = {"curvature": fit.params["curvature"],
                                       "offset": fit.params["offset"]}
    _write_csv(out / "exp4.csv",
               ["phi", "beta", "exp_x", "exp_y", "shots", "seed", "scheme",
                "lp", "lp_err", "accepted_fraction"], rows)

    ordering_ok = True
    for beta in betas[1:]:
        vals = []
        for label in ("i", "ii", "iii"):
            rots = _exp4_schemes(n, beta)[label]
            sites = tuple(sorted(rots))
            sch = ch.PackingScheme(sites, tuple(rots[s] for s in sites), label)
            x, y, _ = ch.exact_logical_evolution(resource, sch)
            vals.append(ch.purity_loss_from_xy(x, y))
        ordering_ok &= vals[0] > vals[1] > vals[2]
    metrics = {"phi": cfg.phi, "ordering_i_ii_iii": bool(ordering_ok)}
    if cfg.noise_p > 0:
        ops = cluster_circuit(n) + xx_rotated_circuit(n, cfg.phi, "swap_compiled")
        noisy = {}
        for label in ("i", "ii", "iii"):
            curve = []
            for beta in betas:
                rots = _exp4_schemes(n, beta)[label]
                pat = engine.make_pattern(n, rots, mode="post_selected")
                tom = noise.exact_noisy_tomography(ops, n, pat, cfg.noise_p)
                curve.append(engine.purity_loss(tom.exp_x, tom.exp_y))
            noisy[f"scheme_{label}"] = curve
        metrics["noisy_lp"] = noisy
        metrics["noise_p"] = cfg.noise_p

    fig, ax = _new_figure()
    for label in ("i", "ii", "iii"):
        pts = lp_curves[label]
        ax.errorbar([p[0] for p in pts], [p[1] for p in pts],
                    yerr=[p[2] for p in pts], fmt="o", ms=3, label=f"scheme {label}")
    ax.set_xlabel("beta")
    ax.set_ylabel("purity loss")
    ax.legend()
    fig.savefig(out / "exp4.svg", metadata={"Date": None})
    plt.close(fig)
    return _write_json(out / "summary.json", cfg, metrics, fit_info)


# --------------------------------------------------------------------------
# closed-form channel artifacts


def run_channel_grid(cfg: ExperimentConfig, out: Path) -> dict:
    sigmas = np.linspace(0.0, 1.0, 20)
    betas = np.linspace(0.0, np.pi, 20, endpoint=False)
    rows, worst = [], {"reassembly": 0.0, "frobenius_vs_eps": 0.0, "lp_vs_eps": 0.0}
    for s in sigmas:
        for b in betas:
            b_log = ch.logical_angle(s, b)
            eps = ch.epsilon(s, b)
            lp = ch.split_purity_loss(s, b, 1)
            rows.append([s, b, b_log, eps, lp])
            res = ch.channel_identity_errors(s, b)
            for key in worst:
                worst[key] = max(worst[key], res[key])
    _write_csv(out / "channel_grid.csv",
               ["sigma", "beta", "beta_log", "epsilon", "lp_pred"], rows)
    return _write_json(out / "summary.json", cfg,
                       {"identity_residuals": worst}, {})


def run_packing(cfg: ExperimentConfig, out: Path) -> dict:
    n = default_n(cfg)
    resource = build_xx_rotated(n, cfg.phi)
    betas = _beta_grid(cfg)
    rows = []
    for beta in betas:
        for label, rots in _exp4_schemes(n, beta).items():
            sites = tuple(sorted(rots))
            sch = ch.PackingScheme(sites, tuple(rots[s] for s in sites), label)
            x, y, _ = ch.exact_logical_evolution(resource, sch)
            rows.append([n, cfg.phi, beta, label, ch.purity_loss_from_xy(x, y)])
    _write_csv(out / "packing.csv", ["n", "phi", "beta", "scheme", "lp_exact"], rows)
    return _write_json(out / "summary.json", cfg, {}, {})


def run_crossover(cfg: ExperimentConfig, out: Path) -> dict:
    n = default_n(cfg)
    beta = np.pi / 2

    def alternating(b):
        sites = (3, 7, 9) if n == 11 else tuple(
            s for s in range(3, n - 1, 2) if s not in (5, 11))
        return ch.PackingScheme(sites, (b / len(sites),) * len(sites), "alternating")

    def dense(b):
        sites = tuple(range(3, n - 1, 2))
        return ch.PackingScheme(sites, (b / len(sites),) * len(sites), "dense")

    phi_grid = np.linspace(0.0, np.pi / 2, 25)
    result = ch.find_crossover(lambda phi: build_xx_rotated(n, phi), beta,
                               alternating, dense, phi_grid)
    rows = []
    for phi in phi_grid:
        resource = build_xx_rotated(n, phi)
        lps = []
        for scheme in (alternating(beta), dense(beta)):
            x, y, _ = ch.exact_logical_evolution(resource, scheme)
            lps.append(ch.purity_loss_from_xy(x, y))
        rows.append([n, phi, lps[0], lps[1]])
    _write_csv(out / "crossover.csv",
               ["n", "phi", "lp_alternating", "lp_dense"], rows)
    metrics = {"found": result.found, "phi_c": result.phi_c,
               "detail": result.detail, "n": n, "beta": beta}
    return _write_json(out / "summary.json", cfg, metrics, {})


_RUNNERS = {
    "exp0": run_exp0,
    "exp1": run_exp1,
    "exp2": run_exp2,
    "exp3": run_exp3,
    "exp4": run_exp4,
    "channel-grid": run_channel_grid,
    "packing": run_packing,
    "crossover": run_crossover,
}


def run_experiment(cfg: ExperimentConfig) -> Path:
    """Run the configured experiment; returns the directory its artifacts
    were written to (named after the experiment and the config digest)."""
    out = Path(cfg.output_dir) / f"{cfg.experiment}-{cfg.config_hash()}"
    out.mkdir(parents=True, exist_ok=True)
    _RUNNERS[cfg.experiment](cfg, out)
    return out
