"""Command-line experiment harness.

Subcommands: design | verify | simulate | compare | montecarlo.  Every
command reads a strict key-value config (--config), writes its artifacts
under --out, and is deterministic given the config: reruns produce
byte-identical files.  Exit codes: 0 success, 2 config/usage error,
3 runtime or validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import baselines, icf, paraunitary, reconstruct, scene as scene_mod
from .cod import cod_design, place_pulses, verify_cod, verify_flat_unitary
from .dspcore import papr_db
from .kvconfig import ConfigError, Key, load_kv
from .waveform import load_waveform_set, save_waveform_set, verify_waveform_set

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _write_json(obj, path) -> None:
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _finite_or_none(x):
    x = float(x)
    return x if np.isfinite(x) else None


def _require_file(path, what: str) -> str:
    if not os.path.isfile(path):
        raise ConfigError(f"{what} file not found: {path}")
    return path


# ---------------------------------------------------------------- design

_DESIGN_SCHEMA = {
    "mode": Key("str", required=True),  # icf | paraunitary
    "num_tx": Key("int", required=True),
    "num_subcarriers": Key("int", required=True),
    "num_cells": Key("int", required=True),
    "eta_max": Key("int", required=True),
    "num_pulses": Key("int", required=True),
    "seed": Key("int", default=0),
    "iterations": Key("int", default=8),
    "papr_target_db": Key("float", default=0.1),
    "clip_factor": Key("float", default=0.1),
    "oversample": Key("int", default=4),
}


def _cmd_design(args) -> int:
    v = load_kv(args.config, _DESIGN_SCHEMA)
    if args.seed is not None:
        v["seed"] = args.seed
    if v["mode"] not in ("icf", "paraunitary"):
        raise ConfigError(f"{args.config}: mode must be 'icf' or 'paraunitary'")
    num_tx, num_pulses = v["num_tx"], v["num_pulses"]
    try:
        design = cod_design(num_tx, num_pulses if num_tx == 1 else None)
    except ValueError as exc:
        raise ConfigError(f"{args.config}: {exc}") from None
    if design.num_vars != num_pulses:
        raise ConfigError(
            f"{args.config}: the {num_tx}-transmitter design places "
            f"{design.num_vars} base pulses, config asks for {num_pulses}"
        )

    out = args.out
    if v["mode"] == "icf":
        try:
            cfg = icf.IcfConfig(
                num_subcarriers=v["num_subcarriers"],
                num_cells=v["num_cells"],
                eta_max=v["eta_max"],
                num_tx=num_tx,
                num_pulses=num_pulses,
                num_iterations=v["iterations"],
                papr_target_db=v["papr_target_db"],
                clip_factor=v["clip_factor"],
                oversample=v["oversample"],
                seed=v["seed"],
            )
        except ValueError as exc:
            raise ConfigError(f"{args.config}: {exc}") from None
        result = icf.icf_design(cfg)
        bases = result.pulses
        paprs = result.per_pulse_papr_db
        xi = result.snr_degradation_db
    else:
        head = v["eta_max"] + v["num_cells"] - 1
        nonzero_len = v["num_subcarriers"] - 2 * head + 1
        try:
            factors = paraunitary.random_factors(
                num_pulses, nonzero_len, v["num_subcarriers"], num_tx, v["seed"]
            )
        except ValueError as exc:
            raise ConfigError(f"{args.config}: {exc}") from None
        pm = paraunitary.synthesize_polyphase(factors)
        bases = paraunitary.polyphase_to_pulses(pm, v["num_subcarriers"], head)
        window = (head, v["num_subcarriers"] - head)
        paprs = np.array([papr_db(b, v["oversample"], window) for b in bases])
        xi = icf.snr_degradation_db(bases, num_tx)
        paraunitary.save_factors(factors, os.path.join(out, "factors.bin"))

    ws = place_pulses(design, bases, v["eta_max"], v["num_cells"])
    save_waveform_set(ws, os.path.join(out, "waveform_set.bin"))
    _write_json(
        {
            "mode": v["mode"],
            "seed": v["seed"],
            "num_tx": num_tx,
            "num_pulses": num_pulses,
            "snr_degradation_db": _finite_or_none(xi),
            "mean_papr_db": float(np.mean(paprs)),
            "per_pulse_papr_db": [float(p) for p in paprs],
            "flat_unitary_deviation": float(verify_flat_unitary(ws)),
        },
        os.path.join(out, "metrics.json"),
    )
    print(f"wrote {os.path.join(out, 'waveform_set.bin')} and metrics.json")
    return EXIT_OK


# -------------------------------------------------------------- simulate

_SIMULATE_SCHEMA = {
    "waveform": Key("str", required=True),
    "scene": Key("str", required=True),
    "noise_repeats": Key("int", default=1),
    "rcs_seed": Key("int"),
    "noise_seed": Key("int"),
}


def _load_sim_inputs(args, v):
    ws = load_waveform_set(_require_file(v["waveform"], "waveform"))
    bundle = scene_mod.load_scene_file(_require_file(v["scene"], "scene"))
    rcs_seed = bundle.rcs_seed if v["rcs_seed"] is None else v["rcs_seed"]
    noise_seed = bundle.noise_seed if v["noise_seed"] is None else v["noise_seed"]
    if args.seed is not None:
        noise_seed = args.seed
    return ws, bundle.scene, rcs_seed, noise_seed


def _cmd_simulate(args) -> int:
    v = load_kv(args.config, _SIMULATE_SCHEMA)
    if v["noise_repeats"] < 1:
        raise ConfigError(f"{args.config}: noise_repeats must be >= 1")
    ws, scn, rcs_seed, noise_seed = _load_sim_inputs(args, v)
    rcs = scene_mod.sample_rcs(scn, rcs_seed)
    n = ws.num_subcarriers

    first_estimate = None
    err_power = np.zeros((scn.num_rx, ws.num_tx))
    for r in range(v["noise_repeats"]):
        frames = scene_mod.synthesize_all_received(ws, rcs, scn, noise_seed + r)
        est = reconstruct.reconstruct_all(frames, ws, scn, rcs.tau_sum, true_d=rcs.d)
        if r == 0:
            first_estimate = est
        err_power += np.mean(np.abs(est.d_hat - np.sqrt(n) * rcs.d) ** 2, axis=2)
    err_power /= v["noise_repeats"]

    pairs = []
    for b in range(scn.num_rx):
        for a in range(ws.num_tx):
            targets = np.abs(rcs.d[b, a]) > 0
            sig = n * np.mean(np.abs(rcs.d[b, a][targets]) ** 2) if targets.any() else 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                emp = 10.0 * np.log10(sig / err_power[b, a])
            pred = None
            if scn.sigma_n2 > 0 and targets.any():
                d_rms = float(np.sqrt(np.mean(np.abs(rcs.d[b, a][targets]) ** 2)))
                pred = reconstruct.snr_post_theory_db(d_rms, ws.freq_weights[a], scn.sigma_n2)
            pairs.append(
                {
                    "rx": b + 1,
                    "tx": a + 1,
                    "mse": float(err_power[b, a] / n),  # in the g domain
                    "snr_emp_db": _finite_or_none(emp),
                    "snr_pred_db": _finite_or_none(pred) if pred is not None else None,
                }
            )

    reconstruct.write_estimate_csv(first_estimate, os.path.join(args.out, "estimate.csv"))
    _write_json(
        {
            "pairs": pairs,
            "mse_overall": float(np.mean([p["mse"] for p in pairs])),
            "noise_repeats": v["noise_repeats"],
            "rcs_seed": rcs_seed,
            "noise_seed": noise_seed,
        },
        os.path.join(args.out, "summary.json"),
    )
    print(f"wrote {os.path.join(args.out, 'estimate.csv')} and summary.json")
    return EXIT_OK


# --------------------------------------------------------------- compare

_COMPARE_SCHEMA = {
    "waveform": Key("str", required=True),
    "scene": Key("str", required=True),
    "code": Key("str"),
    "code_length": Key("int"),
    "lfm_length": Key("int"),
    "lfm_sweep": Key("float", default=1.0),
    "noise_repeats": Key("int", default=1),
    "rcs_seed": Key("int"),
    "noise_seed": Key("int"),
}


def _cmd_compare(args) -> int:
    v = load_kv(args.config, _COMPARE_SCHEMA)
    if v["noise_repeats"] < 1:
        raise ConfigError(f"{args.config}: noise_repeats must be >= 1")
    ws, scn, rcs_seed, noise_seed = _load_sim_inputs(args, v)
    if v["code"] is not None:
        codes = baselines.load_code_set(_require_file(v["code"], "code set"))
    else:
        codes = baselines.p4_code_set(scn.num_tx, v["code_length"] or ws.nonzero_len)
    lfm_len = v["lfm_length"] or ws.nonzero_len

    rcs = scene_mod.sample_rcs(scn, rcs_seed)

    def mse(g_hat):
        return float(np.mean(np.abs(g_hat - rcs.g) ** 2))

    # every method sees the same reflectivities and the same noise seed list
    first = {}
    sums = {"ofdm": 0.0, "pcode": 0.0, "fdlfm": 0.0}
    for r in range(v["noise_repeats"]):
        seed = noise_seed + r
        frames = scene_mod.synthesize_all_received(ws, rcs, scn, seed)
        results = {
            "ofdm": reconstruct.reconstruct_all(frames, ws, scn, rcs.tau_sum).g_hat,
            "pcode": baselines.pcode_simulate(scn, rcs, codes, ws.num_pulses, seed),
            "fdlfm": baselines.fd_lfm_simulate(
                scn, rcs, lfm_len, ws.num_pulses, seed, v["lfm_sweep"]
            ),
        }
        for name, g_hat in results.items():
            sums[name] += mse(g_hat)
        if r == 0:
            first = results

    path = os.path.join(args.out, "comparison.csv")
    with open(path, "w") as f:
        f.write("beta,alpha,m,true_abs,ofdm_abs,pcode_abs,fdlfm_abs\n")
        for b in range(scn.num_rx):
            for a in range(scn.num_tx):
                for m in range(scn.num_cells):
                    f.write(
                        f"{b + 1},{a + 1},{m},{float(abs(rcs.g[b, a, m]))!r},"
                        f"{float(abs(first['ofdm'][b, a, m]))!r},"
                        f"{float(abs(first['pcode'][b, a, m]))!r},"
                        f"{float(abs(first['fdlfm'][b, a, m]))!r}\n"
                    )

    _write_json(
        {
            "mse_ofdm": sums["ofdm"] / v["noise_repeats"],
            "mse_pcode": sums["pcode"] / v["noise_repeats"],
            "mse_fdlfm": sums["fdlfm"] / v["noise_repeats"],
            "code_label": codes.label,
            "lfm_length": lfm_len,
            "noise_repeats": v["noise_repeats"],
            "seeds": {"rcs": rcs_seed, "noise": noise_seed},
        },
        os.path.join(args.out, "summary.json"),
    )
    print(f"wrote {path} and summary.json")
    return EXIT_OK


# ------------------------------------------------------------ montecarlo

_MONTECARLO_SCHEMA = {
    "num_subcarriers": Key("int", required=True),
    "num_cells": Key("int", required=True),
    "eta_max": Key("int", required=True),
    "num_tx": Key("int", required=True),
    "pulse_counts": Key("int_list", required=True),
    "iterations": Key("int", required=True),
    "papr_target_db": Key("float", required=True),
    "clip_factor": Key("float", required=True),
    "oversample": Key("int", default=4),
    "seed": Key("int", default=0),
    "trials": Key("int", required=True),
    "xi_min_db": Key("float", default=-0.08),
    "papr_max_db": Key("float", default=2.2),
}


def _cmd_montecarlo(args) -> int:
    v = load_kv(args.config, _MONTECARLO_SCHEMA)
    if args.seed is not None:
        v["seed"] = args.seed
    if args.trials is not None:
        v["trials"] = args.trials
    if v["trials"] < 1:
        raise ConfigError(f"{args.config}: trials must be >= 1")
    counts = []
    for p in v["pulse_counts"]:
        try:
            cfg = icf.IcfConfig(
                num_subcarriers=v["num_subcarriers"],
                num_cells=v["num_cells"],
                eta_max=v["eta_max"],
                num_tx=v["num_tx"],
                num_pulses=p,
                num_iterations=v["iterations"],
                papr_target_db=v["papr_target_db"],
                clip_factor=v["clip_factor"],
                oversample=v["oversample"],
                seed=v["seed"],
            )
        except ValueError as exc:
            raise ConfigError(f"{args.config}: pulse count {p}: {exc}") from None
        result = icf.monte_carlo_cdf(
            cfg, v["trials"], v["xi_min_db"], v["papr_max_db"], workers=args.threads
        )
        icf.write_cdf_csv(result, os.path.join(args.out, f"cdf_P{p}.csv"))
        counts.append(result.qualifying_count)
    _write_json(
        {
            "pulse_counts": list(v["pulse_counts"]),
            "qualifying_counts": counts,
            "trials": v["trials"],
            "seed": v["seed"],
            "xi_min_db": v["xi_min_db"],
            "papr_max_db": v["papr_max_db"],
        },
        os.path.join(args.out, "counts.json"),
    )
    print(f"wrote counts.json and {len(counts)} CDF files")
    return EXIT_OK


# ---------------------------------------------------------------- verify

_VERIFY_SCHEMA = {
    "kind": Key("str", required=True),  # cod | paraunitary | waveform
    "num_tx": Key("int", default=2),
    "trials": Key("int", default=10000),
    "seed": Key("int", default=0),
    "num_pulses": Key("int", default=2),
    "num_subcarriers": Key("int", default=302),
    "num_cells": Key("int", default=96),
    "eta_max": Key("int", default=40),
    "seeds": Key("int", default=100),
    "waveform": Key("str"),
}


def _cmd_verify(args) -> int:
    v = load_kv(args.config, _VERIFY_SCHEMA)
    if args.seed is not None:
        v["seed"] = args.seed
    if args.trials is not None:
        v["trials"] = args.trials
    kind = v["kind"]
    report: dict = {"kind": kind}
    if kind == "cod":
        design = cod_design(v["num_tx"])
        dev = verify_cod(design, trials=v["trials"], seed=v["seed"])
        report.update({"num_tx": v["num_tx"], "trials": v["trials"], "max_deviation": dev})
        passed = dev < 1e-12
    elif kind == "paraunitary":
        n, head = v["num_subcarriers"], v["eta_max"] + v["num_cells"] - 1
        nonzero_len = n - 2 * head + 1
        worst_flat, worst_xi = 0.0, 0.0
        for s in range(v["seeds"]):
            factors = paraunitary.random_factors(
                v["num_pulses"], nonzero_len, n, v["num_tx"], v["seed"] + s
            )
            pulses = paraunitary.polyphase_to_pulses(
                paraunitary.synthesize_polyphase(factors), n, head
            )
            total = np.sum(np.abs(pulses) ** 2, axis=0)
            worst_flat = max(worst_flat, float(np.abs(total - 1.0 / (n * v["num_tx"])).max()))
            worst_xi = min(worst_xi, icf.snr_degradation_db(pulses, v["num_tx"]))
        report.update(
            {"seeds": v["seeds"], "max_flat_deviation": worst_flat, "min_degradation_db": worst_xi}
        )
        passed = worst_flat < 1e-12 and worst_xi >= -1e-10
    elif kind == "waveform":
        if v["waveform"] is None:
            raise ConfigError(f"{args.config}: kind=waveform needs a 'waveform' path")
        ws = load_waveform_set(_require_file(v["waveform"], "waveform"))
        check = verify_waveform_set(ws)
        report.update(
            {
                "zero_violation": check.zero_violation,
                "energy_error": check.energy_error,
                "flat_unitary_deviation": check.flat_unitary_deviation,
            }
        )
        passed = (
            check.zero_violation <= 1e-10
            and check.energy_error <= 1e-9
            and check.flat_unitary_deviation <= 1e-10
        )
    else:
        raise ConfigError(f"{args.config}: kind must be cod, paraunitary or waveform")
    report["passed"] = bool(passed)
    _write_json(report, os.path.join(args.out, "verify.json"))
    print(f"verify {kind}: {'PASS' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_RUNTIME


# ------------------------------------------------------------------ main

_COMMANDS = {
    "design": _cmd_design,
    "verify": _cmd_verify,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
    "montecarlo": _cmd_montecarlo,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ofdmradar",
        description="Design, verify, simulate and compare CP-OFDM radar pulse sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="key-value config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--trials", type=int, default=None, help="override the trial count")
        p.add_argument("--threads", type=int, default=1, help="worker processes")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK

    try:
        _require_file(args.config, "config")
        os.makedirs(args.out, exist_ok=True)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError, AssertionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
