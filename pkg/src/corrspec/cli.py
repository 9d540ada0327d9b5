"""Experiment driver: every pipeline as a subcommand over a seeded config.

Subcommands: spectrum | reconstruct | bands | perturb | subregion | gen.
Config values resolve as flags > config file > defaults; reports are
byte-stable for a fixed resolved config.  Exit codes: 0 success/unique,
2 non-unique kernel, 3 no solution, 4 precondition or config failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import kernels
from .basis import LatticeError, LatticeSpec, build_local_basis
from .correlation import (
    DEFAULT_ZERO_TOL,
    build_pure,
    build_rho_commutator,
    correlation_spectrum,
)
from .hamiltonians import (
    named_model,
    random_disordered,
    random_translation_invariant,
    save_coefficients,
    ti_block,
)
from .momentum import (
    band_spectrum,
    build_blocks,
    recover_translation_invariant,
    zero_momentum_eigenstates,
)
from .reconstruction import recover, sensitivity_report
from .reports import envelope, render_json, write_report
from .spectra import (
    eigenstates,
    gibbs_state,
    ground_state,
    reduce_density_matrix,
    reduce_state,
    save_density_matrix,
)
from .subregion import (
    recover_disordered_subregion,
    recover_thermal_log,
    recover_ti_from_subregion,
    region_basis,
    restrict_coeffs,
)

EXIT_OK = 0
EXIT_NON_UNIQUE = 2
EXIT_NO_SOLUTION = 3
EXIT_PRECONDITION = 4

DEFAULTS = {
    "n": 8,
    "local_dim": 2,
    "k": 2,
    "boundary": "periodic",
    "ensemble": "disordered",
    "model_params": {},
    "stddev": 1.0,
    "seed": 0,
    "state_source": "eigenstate",
    "selector": "ground",
    "zero_tolerance": DEFAULT_ZERO_TOL,
    "epsilons": [1e-4, 1e-3, 1e-2],
    "draws": 32,
    "subregion_mode": "disordered",
    "region_start": 0,
    "region_size": 4,
    "trim": 1,
    "beta": 0.5,
    "gap_index": 8,
}

_FLAG_KEYS = {
    "n": int,
    "local_dim": int,
    "k": int,
    "boundary": str,
    "ensemble": str,
    "stddev": float,
    "seed": int,
    "state_source": str,
    "selector": str,
    "zero_tolerance": float,
    "draws": int,
    "subregion_mode": str,
    "region_start": int,
    "region_size": int,
    "trim": int,
    "beta": float,
    "gap_index": int,
}


class CliError(Exception):
    """Config or precondition failure; maps to exit code 4."""


def resolve_config(args) -> dict:
    config = dict(DEFAULTS)
    if args.config:
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")
        config.update(file_cfg)
    for key, cast in _FLAG_KEYS.items():
        val = getattr(args, key, None)
        if val is not None:
            config[key] = cast(val)
    if getattr(args, "epsilons", None):
        config["epsilons"] = [float(tok) for tok in args.epsilons.split(",")]
    if getattr(args, "model_params", None):
        config["model_params"] = json.loads(args.model_params)
    if config["state_source"] not in ("eigenstate", "product_up", "haar"):
        raise CliError(f"unknown state_source {config['state_source']!r}")
    if config["ensemble"] not in ("disordered", "ti", "tfim", "xxz", "heisenberg", "decoupled"):
        raise CliError(f"unknown ensemble {config['ensemble']!r}")
    return config


def _spec(config) -> LatticeSpec:
    return LatticeSpec(
        n=config["n"],
        local_dim=config["local_dim"],
        k=config["k"],
        boundary=config["boundary"],
    )


def _hamiltonian(config, basis):
    kind = config["ensemble"]
    if kind == "disordered":
        return random_disordered(basis, seed=config["seed"], stddev=config["stddev"])
    if kind == "ti":
        return random_translation_invariant(basis, seed=config["seed"], stddev=config["stddev"])
    return named_model(kind, config["model_params"], basis)


def _pick_index(selector, count):
    if selector == "ground":
        return 0
    if selector == "mid":
        return count // 2
    try:
        idx = int(selector)
    except ValueError as err:
        raise CliError(f"selector must be 'ground', 'mid', or an index, got {selector!r}") from err
    if not 0 <= idx < count:
        raise CliError(f"selector index {idx} outside [0, {count})")
    return idx


def _prepare_state(config, basis):
    """Returns (state vector, Hamiltonian or None, source_id)."""
    spec = basis.spec
    src = config["state_source"]
    if src == "product_up":
        v = np.zeros(spec.N, dtype=complex)
        v[0] = 1.0
        return v, None, "product_up"
    if src == "haar":
        rng = np.random.default_rng(config["seed"])
        v = rng.normal(size=spec.N) + 1j * rng.normal(size=spec.N)
        v /= np.linalg.norm(v)
        return v, None, f"haar(seed={config['seed']})"
    ham = _hamiltonian(config, basis)
    idx = _pick_index(config["selector"], spec.N)
    rec = eigenstates(ham, [idx])[0]
    return rec.state, ham, f"{ham.label}|state={idx}"


def _tolerances(config):
    return {"zero_tolerance": config["zero_tolerance"]}


def cmd_gen(args) -> int:
    config = resolve_config(args)
    basis = build_local_basis(_spec(config))
    if config["state_source"] == "eigenstate":
        ham = _hamiltonian(config, basis)
        out = args.out or "hamiltonian.json"
        save_coefficients(ham, out)
    sys.stdout.write(render_json(config) + "\n")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    config = resolve_config(args)
    basis = build_local_basis(_spec(config))
    state, ham, source_id = _prepare_state(config, basis)
    mat = build_pure(state, basis, source_id=source_id)
    spectrum = correlation_spectrum(mat, config["zero_tolerance"])
    payload = {
        "spec": basis.spec.to_dict(),
        "S": basis.S,
        "variant": mat.variant,
        "source_id": source_id,
        "eigenvalues": spectrum.eigenvalues,
        "kernel_dim": spectrum.kernel_dim,
        "lambda1": float(spectrum.eigenvalues[0]),
        "lambda2": float(spectrum.eigenvalues[1]),
    }
    report = envelope("spectrum", config, payload, args.deterministic, _tolerances(config))
    _emit(report, args.out)
    if args.save_matrix:
        from .spectra import _write_binary

        _write_binary(args.save_matrix, {"kind": "correlation_matrix"}, mat.entries)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    config = resolve_config(args)
    basis = build_local_basis(_spec(config))
    state, ham, source_id = _prepare_state(config, basis)
    mat = build_pure(state, basis, source_id=source_id)
    truth = ham.coeffs if ham is not None else None
    res = recover(mat, config["zero_tolerance"], truth=truth)
    payload = {
        "spec": basis.spec.to_dict(),
        "source_id": source_id,
        "verdict": res.verdict,
        "kernel_dim": res.kernel_dim,
        "lambda1": res.lambda1,
        "lambda2": res.lambda2,
        "best_effort": res.best_effort,
        "recovered": res.recovered.T,  # one row per kernel vector
        "theta_to_truth": res.angle_to_truth,
    }
    report = envelope("reconstruction", config, payload, args.deterministic, _tolerances(config))
    _emit(report, args.out)
    if res.verdict == "non_unique":
        return EXIT_NON_UNIQUE
    if res.verdict == "no_solution":
        return EXIT_NO_SOLUTION
    return EXIT_OK


def cmd_bands(args) -> int:
    config = resolve_config(args)
    spec = _spec(config)
    basis = build_local_basis(spec)
    truth_block = None
    if config["state_source"] == "product_up":
        state = np.zeros(spec.N, dtype=complex)
        state[0] = 1.0
        source_id = "product_up"
    elif config["ensemble"] in ("ti", "xxz", "heisenberg", "tfim", "decoupled"):
        ham = _hamiltonian(config, basis)
        energies, states = zero_momentum_eigenstates(ham)
        idx = _pick_index(config["selector"], states.shape[1])
        state = states[:, idx]
        source_id = f"{ham.label}|q0-sector state={idx}"
        try:
            truth_block = ti_block(ham)
        except LatticeError:
            truth_block = None
    else:
        raise CliError("bands requires a translation-invariant ensemble or product_up source")
    blocks = build_blocks(state, basis)
    bands = band_spectrum(blocks, gap_index=config["gap_index"])
    res = recover_translation_invariant(
        blocks.blocks[0], config["zero_tolerance"], truth_block=truth_block
    )
    payload = {
        "spec": spec.to_dict(),
        "source_id": source_id,
        "bands": bands.lam.shape[0],
        "momenta": list(range(spec.n)),
        "lam": bands.lam,
        "gap_report": {
            "band_index": bands.gap_report.band_index,
            "gap": bands.gap_report.gap,
            "location": bands.gap_report.location,
        },
        "q0": {
            "verdict": res.verdict,
            "kernel_dim": res.kernel_dim,
            "lambda1": res.lambda1,
            "lambda2": res.lambda2,
            "recovered": res.recovered.T,
            "theta_to_truth": res.angle_to_truth,
        },
    }
    report = envelope("bands", config, payload, args.deterministic, _tolerances(config))
    _emit(report, args.out)
    return EXIT_OK


def cmd_perturb(args) -> int:
    config = resolve_config(args)
    basis = build_local_basis(_spec(config))
    state, ham, source_id = _prepare_state(config, basis)
    mat = build_pure(state, basis, source_id=source_id)
    rows = sensitivity_report(
        mat,
        epsilons=config["epsilons"],
        n_draws=config["draws"],
        seed=config["seed"],
        zero_tolerance=config["zero_tolerance"],
    )
    spectrum = correlation_spectrum(mat, config["zero_tolerance"])
    payload = {
        "spec": basis.spec.to_dict(),
        "source_id": source_id,
        "lambda2": float(spectrum.eigenvalues[1]),
        "rows": [
            {
                "epsilon": r.epsilon,
                "median_theta": r.median_theta,
                "max_theta": r.max_theta,
                "bound": r.bound,
            }
            for r in rows
        ],
    }
    report = envelope("sensitivity", config, payload, args.deterministic, _tolerances(config))
    _emit(report, args.out)
    return EXIT_OK


def cmd_subregion(args) -> int:
    config = resolve_config(args)
    spec = _spec(config)
    basis = build_local_basis(spec)
    mode = config["subregion_mode"]
    region = tuple(range(config["region_start"], config["region_start"] + config["region_size"]))
    if not all(0 <= s < spec.n for s in region):
        raise CliError(f"region {region} outside the chain")
    trim = config["trim"]
    payload = {
        "spec": spec.to_dict(),
        "mode": mode,
        "region": list(region),
        "m_A": len(region),
        "trim": trim,
    }
    verdict = None
    if mode == "disordered":
        ham = _hamiltonian(config, basis)
        idx = _pick_index(config["selector"], spec.N)
        rec = eigenstates(ham, [idx])[0]
        rho = reduce_state(rec, region)
        sub = region_basis(spec, region)
        out = recover_disordered_subregion(
            rho, sub, truth=restrict_coeffs(ham, region), trim=trim,
            zero_tolerance=config["zero_tolerance"],
        )
        payload.update(
            theta_untrimmed=out.theta_untrimmed,
            theta_trimmed=out.theta_trimmed,
            lambda1=out.lambda1,
            lambda2=out.lambda2,
        )
        verdict = out.result.verdict
    elif mode == "translation_invariant":
        if config["ensemble"] != "ti":
            raise CliError("translation_invariant subregion mode needs the ti ensemble")
        ham = _hamiltonian(config, basis)
        rec = ground_state(ham)
        rho = reduce_state(rec.state, region)
        res = recover_ti_from_subregion(
            rho, spec, zero_tolerance=config["zero_tolerance"], trim=trim,
            truth_block=ti_block(ham),
        )
        payload.update(
            theta_to_truth=res.angle_to_truth,
            lambda1=res.lambda1,
            lambda2=res.lambda2,
            verdict=res.verdict,
        )
        verdict = res.verdict
    elif mode == "thermal_log":
        ham = _hamiltonian(config, basis)
        rho_full = gibbs_state(ham, beta=config["beta"])
        rho = reduce_density_matrix(rho_full, region)
        sub = region_basis(spec, region)
        out = recover_thermal_log(rho, sub, trim=trim, truth=restrict_coeffs(ham, region))
        payload.update(
            theta_untrimmed=out.theta_untrimmed,
            theta_trimmed=out.theta_trimmed,
            beta=out.beta,
            no_signal=out.no_signal,
        )
    elif mode == "rho_commutator":
        ham = _hamiltonian(config, basis)
        rho_full = gibbs_state(ham, beta=config["beta"])
        if len(region) == spec.n:
            rho, sub, truth = rho_full, basis, ham.coeffs
        else:
            rho = reduce_density_matrix(rho_full, region)
            sub = region_basis(spec, region)
            truth = restrict_coeffs(ham, region)
        mat = build_rho_commutator(rho, sub)
        res = recover(mat, config["zero_tolerance"], truth=truth)
        payload.update(
            verdict=res.verdict,
            kernel_dim=res.kernel_dim,
            lambda1=res.lambda1,
            lambda2=res.lambda2,
            theta_to_truth=res.angle_to_truth,
        )
        verdict = res.verdict
    else:
        raise CliError(f"unknown subregion mode {mode!r}")
    report = envelope("subregion", config, payload, args.deterministic, _tolerances(config))
    _emit(report, args.out)
    if verdict == "non_unique":
        return EXIT_NON_UNIQUE
    if verdict == "no_solution":
        return EXIT_NO_SOLUTION
    return EXIT_OK


def _emit(report: dict, out_path) -> None:
    if out_path:
        write_report(report, out_path)
    else:
        sys.stdout.write(render_json(report) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrspec",
        description="Recover local spin-chain Hamiltonians from eigenstate correlations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("spectrum", cmd_spectrum),
        ("reconstruct", cmd_reconstruct),
        ("bands", cmd_bands),
        ("perturb", cmd_perturb),
        ("subregion", cmd_subregion),
        ("gen", cmd_gen),
    ):
        p = sub.add_parser(name)
        p.set_defaults(func=fn)
        p.add_argument("--config", help="JSON config file (flags override it)")
        p.add_argument("--out", help="report path (stdout when omitted)")
        p.add_argument(
            "--deterministic",
            action="store_true",
            help="pin the pure-numpy kernel backend for byte-stable reports",
        )
        p.add_argument("--n", type=int)
        p.add_argument("--local-dim", dest="local_dim", type=int)
        p.add_argument("--k", type=int)
        p.add_argument("--boundary", choices=["periodic", "open"])
        p.add_argument("--ensemble")
        p.add_argument("--model-params", dest="model_params", help="JSON object of model parameters")
        p.add_argument("--stddev", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--state-source", dest="state_source", choices=["eigenstate", "product_up", "haar"])
        p.add_argument("--selector", help="ground | mid | integer eigenstate index")
        p.add_argument("--zero-tol", dest="zero_tolerance", type=float)
        if name == "spectrum":
            p.add_argument("--save-matrix", dest="save_matrix", help="binary sidecar for the matrix")
        if name == "perturb":
            p.add_argument("--epsilons", help="comma-separated epsilon list")
            p.add_argument("--draws", type=int)
        if name == "bands":
            p.add_argument("--gap-index", dest="gap_index", type=int)
        if name == "subregion":
            p.add_argument("--mode", dest="subregion_mode",
                           choices=["disordered", "translation_invariant", "thermal_log", "rho_commutator"])
            p.add_argument("--region-start", dest="region_start", type=int)
            p.add_argument("--region-size", dest="region_size", type=int)
            p.add_argument("--trim", type=int)
            p.add_argument("--beta", type=float)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.deterministic:
        kernels.set_backend("numpy")
    try:
        return args.func(args)
    except (CliError, LatticeError, ValueError, OSError, json.JSONDecodeError) as err:
        sys.stderr.write(f"corrspec: {err}\n")
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
