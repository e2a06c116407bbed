"""Command-line driver exposing the library as reproducible file-based runs.

Exit codes: 0 success, 1 bad input, 2 insufficient seed, 3 rank-deficient
map, 4 numerical-ambiguity flag.  All randomness is controlled by explicit
``--seed`` arguments; a fixed seed reproduces output files byte for byte.

File schemas (also summarized in each subcommand's ``--help``):

* operator JSON: ``{"dim": d, "re": [[..]], "im": [[..]]}`` row-major.
* channel JSON: ``{"dim": d, "transfer": [[..]], "basis": "gellmann-identity-last"}``.
* generator JSON: ``{"dim": d, "P_re": [[..]], "P_im": [[..]], "v_imag": [..]}``.
* series CSV: header ``index_or_time,value``.
* landscape CSV: header ``p,theta,sigma_min``.

If the environment variable ``EVOTOMO_OUTDIR`` is set, relative output paths
are placed under it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .channels import (
    LindbladGenerator,
    SuperOperator,
    depolarizing_mixture,
    exponentiate,
    haar_random_unitary,
    pauli_cycle_unitary,
    qubit_dephasing_depolarizing,
    random_lindblad,
    unitary_channel,
    validate_channel,
)
from .errors import (
    EvotomoError,
    IllConditionedTimesError,
    InsufficientSeedError,
    RankDeficientError,
    SpectralAmbiguityError,
)
from .operator_space import HermitianOperator
from .series_engine import (
    TimeSeries,
    build_affine_extension,
    build_continuous_extension,
    build_linear_extension,
    generate_discrete,
)
from .spectral import spectral_profile
from .statistics import mse_experiment
from .tomography import build_alpha, build_beta, certify, qubit_landscape, reconstruct_observable, reconstruct_state

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_INSUFFICIENT_SEED = 2
EXIT_RANK_DEFICIENT = 3
EXIT_AMBIGUOUS = 4

OPERATOR_SCHEMA = 'operator JSON {"dim", "re", "im"}'


def _resolve_out(path: str) -> str:
    base = os.environ.get("EVOTOMO_OUTDIR")
    if base and not os.path.isabs(path):
        path = os.path.join(base, path)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return path


def _write_json(path: str, obj) -> None:
    with open(_resolve_out(path), "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _load_operator(path: str) -> HermitianOperator:
    return HermitianOperator.from_dict(_load_json(path))


def _load_channel(path: str) -> SuperOperator:
    return SuperOperator.from_dict(_load_json(path))


def _load_lindblad(path: str) -> LindbladGenerator:
    return LindbladGenerator.from_dict(_load_json(path))


def _write_series(path: str, series: TimeSeries) -> None:
    with open(_resolve_out(path), "w", newline="") as fh:
        series.to_csv(fh)


def _parse_floats(text: str) -> np.ndarray:
    return np.array([float(x) for x in text.split(",") if x.strip() != ""])


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_gen_channel(args) -> int:
    if args.family == "lindblad":
        rng = np.random.default_rng(args.seed)
        gen = random_lindblad(args.dim, rng, scale=args.scale)
        _write_json(args.out, gen.to_dict())
        report = validate_channel(exponentiate(gen, 1.0))
        report["family"] = "lindblad"
        print(json.dumps(report, sort_keys=True))
        return EXIT_OK

    if args.family == "qubit-pt":
        channel = qubit_dephasing_depolarizing(args.p, args.theta)
    else:
        if args.cyclic_qubit:
            U = pauli_cycle_unitary()
        elif args.unitary_file:
            op = _load_json(args.unitary_file)
            U = np.asarray(op["re"], dtype=float) + 1j * np.asarray(op["im"], dtype=float)
        else:
            if args.dim is None:
                raise EvotomoError("need --dim/--seed, --cyclic-qubit, or --unitary-file")
            U = haar_random_unitary(args.dim, np.random.default_rng(args.seed))
        if args.family == "unitary":
            channel = unitary_channel(U)
        else:  # depolarizing
            d = U.shape[0]
            sigma = _load_operator(args.sigma).entries if args.sigma else np.eye(d) / d
            channel = depolarizing_mixture(U, sigma, args.lam)
    _write_json(args.out, channel.to_dict())
    report = validate_channel(channel)
    report["family"] = args.family
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def _cmd_series(args) -> int:
    T = _load_channel(args.channel)
    rho = _load_operator(args.rho)
    h0 = _load_operator(args.h0)
    series = generate_discrete(rho, h0, T, t0=args.t0, length=args.len)
    _write_series(args.out, series)
    return EXIT_OK


def _relative_deviation(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.abs(b).max(), 1e-300)
    return float(np.abs(a - b).max() / scale)


def _cmd_extend(args) -> int:
    if args.mode == "continuous":
        gen = _load_lindblad(args.lindblad)
        rho = _load_operator(args.rho)
        h0 = _load_operator(args.h0)
        times = _parse_floats(args.times)
        start, stop, count = args.grid.split(",")
        grid = np.linspace(float(start), float(stop), int(count))
        ext = build_continuous_extension(gen, times)
        seed = np.array(
            [generate_discrete(rho, h0, exponentiate(gen, t), 0, 1).values[0] for t in times]
        )
        series = ext.extend(seed, grid)
        _write_series(args.out, series)
        report = {
            "mode": "continuous",
            "sample_times": times.tolist(),
            "kappa": 0,
            "condition_number": ext.condition_number,
            "max_deviation": None,
        }
        if args.verify:
            direct = np.array(
                [generate_discrete(rho, h0, exponentiate(gen, t), 0, 1).values[0] for t in grid]
            )
            report["max_deviation"] = _relative_deviation(series.values, direct)
        if args.report:
            _write_json(args.report, report)
        print(json.dumps({k: report[k] for k in ("mode", "kappa", "max_deviation")}, sort_keys=True))
        return EXIT_OK

    T = _load_channel(args.channel)
    rho = _load_operator(args.rho)
    h0 = _load_operator(args.h0)
    seed_series = generate_discrete(rho, h0, T, t0=args.t0, length=args.seed_len)
    if args.mode == "linear":
        profile = spectral_profile(T, args.tol)
        ext = build_linear_extension(profile, args.t0, args.seed_len, args.horizon)
        delta, j0 = profile.delta, profile.j0
    else:
        ext = build_affine_extension(T, h0, args.t0, args.seed_len, args.horizon, tol=args.tol)
        delta, j0 = ext.inner.delta, ext.inner.j0
    series = ext.extend(seed_series.values)
    _write_series(args.out, series)
    report = {
        "mode": args.mode,
        "delta": delta,
        "j0": j0,
        "kappa": ext.kappa,
        "seed_window": [args.t0, args.t0 + args.seed_len - 1],
        "horizon": args.horizon,
        "coefficient_condition": ext.step_amplification(),
        "max_deviation": None,
    }
    if args.verify:
        direct = generate_discrete(rho, h0, T, t0=ext.kappa, length=args.horizon - ext.kappa + 1)
        report["max_deviation"] = _relative_deviation(series.values, direct.values)
    if args.report:
        _write_json(args.report, report)
    print(json.dumps({k: report[k] for k in ("mode", "delta", "j0", "kappa", "max_deviation")},
                     sort_keys=True))
    return EXIT_OK


def _build_map(args):
    T = _load_channel(args.channel)
    probe = _load_operator(args.probe)
    if args.kind == "alpha":
        return build_alpha(T, probe, args.t0, args.t1)
    return build_beta(T, probe, args.t0, args.t1)


def _cmd_certify(args) -> int:
    cert = certify(_build_map(args), tol=args.tol)
    _write_json(args.out, cert.to_dict())
    print(json.dumps({"verdict": cert.verdict, "rank": cert.rank, "ambient": cert.ambient},
                     sort_keys=True))
    return EXIT_OK


def _cmd_reconstruct(args) -> int:
    mapping = _build_map(args)
    with open(args.data) as fh:
        data = TimeSeries.from_csv(fh).values
    if args.kind == "alpha":
        op = reconstruct_state(mapping, data)
    else:
        op = reconstruct_observable(mapping, data)
    _write_json(args.out, op.to_dict())
    return EXIT_OK


def _cmd_scan(args) -> int:
    np_, nt = (int(x) for x in args.grid.split("x"))
    grid_p = np.linspace(0.0, 1.0, np_)
    grid_theta = np.linspace(0.0, np.pi, nt)
    table = qubit_landscape(grid_p, grid_theta)
    with open(_resolve_out(args.out), "w", newline="") as fh:
        fh.write("p,theta,sigma_min\n")
        for i, p in enumerate(grid_p):
            for j, th in enumerate(grid_theta):
                fh.write(f"{p:.17g},{th:.17g},{table[i, j]:.17g}\n")
    return EXIT_OK


def _cmd_estimate(args) -> int:
    T = _load_channel(args.channel)
    h0 = _load_operator(args.h0)
    truth = _load_operator(args.truth)
    rng = np.random.default_rng(args.seed)
    report = mse_experiment(T, h0, truth, n=args.n, trials=args.trials, rng=rng,
                            t0=args.t0, t1=args.t1)
    _write_json(args.out, report)
    print(json.dumps({"ratio": report["ratio"], "bound": report["bound"]}, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evotomo",
        description="Evolution-based quantum tomography experiments. " + __doc__.split("\n\n")[1],
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-channel", help="construct a channel or generator and write its JSON")
    g.add_argument("family", choices=["unitary", "depolarizing", "qubit-pt", "lindblad"])
    g.add_argument("--dim", type=int, default=None, help="dimension for random constructions")
    g.add_argument("--seed", type=int, default=0, help="RNG seed (reproducible outputs)")
    g.add_argument("--scale", type=float, default=1.0, help="lindblad: dissipation scale")
    g.add_argument("--cyclic-qubit", action="store_true",
                   help="use the qubit unitary that cyclically permutes the Pauli axes")
    g.add_argument("--unitary-file", default=None, help=f"unitary as {OPERATOR_SCHEMA}")
    g.add_argument("--sigma", default=None,
                   help=f"depolarizing target state as {OPERATOR_SCHEMA} (default maximally mixed)")
    g.add_argument("--lam", type=float, default=0.0, help="depolarizing weight in [0,1]")
    g.add_argument("--p", type=float, default=0.0, help="qubit-pt noise weight")
    g.add_argument("--theta", type=float, default=0.0, help="qubit-pt rotation angle")
    g.add_argument("--out", required=True, help="output channel/generator JSON path")
    g.set_defaults(func=_cmd_gen_channel)

    s = sub.add_parser("series", help="generate an expectation-value series CSV")
    s.add_argument("--channel", required=True, help="channel JSON")
    s.add_argument("--rho", required=True, help=f"state as {OPERATOR_SCHEMA}")
    s.add_argument("--h0", required=True, help=f"observable as {OPERATOR_SCHEMA}")
    s.add_argument("--t0", type=int, default=0)
    s.add_argument("--len", type=int, required=True)
    s.add_argument("--out", required=True, help="series CSV path")
    s.set_defaults(func=_cmd_series)

    e = sub.add_parser("extend", help="extend a finite series from spectral data")
    e.add_argument("--mode", choices=["linear", "affine", "continuous"], default="linear")
    e.add_argument("--channel", help="channel JSON (linear/affine modes)")
    e.add_argument("--lindblad", help="generator JSON (continuous mode)")
    e.add_argument("--rho", required=True, help=f"state as {OPERATOR_SCHEMA}")
    e.add_argument("--h0", required=True, help=f"observable as {OPERATOR_SCHEMA}")
    e.add_argument("--t0", type=int, default=0)
    e.add_argument("--seed-len", type=int, default=1, help="number of seed values")
    e.add_argument("--horizon", type=int, default=50, help="largest extended index")
    e.add_argument("--times", default="", help="continuous: comma-separated sample times")
    e.add_argument("--grid", default="0,5,101", help="continuous: start,stop,count evaluation grid")
    e.add_argument("--tol", type=float, default=1e-8, help="spectral tolerance")
    e.add_argument("--verify", action="store_true",
                   help="compare against direct generation and report the deviation")
    e.add_argument("--out", required=True, help="extended series CSV path")
    e.add_argument("--report", default=None, help="optional extension report JSON path")
    e.set_defaults(func=_cmd_extend)

    c = sub.add_parser("certify", help="injectivity certificate of a measurement map")
    c.add_argument("--channel", required=True)
    c.add_argument("--kind", choices=["alpha", "beta"], required=True,
                   help="alpha: state side; beta: observable side")
    c.add_argument("--probe", required=True, help=f"probe as {OPERATOR_SCHEMA}")
    c.add_argument("--t0", type=int, default=0)
    c.add_argument("--t1", type=int, required=True)
    c.add_argument("--tol", type=float, default=1e-9, help="relative rank tolerance")
    c.add_argument("--out", required=True, help="certificate JSON path")
    c.set_defaults(func=_cmd_certify)

    r = sub.add_parser("reconstruct", help="invert a measurement map on series data")
    r.add_argument("--channel", required=True)
    r.add_argument("--kind", choices=["alpha", "beta"], required=True)
    r.add_argument("--probe", required=True, help=f"probe as {OPERATOR_SCHEMA}")
    r.add_argument("--data", required=True, help="series CSV with the measured values")
    r.add_argument("--t0", type=int, default=0)
    r.add_argument("--t1", type=int, required=True)
    r.add_argument("--out", required=True, help=f"reconstructed {OPERATOR_SCHEMA} path")
    r.set_defaults(func=_cmd_reconstruct)

    sc = sub.add_parser("scan", help="qubit noise/rotation stability landscape CSV")
    sc.add_argument("--grid", default="101x101", help="PxT grid sizes, e.g. 21x21")
    sc.add_argument("--out", required=True, help="landscape CSV path (p,theta,sigma_min)")
    sc.set_defaults(func=_cmd_scan)

    es = sub.add_parser("estimate", help="finite-statistics Monte-Carlo estimator report")
    es.add_argument("--channel", required=True)
    es.add_argument("--h0", required=True, help=f"effect probe as {OPERATOR_SCHEMA}")
    es.add_argument("--truth", required=True, help=f"true state as {OPERATOR_SCHEMA}")
    es.add_argument("--n", type=int, required=True, help="shots per effect")
    es.add_argument("--trials", type=int, required=True)
    es.add_argument("--seed", type=int, default=0)
    es.add_argument("--t0", type=int, default=0)
    es.add_argument("--t1", type=int, default=None)
    es.add_argument("--out", required=True, help="experiment report JSON path")
    es.set_defaults(func=_cmd_estimate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InsufficientSeedError as exc:
        print(f"insufficient seed: {exc}; minimum length {exc.required}", file=sys.stderr)
        return EXIT_INSUFFICIENT_SEED
    except RankDeficientError as exc:
        print(f"rank-deficient map: {exc}", file=sys.stderr)
        if exc.certificate is not None:
            print(json.dumps(exc.certificate.to_dict(), sort_keys=True), file=sys.stderr)
        return EXIT_RANK_DEFICIENT
    except (SpectralAmbiguityError, IllConditionedTimesError) as exc:
        print(f"numerical ambiguity: {exc}", file=sys.stderr)
        return EXIT_AMBIGUOUS
    except (EvotomoError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
