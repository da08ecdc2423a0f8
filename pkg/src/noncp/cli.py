"""Command line front end.

Subcommands map one-to-one onto library operations and emit CSV or
JSON, to a file given --out or to stdout otherwise. Exit codes: 0 on
success, 1 on usage errors, 2 when a contract is violated (bad input
files included). Figures are rendered only where --plot is given a
path; the default output is always the delimited report alone.
"""

import argparse
import sys

import numpy as np

from .operators import ContractViolation, DimensionError, min_eigenvalue, trace_distance
from .fano import bloch_state
from .choi import (
    apply_choi,
    channel_properties,
    depolarizing_choi,
    difference_form,
    identity_choi,
    transpose_choi,
)
from .dynamics import (
    default_theta_grid,
    quadratic_gamma,
    reduced_affine_form,
    spectrum_sweep,
    toy_choi,
)
from .accessibility import (
    accessibility_threshold,
    identity_transpose_choi,
    linear_accessibility_test,
    tprime_choi,
)
from .perturbation import (
    exponent_from_scan,
    random_weak_coupling_template,
    scaling_scan,
    weak_coupling_model,
)
from .applications import (
    decoupling_sequence,
    dephasing_copy_channel,
    distinguishability_gain,
    recovery_map_choi,
    spin_echo_model,
)
from .tomography import simulate_tomography, standard_probe_states, template_comparison
from .choi import choi_of_affine
from . import serialize


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage problems; the interface reserves 2
    for contract violations, so usage errors are remapped to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_out(p, plot=False):
    p.add_argument("--out", default=None, help="output file (default stdout)")
    if plot:
        p.add_argument("--plot", default=None, metavar="PATH",
                       help="also render a figure to PATH")


def build_parser() -> _Parser:
    parser = _Parser(prog="noncp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("sweep", help="eigenvalue sweep of the worked family")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--points", type=int, default=201)
    _add_out(p, plot=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("access", help="accessibility tests")
    asub = p.add_subparsers(dest="subcommand", required=True,
                            parser_class=_Parser)
    q = asub.add_parser("test", help="test one dynamical matrix")
    q.add_argument("--choi", required=True, help="dynamical-matrix JSON file")
    q.add_argument("--tol", type=float, default=1e-7)
    _add_out(q)
    q.set_defaults(func=_cmd_access_test)
    q = asub.add_parser("threshold", help="bisect a one-parameter family")
    q.add_argument("--family", choices=("tprime", "identity-transpose"),
                   required=True)
    q.add_argument("--lo", type=float, default=0.0)
    q.add_argument("--hi", type=float, default=1.0)
    q.add_argument("--tol", type=float, default=1e-7)
    _add_out(q)
    q.set_defaults(func=_cmd_access_threshold)

    p = sub.add_parser("perturb", help="weak-coupling scaling scans")
    psub = p.add_subparsers(dest="subcommand", required=True,
                            parser_class=_Parser)
    q = psub.add_parser("scan", help="scan a model over scales")
    q.add_argument("--config", required=True, help="model JSON file")
    q.add_argument("--scales", default="1e-1:1e-3:8",
                   help="geometric grid as hi:lo:points")
    _add_out(q, plot=True)
    q.set_defaults(func=_cmd_perturb_scan)

    p = sub.add_parser("decouple", help="spin-echo recovery report")
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--t", type=float, default=0.7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=20)
    _add_out(p)
    p.set_defaults(func=_cmd_decouple)

    p = sub.add_parser("assist", help="measure-and-correct demos")
    bsub = p.add_subparsers(dest="subcommand", required=True,
                            parser_class=_Parser)
    q = bsub.add_parser("demo", help="dephasing-copy distinguishability")
    _add_out(q)
    q.set_defaults(func=_cmd_assist_demo)

    p = sub.add_parser("tomo", help="process tomography")
    tsub = p.add_subparsers(dest="subcommand", required=True,
                            parser_class=_Parser)
    q = tsub.add_parser("run", help="simulate, fit, and rank templates")
    q.add_argument("--truth", required=True,
                   help="identity | transpose | depolarizing | toy:a=..,theta=..")
    q.add_argument("--shots", type=int, default=None)
    q.add_argument("--seed", type=int, default=0)
    _add_out(q, plot=True)
    q.set_defaults(func=_cmd_tomo_run)

    p = sub.add_parser("channel", help="dynamical-matrix utilities")
    csub = p.add_subparsers(dest="subcommand", required=True,
                            parser_class=_Parser)
    q = csub.add_parser("props", help="structural predicates")
    q.add_argument("--choi", required=True)
    _add_out(q)
    q.set_defaults(func=_cmd_channel_props)
    q = csub.add_parser("split", help="difference-form decomposition")
    q.add_argument("--choi", required=True)
    _add_out(q)
    q.set_defaults(func=_cmd_channel_split)
    q = csub.add_parser("from-assignment",
                        help="induced map of a constant-correlation assignment")
    q.add_argument("--assignment", required=True)
    q.add_argument("--unitary", required=True)
    _add_out(q)
    q.set_defaults(func=_cmd_channel_from_assignment)

    return parser


# ---------------------------------------------------------------------------
# handlers


def _cmd_sweep(args) -> int:
    rows = spectrum_sweep(args.a, default_theta_grid(args.points))
    header = ["theta", "lambda_0", "lambda_1", "lambda_2", "lambda_3", "xi_z"]
    serialize.write_csv(header, rows, args.out)
    if args.plot:
        from . import plotting
        plotting.sweep_figure(rows, args.plot)
    return 0


def _cmd_access_test(args) -> int:
    D = serialize.choi_from_json(serialize.load_json(args.choi))
    report = linear_accessibility_test(D, tol=args.tol)
    out = {
        "status": report.status,
        "lambda_min_star": report.lambda_min_star,
        "xi_star": [float(x) for x in report.xi_star],
        "iterations": report.iterations,
        "certificate_operators": (None if report.certificate is None
                                  else len(report.certificate.operators)),
    }
    serialize.dump_json(out, args.out)
    return 0


def _cmd_access_threshold(args) -> int:
    family = {"tprime": tprime_choi,
              "identity-transpose": identity_transpose_choi}[args.family]
    p_star = accessibility_threshold(family, (args.lo, args.hi), tol=args.tol)
    serialize.dump_json({"family": args.family,
                         "p_star": None if p_star is None else float(p_star)},
                        args.out)
    return 0


def _parse_scales(text: str) -> np.ndarray:
    try:
        hi, lo, points = text.split(":")
        return np.geomspace(float(hi), float(lo), int(points))
    except ValueError as exc:
        raise ContractViolation(f"bad --scales value {text!r}: {exc}")


def _template_from_config(cfg):
    if not isinstance(cfg, dict):
        raise ContractViolation("model config must be a JSON object")
    try:
        if "seed" in cfg:
            rng = np.random.default_rng(int(cfg["seed"]))
            return random_weak_coupling_template(
                rng, t=float(cfg.get("t", 0.7)),
                s_max=float(cfg.get("s_max", 0.1)))
        for key in ("H_A", "H_int", "omega0", "beta1", "gamma1"):
            if key not in cfg:
                raise ContractViolation(
                    f"model config needs either a seed or explicit fields; "
                    f"missing {key!r}")
        H_A = serialize.matrix_from_json(cfg["H_A"])
        H_int = serialize.matrix_from_json(cfg["H_int"])
        omega0 = serialize.matrix_from_json(cfg["omega0"])
        Qb = np.asarray(cfg["beta1"], dtype=float)
        Qg = np.asarray(cfg["gamma1"], dtype=float)
        t = float(cfg.get("t", 0.7))
    except (TypeError, ValueError) as exc:
        raise ContractViolation(f"bad model config: {exc}")
    if Qb.shape != (3, 3, 3) or Qg.shape != (3, 3, 3, 3):
        raise ContractViolation(
            "beta1 must be a 3x3x3 coefficient block and gamma1 3x3x3x3")

    def beta1(alpha):
        return np.einsum("jkl,k,l->j", Qb, alpha, alpha)

    def gamma1(alpha):
        return np.einsum("ijkl,k,l->ij", Qg, alpha, alpha)

    def template(s):
        return weak_coupling_model(H_A, H_int, eta=s, epsilon=s,
                                   omega0=omega0, beta1=beta1,
                                   gamma1=gamma1, t=t)

    return template


def _cmd_perturb_scan(args) -> int:
    template = _template_from_config(serialize.load_json(args.config))
    s_values = _parse_scales(args.scales)
    scan = scaling_scan(template, s_values)
    rows = [(s, eps, eta, m["noncp"], m["nonlin"], m["shift"])
            for s, (eps, eta), m in zip(s_values, scan.scales, scan.metrics)]
    header = ["s", "epsilon", "eta", "noncp", "nonlin", "shift"]
    serialize.write_csv(header, rows, args.out)
    if args.out is not None:
        try:
            slope = exponent_from_scan(scan, s_values)
        except ContractViolation as exc:
            print(f"slope unavailable: {exc}")
        else:
            print("CP to machine precision" if np.isnan(slope)
                  else f"slope {serialize.fmt(slope)}")
    if args.plot:
        from . import plotting
        plotting.scan_figure(s_values, scan.metrics, args.plot)
    return 0


def _cmd_decouple(args) -> int:
    model = spin_echo_model(g=args.g, t=args.t)
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for _ in range(args.trials):
        rho = _random_density(rng)
        omega = _random_density(rng)
        worst = max(worst, trace_distance(decoupling_sequence(model, rho, omega), rho))
    D = recovery_map_choi(model)
    serialize.dump_json({
        "g": args.g,
        "t": args.t,
        "recovery_error": worst,
        "recovery_map_min_eig": min_eigenvalue(D.D),
    }, args.out)
    return 0


def _random_density(rng, d: int = 2) -> np.ndarray:
    G = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    M = G @ G.conj().T
    return M / np.trace(M).real


def _cmd_assist_demo(args) -> int:
    ch = dephasing_copy_channel()
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    minus = np.array([1.0, -1.0]) / np.sqrt(2.0)
    serialize.dump_json(distinguishability_gain(ch, plus, minus), args.out)
    return 0


def _parse_truth(text: str):
    name, _, params = text.partition(":")
    kv = {}
    for part in filter(None, params.split(",")):
        key, _, value = part.partition("=")
        try:
            kv[key] = float(value)
        except ValueError:
            raise ContractViolation(f"bad truth parameter {part!r}")
    if name == "toy":
        try:
            D = toy_choi(kv.pop("a"), kv.pop("theta"))
        except KeyError as exc:
            raise ContractViolation(f"toy truth needs parameter {exc}")
    elif name == "identity":
        D = identity_choi(2)
    elif name == "transpose":
        D = transpose_choi(2)
    elif name == "depolarizing":
        D = depolarizing_choi(2)
    else:
        raise ContractViolation(f"unknown truth family {name!r}")
    if kv:
        raise ContractViolation(f"unused truth parameters {sorted(kv)}")
    return lambda rho: apply_choi(D, rho)


def _cmd_tomo_run(args) -> int:
    truth = _parse_truth(args.truth)
    rec = simulate_tomography(truth, standard_probe_states(2),
                              shots=args.shots, seed=args.seed)
    fits = []
    for fit in template_comparison(rec):
        props = channel_properties(fit.choi)
        entry = {
            "model": fit.model,
            "residual": fit.residual,
            "min_eigenvalue": props["min_eigenvalue"],
            "trace_preserving": props["trace_preserving"],
            "cp": props["cp"],
            "xi": None if fit.xi is None else [float(x) for x in fit.xi],
            "choi": serialize.choi_to_json(fit.choi),
        }
        if fit.difference is not None:
            entry["difference"] = {
                "plus": serialize.kraus_to_json(fit.difference.plus),
                "minus": serialize.kraus_to_json(fit.difference.minus),
            }
        fits.append(entry)
    serialize.dump_json({"truth": args.truth, "shots": args.shots,
                         "seed": args.seed, "fits": fits}, args.out)
    if args.plot:
        from . import plotting
        plotting.tomo_figure(fits, args.plot)
    return 0


def _cmd_channel_props(args) -> int:
    D = serialize.choi_from_json(serialize.load_json(args.choi))
    props = channel_properties(D)
    props["eigenvalues"] = [float(x) for x in np.linalg.eigvalsh(D.D)]
    serialize.dump_json(props, args.out)
    return 0


def _cmd_channel_split(args) -> int:
    D = serialize.choi_from_json(serialize.load_json(args.choi))
    form = difference_form(D)
    serialize.dump_json({
        "plus": serialize.kraus_to_json(form.plus),
        "minus": serialize.kraus_to_json(form.minus),
    }, args.out)
    return 0


def _cmd_channel_from_assignment(args) -> int:
    spec = serialize.assignment_from_json(serialize.load_json(args.assignment))
    U = serialize.matrix_from_json(serialize.load_json(args.unitary))
    if spec.b.shape != (3,):
        raise ContractViolation("assignment must describe a qubit environment")
    product_G = np.zeros((3, 3, 3))
    for i in range(3):
        product_G[i, :, i] = spec.b
    if np.abs(spec.B).max() > 1e-12 or np.abs(spec.G - product_G).max() > 1e-12:
        raise ContractViolation(
            "only constant-correlation assignments (product structure plus "
            "a constant g block) induce a state-independent dynamical matrix")
    omega = bloch_state(spec.b, 2)
    Gamma = quadratic_gamma(spec, np.zeros(3))
    F = reduced_affine_form(U, omega, Gamma)
    D = choi_of_affine(F)
    serialize.dump_json({
        "xi": [float(x) for x in F.xi],
        "choi": serialize.choi_to_json(D),
        "properties": channel_properties(D),
    }, args.out)
    return 0


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ContractViolation, DimensionError) as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
