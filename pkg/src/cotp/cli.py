"""Command-line experiment runner.

Exit codes: 0 success, 1 configuration error, 2 capacity exceeded,
3 internal error (including a violated converse inequality).
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from . import entropic, pad, qcore, squash, typesys
from .errors import CapacityExceeded, ConfigError, CotpError, InvalidState

EXIT_OK, EXIT_CONFIG, EXIT_CAPACITY, EXIT_INTERNAL = 0, 1, 2, 3

SIMULATE_SUMMARY = ["eps_worst", "eps_avg", "delta_worst", "rate_bits", "key_rate_bits",
                    "converse_lhs", "converse_rhs", "converse_ok", "eps_expurgated",
                    "delta_expurgated"]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


# -- states -------------------------------------------------------------------

ABE = qcore.SystemLayout.of(("A", 2), ("B", 2), ("E", 2))
AB = qcore.SystemLayout.of(("A", 2), ("B", 2))


def ghz() -> qcore.DensityMatrix:
    v = np.zeros(8)
    v[0] = v[7] = 1 / math.sqrt(2)
    return qcore.PureState(ABE, v).to_density()


def bell_product() -> qcore.DensityMatrix:
    bell = qcore.PureState(AB, np.array([1, 0, 0, 1]) / math.sqrt(2)).to_density()
    return qcore.tensor(bell, qcore.maximally_mixed(qcore.SystemLayout.of(("E", 2))))


def _bipartite(name: str) -> qcore.DensityMatrix:
    if name == "bell":
        return qcore.PureState(AB, np.array([1, 0, 0, 1]) / math.sqrt(2)).to_density()
    if name == "product":
        return qcore.DensityMatrix(AB, np.kron(np.diag([0.7, 0.3]), np.diag([0.6, 0.4])))
    if name == "classical":
        return qcore.DensityMatrix(AB, np.diag([0.5, 0, 0, 0.5]))
    raise KeyError(name)


def random_state(seed: int, dims, rank=None) -> qcore.DensityMatrix:
    dims = [int(d) for d in dims]
    if len(dims) < 2:
        raise ConfigError("random states need at least two factors")
    if len(dims) == 2:
        labels = ["A", "B"]
    elif len(dims) == 3:
        labels = ["A", "B", "E"]
    else:
        labels = ["A"] + [f"B{i}" for i in range(1, len(dims) - 1)] + ["E"]
    layout = qcore.SystemLayout(tuple(zip(labels, dims)))
    return qcore.random_density(layout, rank, seed=seed)


def load_named_state(spec: str) -> qcore.DensityMatrix:
    """Resolve ``--state``: ``ghz``, ``bell-product``, ``bell``, ``product``,
    ``classical``, ``random:<seed>:<d1>x<d2>x...[:<rank>]`` or ``file:<path>``."""
    if spec == "ghz":
        return ghz()
    if spec == "bell-product":
        return bell_product()
    if spec in ("bell", "product", "classical"):
        return _bipartite(spec)
    if spec.startswith("random:"):
        parts = spec.split(":")
        if len(parts) not in (3, 4):
            raise ConfigError("random states are written random:<seed>:<d1>x<d2>x...[:<rank>]")
        try:
            seed = int(parts[1])
            dims = [int(d) for d in parts[2].split("x")]
            rank = int(parts[3]) if len(parts) == 4 else None
        except ValueError as exc:
            raise ConfigError(f"bad random state spec {spec!r}") from exc
        return random_state(seed, dims, rank)
    if spec.startswith("file:"):
        return qcore.load_state(spec[5:]).to_density()
    raise ConfigError(f"unknown state {spec!r}")


def parse_partition(text: str) -> list[tuple[str, ...]]:
    groups = [tuple(lab.strip() for lab in g.split(",") if lab.strip()) for g in text.split(":")]
    if len(groups) != 3 or not all(groups):
        raise ConfigError(f"partition {text!r} must have three non-empty groups A:B:E")
    return groups


def parse_subsets(text: str) -> tuple[tuple[str, ...], ...]:
    subsets = tuple(tuple(lab.strip() for lab in s.split(",") if lab.strip())
                    for s in text.split(";") if s.strip())
    if not subsets:
        raise ConfigError("no security subsets given")
    return subsets


def parse_int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc


# -- commands -------------------------------------------------------------------

def _writer(buf):
    return csv.writer(buf, lineterminator="\n")


def cmd_entropies(args) -> tuple[str, int]:
    rho = load_named_state(args.state)
    a, b, e = parse_partition(args.partition)
    rep = entropic.rate_report(rho, a, b, e)
    buf = io.StringIO()
    w = _writer(buf)
    h_cols = ["A", "B", "E", "AB", "AE", "BE", "ABE"]
    w.writerow(["state", "partition"] + [f"H_{c}" for c in h_cols] +
               ["I_A_BE", "I_A_B", "I_A_E", "cqmi", "neg_i3", "rate_quantum_message"])
    w.writerow([args.state, args.partition] + [fmt(rep.entropies[c]) for c in h_cols] +
               [fmt(v) for v in (rep.i_a_be, rep.i_a_b, rep.i_a_e, rep.cqmi, rep.neg_i3,
                                 rep.quantum_message_rate)])
    return buf.getvalue(), EXIT_OK


def _keys_from_args(args) -> tuple[int, ...]:
    return tuple(2 ** k for k in parse_int_list(args.log2k))


def _config(args, **over) -> pad.ProtocolConfig:
    subsets = parse_subsets(args.subsets)
    fields = dict(n=args.n, M=2 ** args.log2m, keys=_keys_from_args(args), trials=args.trials,
                  seed=args.seed, decoder=args.decoder, typical_delta=args.typical_delta,
                  security_subsets=subsets, full_key=args.full_key,
                  compress_delta=args.compress_delta, workers=args.workers)
    fields.update(over)
    return pad.ProtocolConfig(**fields)


def _run(config: pad.ProtocolConfig, rho) -> pad.ProtocolReport:
    if len(config.keys) > 1:
        return pad.simulate_multikey(config, rho)
    return pad.simulate(config, rho)


def cmd_simulate(args) -> tuple[str, int]:
    rho = load_named_state(args.state)
    config = _config(args)
    report = _run(config, rho)
    names = list(report.cqmi)
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(["trial", "m", "k", "success_prob"] + [f"delta_{nm}" for nm in names])
    for t in report.trials:
        M, K = t.success.shape
        for m in range(M):
            for k in range(K):
                w.writerow([t.trial, m, k, fmt(t.success[m, k])] +
                           [fmt(t.deltas[nm][m]) for nm in names])
    w.writerow(["#summary", "trial"] + SIMULATE_SUMMARY)
    for t in report.trials:
        c = t.binding_converse()
        exp = t.expurgation
        w.writerow(["#summary", t.trial] + [fmt(v) for v in (
            t.eps_worst, t.eps_avg, t.delta, report.rate_bits, report.key_rate_bits, c.lhs,
            c.rhs, t.converse_satisfied,
            exp.eps if exp else t.eps_worst, exp.delta if exp else t.delta)])
    return buf.getvalue(), EXIT_OK if report.converse_satisfied else EXIT_INTERNAL


def cmd_sweep(args) -> tuple[str, int]:
    rho = load_named_state(args.state)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("empty sweep list")
    covering = args.D is not None and args.delta_prime is not None
    buf = io.StringIO()
    w = _writer(buf)
    header = ["axis", "value", "n", "M", "K", "rate_bits", "key_rate_bits", "eps_median",
              "eps_min", "eps_max", "delta_median", "delta_min", "delta_max", "converse_ok"]
    if covering:
        header.append("covering_bound")
    w.writerow(header)
    ok = True
    for v in values:
        over = {}
        if args.axis == "K":
            if v == "all":
                over["full_key"] = True
            else:
                over["keys"] = (_positive(v),)
        elif args.axis == "M":
            over["M"] = _positive(v)
        else:
            over["n"] = _positive(v)
        config = _config(args, **over)
        report = _run(config, rho)
        s = report.summary()
        ok &= report.converse_satisfied
        row = [args.axis, v, config.n, config.M, report.K, fmt(report.rate_bits),
               fmt(report.key_rate_bits)] + [fmt(s[k]) for k in header[7:13]] + \
              [fmt(report.converse_satisfied)]
        if covering:
            i_ae = entropic.mutual_information(rho, "A", parse_subsets(args.subsets)[0])
            cb = pad.covering_bound(report.K, config.n, i_ae, args.covering_delta,
                                    args.delta_prime, args.D)
            row.append(fmt(cb.value))
        w.writerow(row)
    return buf.getvalue(), EXIT_OK if ok else EXIT_INTERNAL


def _positive(v: str) -> int:
    try:
        out = int(v)
    except ValueError as exc:
        raise ConfigError(f"sweep value {v!r} is not an integer") from exc
    if out < 1:
        raise ConfigError(f"sweep value {v!r} must be positive")
    return out


def cmd_squash(args) -> tuple[str, int]:
    rho = load_named_state(args.state)
    if len(rho.layout) != 2:
        rho = qcore.partial_trace(rho, [lab.strip() for lab in args.keep.split(",")])
    result = squash.minimize(rho, dims=(args.dim_e, args.dim_g), method=args.method,
                             restarts=args.restarts, iters=args.iters, seed=args.seed)
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(["restart", "iteration", "value", "best_so_far"])
    for r, it, val, best in result.trajectory:
        w.writerow([r, it, fmt(val), fmt(best)])
    w.writerow(["#summary", "best_value", "restarts", "method"])
    w.writerow(["#summary", fmt(result.best_value), result.restarts, args.method])
    return buf.getvalue(), EXIT_OK


def cmd_compress(args) -> tuple[str, int]:
    if args.spectrum:
        try:
            p = np.array([float(v) for v in args.spectrum.split(",")])
        except ValueError as exc:
            raise ConfigError(f"bad spectrum {args.spectrum!r}") from exc
        if np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
            raise ConfigError("spectrum must be a probability vector")
        rho_a = qcore.DensityMatrix(qcore.SystemLayout.of(("A", len(p))), np.diag(p))
    else:
        rho_a = qcore.partial_trace(load_named_state(args.state), args.system)
        rho_a = rho_a.relabel({args.system: "A"})
    phi = qcore.purify(rho_a, "R")
    psi = qcore.tensor_power(phi, args.n)
    res = typesys.schumacher_compress(psi, rho_a, args.n, args.delta,
                                      system=qcore.copy_label("A", args.n))
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(["n", "delta", "entropy_bits", "rank", "qubit_count", "fidelity"])
    w.writerow([args.n, fmt(args.delta), fmt(entropic.entropy(rho_a)), res.rank,
                fmt(res.qubit_count), fmt(res.fidelity)])
    return buf.getvalue(), EXIT_OK


# -- parser -----------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _protocol_flags(p):
    p.add_argument("--state", default="ghz")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--log2m", type=int, default=1)
    p.add_argument("--log2k", default="0", help="comma-separated log2 of each key count")
    p.add_argument("--full-key", action="store_true")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--decoder", choices=pad.protocol.DECODERS, default="pgm_exact")
    p.add_argument("--typical-delta", type=float, default=0.2)
    p.add_argument("--subsets", default="E",
                   help="protected subsets besides A, ';'-separated, labels ','-separated")
    p.add_argument("--compress-delta", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cotp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("entropies", help="entropies and rate quantities of a state")
    p.add_argument("--state", default="ghz")
    p.add_argument("--partition", default="A:B:E")
    p.set_defaults(func=cmd_entropies)

    p = sub.add_parser("simulate", help="run random codes through the protocol")
    _protocol_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="simulate along one parameter axis")
    _protocol_flags(p)
    p.add_argument("--axis", choices=("K", "M", "n"), required=True)
    p.add_argument("--values", required=True, help="comma-separated counts ('all' for K)")
    p.add_argument("--D", type=float, default=None)
    p.add_argument("--delta-prime", type=float, default=None)
    p.add_argument("--covering-delta", type=float, default=0.1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("squash", help="minimise I(A;B|E) over extensions")
    p.add_argument("--state", default="bell")
    p.add_argument("--keep", default="A,B")
    p.add_argument("--dim-e", type=int, default=None)
    p.add_argument("--dim-g", type=int, default=None)
    p.add_argument("--method", choices=squash.METHODS, default="gradient")
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_squash)

    p = sub.add_parser("compress", help="Schumacher compression of A^n")
    p.add_argument("--state", default="ghz")
    p.add_argument("--system", default="A")
    p.add_argument("--spectrum", default=None, help="comma-separated eigenvalues of rho_A")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(func=cmd_compress)

    for action in sub.choices.values():
        action.add_argument("--output", "-o", default=None, help="CSV path (default stdout)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, code = args.func(args)
    except (ConfigError, InvalidState) as exc:
        print(f"cotp: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityExceeded as exc:
        print(f"cotp: capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (CotpError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"cotp: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.buffer.write(text.encode("utf-8"))
        sys.stdout.flush()
    if code == EXIT_INTERNAL:
        print("cotp: converse inequality violated", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
