"""Compiled vs pure-Python monomial kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Times ``conjugate`` and ``accumulate`` for the operator sizes the protocol
engine produces (``A^n`` of dimension ``dim`` tensored with ``rest``), then
one full PGM success evaluation with each backend so the kernel share of
the end-to-end cost is visible.
"""
import argparse
import importlib
import timeit

import numpy as np

from cotp.kernels import _fallback
from cotp.pad import decoding

try:
    compiled = importlib.import_module("cotp.kernels._monomial")
except ImportError:
    compiled = None

SIZES = [(8, 8), (16, 16), (64, 4), (32, 16)]   # (dim A^n, rest)


def case(dim, rest, count, seed=0):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim * rest,) * 2) + 1j * rng.normal(size=(dim * rest,) * 2)
    rho = (g @ g.conj().T).astype(complex)
    perms = np.array([rng.permutation(dim) for _ in range(count)], dtype=np.int64)
    phases = np.exp(2j * np.pi * rng.random((count, dim)))
    return rho, perms, phases


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def pgm_with(backend, rho, perms, phases, rest):
    saved = decoding.kernels.conjugate, decoding.kernels.accumulate
    decoding.kernels.conjugate, decoding.kernels.accumulate = backend.conjugate, backend.accumulate
    try:
        return decoding.pgm_success_monomial(rho, perms, phases, rest)
    finally:
        decoding.kernels.conjugate, decoding.kernels.accumulate = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--count", type=int, default=16, help="code states per accumulate call")
    args = ap.parse_args()
    if compiled is None:
        print("compiled extension not built; only the python backend is available")
    backends = [("python", _fallback)] + ([("compiled", compiled)] if compiled else [])
    print(f"{'D':>6} {'op':>10} " + " ".join(f"{name:>12}" for name, _ in backends) + "  speedup")
    for dim, rest in SIZES:
        rho, perms, phases = case(dim, rest, args.count)
        out = np.zeros_like(rho)
        rows = {
            "conjugate": lambda b: b.conjugate(rho, perms[0], phases[0], rest),
            "accumulate": lambda b: b.accumulate(out, rho, perms, phases, rest),
            "pgm": lambda b: pgm_with(b, rho, perms, phases, rest),
        }
        for op, call in rows.items():
            times = [best(lambda b=b: call(b), args.repeat) for _, b in backends]
            speed = f"{times[0] / times[1]:7.1f}x" if len(times) > 1 else ""
            print(f"{dim * rest:>6} {op:>10} " + " ".join(f"{t * 1e3:10.3f}ms" for t in times)
                  + f"  {speed}")


if __name__ == "__main__":
    main()
