"""Compiled vs pure-Python conjugation kernels.

Run with ``python3 benchmarks/bench_conjugate.py``. Each row times the
linear-time transform on a 1-D line and on a 2-D grid (row passes) for
both backends and checks they agree.
"""
import argparse
import timeit

import numpy as np

from logcave import _pykernels

try:
    from logcave import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _case(n):
    x = np.linspace(-4.0, 4.0, n)
    u = 0.5 * x**2 + np.abs(x - 0.3)
    y = np.linspace(-6.0, 6.0, n)
    return x, u, y


def _time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[1001, 10001, 100001])
    p.add_argument("--rows", type=int, default=321)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    print(f"{'case':<16}" + "".join(f"{name:>14}" for name, _ in backends) + f"{'speedup':>10}")
    for n in args.sizes:
        x, u, y = _case(n)
        times, vals = [], []
        for _, k in backends:
            times.append(_time(lambda k=k: k.llt_conjugate(x, u, y), args.repeat))
            vals.append(np.asarray(k.llt_conjugate(x, u, y)[0]))
        _report(f"1-D n={n}", times, vals)
    x, u, y = _case(args.rows)
    U = np.ascontiguousarray(np.tile(u, (args.rows, 1)) + np.linspace(0, 1, args.rows)[:, None])
    times, vals = [], []
    for _, k in backends:
        times.append(_time(lambda k=k: k.llt_conjugate_rows(x, U, y), args.repeat))
        vals.append(np.asarray(k.llt_conjugate_rows(x, U, y)[0]))
    _report(f"2-D {args.rows}^2", times, vals)
    if _ckernels is None:
        print("compiled extension not available; only the fallback was timed")


def _report(label, times, vals):
    row = f"{label:<16}" + "".join(f"{t * 1e3:>12.2f}ms" for t in times)
    if len(times) == 2:
        assert np.allclose(vals[0], vals[1], rtol=0, atol=1e-12), "backends disagree"
        row += f"{times[0] / times[1]:>9.1f}x"
    print(row)


if __name__ == "__main__":
    main()
