"""Time the numba and pure-numpy variants of each hot kernel side by side.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Both variants are imported directly, so the IFSPOVM_DISABLE_NUMBA flag does
not matter here.  The first numba call (compilation or cache load) is made
before timing starts.
"""
import argparse
import json
import timeit

import numpy as np

from ifspovm import _kernels as K
from ifspovm import fixtures
from ifspovm.geometry import attractor


def cases():
    rng = np.random.default_rng(0)
    cloud = attractor(fixtures.overlap(), 0.6**12).cloud.points
    shifted = cloud + 1e-3
    yield "directed_hausdorff", (cloud, shifted), f"{len(cloud)} x {len(shifted)} points"

    pts = rng.random((4000, 1))
    yield "leader_labels", (pts, 1e-3), "4000 points, radius 1e-3"

    s = rng.standard_normal((96, 96))
    yield "jacobi_eigh", (s + s.T, 1e-15, 100), "96 x 96 symmetric"

    m, n = 120, 140
    a, b = rng.random(m), rng.random(n)
    a, b = a / a.sum(), b / b.sum()
    x, y = rng.random((m, 2)), rng.random((n, 2))
    cost = np.linalg.norm(x[:, None] - y[None], axis=2)
    yield "transport_simplex", (a, b, cost, 1e-13, 200_000), f"{m} x {n} plane transport"


def variants(name):
    if name == "leader_labels":
        return K.leader_labels_nb, K.leader_labels_np
    if name == "jacobi_eigh":
        return K.jacobi_eigh_nb, K.jacobi_eigh_np
    if name == "transport_simplex":
        return K.transport_simplex_nb, K.transport_simplex_np
    return K.directed_hausdorff_nb, K.directed_hausdorff_np


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--json", help="also write the table as JSON")
    args = p.parse_args(argv)
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    rows = []
    print(f"{'kernel':20s} {'size':28s} {'numba s':>10s} {'numpy s':>10s} {'speedup':>8s}")
    for name, call_args, size in cases():
        nb, np_ = variants(name)
        nb(*call_args)  # compile or load from cache
        t_nb = min(timeit.repeat(lambda: nb(*call_args), number=1, repeat=args.repeat))
        t_np = min(timeit.repeat(lambda: np_(*call_args), number=1, repeat=args.repeat))
        rows.append({"kernel": name, "size": size, "numba": t_nb, "numpy": t_np, "speedup": t_np / t_nb})
        print(f"{name:20s} {size:28s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
