"""Plain-text artifacts: CSV point clouds and measures, JSON tables, dense operators."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import DomainError
from .measures import DiscreteMeasure
from .symbolic import render

FLOAT_FMT = "%.17g"
COORDS = ("x", "y")


def _fmt(x):
    return FLOAT_FMT % x


def write_points_csv(path, points):
    pts = np.asarray(points, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COORDS[: pts.shape[1]])
        for p in pts:
            w.writerow([_fmt(v) for v in p])


def read_points_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)


def write_measure_csv(path, mu: DiscreteMeasure):
    """Columns: coordinates, weight, then '|'-separated word labels (may be empty)."""
    d = mu.dimension
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(COORDS[:d]) + ["weight", "words"])
        for k in range(len(mu)):
            words = "" if mu.provenance is None else "|".join(render(x) for x in mu.provenance[k])
            w.writerow([_fmt(v) for v in mu.atoms[k]] + [_fmt(mu.weights[k]), words])


def read_measure_csv(path) -> DiscreteMeasure:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or "weight" not in rows[0]:
        raise DomainError(f"{path}: missing header with a 'weight' column")
    head = rows[0]
    wcol = head.index("weight")
    body = [r for r in rows[1:] if r]
    if not body:
        raise DomainError(f"{path}: no atoms")
    atoms = np.array([[float(v) for v in r[:wcol]] for r in body])
    weights = np.array([float(r[wcol]) for r in body])
    prov = None
    if "words" in head:
        col = head.index("words")
        labels = [r[col] if col < len(r) else "" for r in body]
        if all(labels):
            prov = [tuple(tuple(int(c) for c in s) for s in lab.split("|")) for lab in labels]
    return DiscreteMeasure(atoms, weights, prov)


def dump_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def povm_to_json(table):
    """Partition edges, then per cell the row-major [re, im] pairs."""
    vals = np.asarray(table.values)
    cells = []
    for v in vals:
        flat = v.reshape(-1)
        cells.append([[float(np.real(z)), float(np.imag(z))] for z in flat])
    return {
        "edges": [float(e) for e in table.partition.edges],
        "dim": int(vals.shape[1]),
        "weights": [float(w) for w in table.space.weights],
        "cells": cells,
    }


def write_convergence_csv(path, result):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "res_lower", "res_upper", "min_eig", "sum_defect"])
        for it, lo, up, me, sd in result.rows():
            w.writerow([it, _fmt(lo), _fmt(up), _fmt(me), _fmt(sd)])


def write_operator_text(path, op):
    """Header with dimensions and both weight vectors, then dense rows of re im pairs."""
    m = np.asarray(op.entries, dtype=complex)
    lines = [
        "%%ifspovm-operator dense complex",
        f"{m.shape[0]} {m.shape[1]}",
        "codomain_weights " + " ".join(_fmt(x) for x in op.codomain.weights),
        "domain_weights " + " ".join(_fmt(x) for x in op.domain.weights),
    ]
    for row in m:
        lines.append(" ".join(f"{_fmt(z.real)} {_fmt(z.imag)}" for z in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_operator_text(path):
    from .operators import HilbertSpace, MatrixOperator

    lines = Path(path).read_text().splitlines()
    rows, cols = (int(t) for t in lines[1].split())
    cw = np.array([float(t) for t in lines[2].split()[1:]])
    dw = np.array([float(t) for t in lines[3].split()[1:]])
    vals = np.array([[float(t) for t in ln.split()] for ln in lines[4 : 4 + rows]])
    m = vals[:, 0::2] + 1j * vals[:, 1::2]
    if m.shape != (rows, cols):
        raise DomainError(f"{path}: body does not match the header dimensions")
    return MatrixOperator(m, HilbertSpace(dw), HilbertSpace(cw))
