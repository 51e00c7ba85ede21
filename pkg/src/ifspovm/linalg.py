"""Hermitian eigen-decomposition and derived helpers.

Everything routes through the cyclic Jacobi kernel.  Complex Hermitian input
is realified to the symmetric block matrix [[Re, -Im], [Im, Re]], whose
spectrum is that of the original with every eigenvalue doubled.
"""
import numpy as np

from . import _kernels

JACOBI_TOL = 1e-15
MAX_SWEEPS = 100


def eigh(h, tol=JACOBI_TOL, max_sweeps=MAX_SWEEPS):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("eigh needs a square matrix")
    n = h.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    if np.iscomplexobj(h) and np.any(h.imag != 0.0):
        re = 0.5 * (h.real + h.real.T)
        im = 0.5 * (h.imag - h.imag.T)
        big = np.block([[re, -im], [im, re]])
        w, v, _ = _kernels.jacobi_eigh_raw(np.ascontiguousarray(big), tol, max_sweeps)
        order = np.argsort(w, kind="stable")
        w, v = w[order], v[:, order]
        # pairs of equal eigenvalues; recover one complex vector per pair by
        # Gram-Schmidt on u + i*w candidates
        cand = v[:n] + 1j * v[n:]
        vals, vecs = [], []
        for k in range(2 * n):
            c = cand[:, k].copy()
            for q in vecs:
                c -= q * np.vdot(q, c)
            nrm = np.linalg.norm(c)
            if nrm > 1e-6:
                vecs.append(c / nrm)
                vals.append(w[k])
            if len(vecs) == n:
                break
        return np.asarray(vals), np.stack(vecs, axis=1)
    a = np.ascontiguousarray(0.5 * (h.real + h.real.T), dtype=float)
    w, v, _ = _kernels.jacobi_eigh_raw(a, tol, max_sweeps)
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def eigvalsh(h):
    return eigh(h)[0]


def spectral_norm(a):
    """Largest singular value of a real or complex matrix."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    g = a.conj().T @ a if a.shape[0] >= a.shape[1] else a @ a.conj().T
    lam = eigvalsh(g)
    return float(np.sqrt(max(lam[-1], 0.0)))


def psd_power(h, power):
    """h**power for a positive definite Hermitian h."""
    w, v = eigh(h)
    if w[0] <= 0.0:
        raise ValueError("matrix is not positive definite")
    return (v * w ** power) @ v.conj().T


def min_eig(h):
    return float(eigvalsh(h)[0])
