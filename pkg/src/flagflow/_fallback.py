"""Pure-numpy twins of the compiled kernels in ``_kernels.pyx``."""
import numpy as np


def eigh(a):
    a = np.asarray(a)
    return np.linalg.eigh(a)


def gradient_field(x, q, values):
    values = np.asarray(values, dtype=float)
    _, v = np.linalg.eigh(x)
    qt = v.conj().T @ q @ v
    weights = np.abs(values[:, None] - values[None, :])
    out = v @ (weights * qt) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def snap_spectrum(x, values):
    values = np.asarray(values, dtype=float)
    w, v = np.linalg.eigh(x)
    out = (v * values) @ v.conj().T
    return 0.5 * (out + out.conj().T), float(np.max(np.abs(w - values)))
