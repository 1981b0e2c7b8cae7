"""
Независимые эталоны для тестов: классические B-сплайны (де Бур),
элемент Куранта, mpmath
"""
import mpmath
import numpy as np
from scipy import integrate
from scipy.interpolate import BSpline


def cardinal_bspline(n: int, t):
    """Кардинальный B-сплайн степени n с узлами 0..n+1"""
    t = np.asarray(t, dtype=float)
    if n == 0:
        return ((t >= 0) & (t < 1)).astype(float)
    basis = BSpline.basis_element(np.arange(n + 2, dtype=float), extrapolate=False)
    return np.nan_to_num(basis(t))


def tensor_bspline(degrees, M_diag, y):
    """ℬ для диагональной M и целых степеней: Π_j B_{n_j}(y_j/m_j)/m_j"""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    out = np.ones(y.shape[0])
    for j, (n, m) in enumerate(zip(degrees, M_diag)):
        out = out * cardinal_bspline(n, y[:, j] / m) / m
    return out


def courant_hat(x0, x1):
    """Элемент Куранта: box-сплайн трёхнаправленной сетки с нулевыми степенями"""
    return np.maximum(0.0, np.minimum(np.minimum(1.0, x0), x1) - np.maximum(np.maximum(0.0, x0 - 1.0), x1 - 1.0))


def courant_smoothed(x0: float, x1: float) -> float:
    """∫_0^1 hat(x - u·e_0) du: степени (1, 0, 0) на трёхнаправленной сетке"""
    kinks = {x0 - c for c in (0.0, 1.0, 2.0)} | {x0 - x1 - c for c in (-1.0, 0.0, 1.0)}
    points = sorted(p for p in kinks if 0.0 < p < 1.0)
    value, _ = integrate.quad(lambda u: float(courant_hat(x0 - u, x1)), 0.0, 1.0,
                              points=points or None, epsabs=1e-13, epsrel=1e-12, limit=200)
    return value


def mp_gamma(z) -> complex:
    return complex(mpmath.gamma(mpmath.mpc(z.real, z.imag)))


def mp_binomial(a, k: int) -> complex:
    return complex(mpmath.binomial(mpmath.mpc(a.real, a.imag), k))
