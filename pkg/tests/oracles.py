"""Independent numerical oracles used by the tests.

Nothing here calls the symbolic bracket or Laplacian; everything is sampled on a
grid and differentiated with an 8th-order centered periodic stencil.
"""
import math

import numpy as np

# 8th-order centered first and second derivative weights for offsets 1..4
D1 = np.array([4 / 5, -1 / 5, 4 / 105, -1 / 280])
D2_CENTER = -205 / 72
D2 = np.array([8 / 5, -1 / 5, 8 / 315, -1 / 560])


def grid(N=256):
    x = 2 * np.pi * np.arange(N) / N
    return np.meshgrid(x, x, indexing="ij")


def fd_d1(values, axis, h):
    out = np.zeros_like(values)
    for k, w in enumerate(D1, start=1):
        out += w * (np.roll(values, -k, axis=axis) - np.roll(values, k, axis=axis))
    return out / h


def fd_d2(values, axis, h):
    out = D2_CENTER * values
    for k, w in enumerate(D2, start=1):
        out = out + w * (np.roll(values, -k, axis=axis) + np.roll(values, k, axis=axis))
    return out / (h * h)


def fd_bracket(f_vals, h_vals, N):
    """f_y h_x - f_x h_y from samples."""
    step = 2 * np.pi / N
    fx, fy = fd_d1(f_vals, 0, step), fd_d1(f_vals, 1, step)
    hx, hy = fd_d1(h_vals, 0, step), fd_d1(h_vals, 1, step)
    return fy * hx - fx * hy


def fd_laplacian(values, N):
    """Delta = -(d_xx + d_yy) from samples."""
    step = 2 * np.pi / N
    return -(fd_d2(values, 0, step) + fd_d2(values, 1, step))


def riemann(values):
    N = values.shape[0]
    return float(values.sum() * (2 * np.pi) ** 2 / (N * N))


def direct_dft(values, n, m):
    """Amplitude of exp(i(nx+my)) by explicit summation."""
    N = values.shape[0]
    X, Y = grid(N)
    return complex(np.sum(values * np.exp(-1j * (n * X + m * Y))) / (N * N))


def ylm_reference(l, m, z, phi):
    """Y_lm from scipy's associated Legendre functions with the Condon-Shortley phase removed."""
    from scipy.special import lpmv

    a = abs(m)
    norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.factorial(l - a) / math.factorial(l + a))
    y = (-1) ** a * norm * lpmv(a, l, z) * np.exp(1j * a * phi)
    if m < 0:
        # conj(Y_{l,|m|}) = (-1)^{|m|} Y_{l,-|m|}
        y = (-1) ** a * np.conj(y)
    return y
