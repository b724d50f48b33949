"""Independent reference computations used by the tests.

Nothing here calls into the package's spectral machinery except where noted;
each oracle is a direct evaluation of a closed form or a brute-force sum.
"""

import math

import numpy as np


def series_sum(n_terms: int) -> float:
    """``sum_{|k| <= n} <k>^-4`` by direct compensated summation."""
    return math.fsum((1.0 + k * k) ** -2 for k in range(-n_terms, n_terms + 1))


def series_closed_form() -> float:
    """``sum_{k in Z} (1 + k^2)^-2 = (pi/2) coth(pi) + (pi^2/2) csch^2(pi)``."""
    return 0.5 * math.pi / math.tanh(math.pi) + 0.5 * math.pi**2 / math.sinh(math.pi) ** 2


def free_gaussian(X, Y, t):
    """``e^{it Laplacian} e^{-|x|^2/2}`` on the plane."""
    s = 1.0 + 2j * t
    return np.exp(-(X**2 + Y**2) / (2.0 * s)) / s


def free_gaussian_periodic(X, Y, t, L, images=4):
    """Free Gaussian summed over the periodic images ``x + 2 L m``."""
    out = np.zeros(np.broadcast(X, Y).shape, dtype=complex)
    for mx in range(-images, images + 1):
        for my in range(-images, images + 1):
            out += free_gaussian(X + 2 * L * mx, Y + 2 * L * my, t)
    return out


def spectral_gradient(f, L):
    """Gradient of a periodic field on ``[-L, L)^2`` with plain numpy FFTs."""
    N = f.shape[-1]
    k = np.fft.fftfreq(N, d=2.0 * L / N) * 2.0 * np.pi
    KX, KY = np.meshgrid(k, k, indexing="ij")
    fh = np.fft.fft2(f)
    return np.fft.ifft2(1j * KX * fh), np.fft.ifft2(1j * KY * fh)


def morawetz_direct(data, L):
    """``sum_x sum_y rho(y) (x-y)/|x-y| . p(x) dx^4`` by the O(N^4) double loop.

    ``data`` has shape ``(modes, N, N)``; pairs with ``x = y`` contribute 0.
    """
    N = data.shape[-1]
    dx = 2.0 * L / N
    x = -L + dx * np.arange(N)
    X, Y = np.meshgrid(x, x, indexing="ij")
    rho = np.sum(np.abs(data) ** 2, axis=0).ravel()
    px = np.zeros((N, N))
    py = np.zeros((N, N))
    for w in data:
        gx, gy = spectral_gradient(w, L)
        px += np.imag(np.conj(w) * gx)
        py += np.imag(np.conj(w) * gy)
    xs, ys = X.ravel(), Y.ravel()
    px, py = px.ravel(), py.ravel()
    total = []
    for a in range(N * N):
        dxv = xs[a] - xs
        dyv = ys[a] - ys
        r = np.hypot(dxv, dyv)
        r[a] = 1.0
        k = (px[a] * dxv + py[a] * dyv) / r
        k[a] = 0.0
        total.append(math.fsum(rho * k))
    return math.fsum(total) * dx**4


def strichartz_free_l4(width, t):
    """``||e^{it Laplacian} e^{-|x|^2/(2 w^2)}||^4_{L^4}`` on the plane."""
    s2 = width**4 + 4.0 * t * t
    return math.pi * width**6 / (2.0 * s2)
