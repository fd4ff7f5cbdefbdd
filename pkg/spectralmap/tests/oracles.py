"""
Closed-form characteristic functions used as independent references.
"""
import mpmath
import numpy as np


def robin_delta(lam, c, H):
    """Delta of sigma = c, H: the classical problem -y'' = lam y with
    y'(0) = c y(0) and y'(pi) + (H - c) y(pi) = 0, evaluated with mpmath.
    """
    lam = mpmath.mpf(lam)
    if lam == 0:
        S, C = mpmath.pi, mpmath.mpf(1)
    else:
        rho = mpmath.sqrt(mpmath.mpc(lam))
        S = mpmath.re(mpmath.sin(rho * mpmath.pi) / rho)
        C = mpmath.re(mpmath.cos(rho * mpmath.pi))
    return -(lam + c * c) * S + H * (C + c * S)


def robin_roots(c, H, count):
    """The first :param count: zeros of :func:`robin_delta`, bracketed on a
    dense scan and refined with mpmath.findroot.
    """
    zs = np.linspace(-4.0013, count + 0.2013, 4000)
    vals = np.array([float(robin_delta(z * abs(z), c, H)) for z in zs])
    idx = np.nonzero(vals[:-1] * vals[1:] < 0)[0][:count]
    roots = []
    with mpmath.workdps(30):
        for k in idx:
            a, b = zs[k] * abs(zs[k]), zs[k + 1] * abs(zs[k + 1])
            r = mpmath.findroot(lambda l: robin_delta(l, c, H), (a, b),
                                solver='anderson')
            roots.append(float(r))
    return np.array(roots)


def robin_phi(x, lam, c):
    """phi(x) = cos(rho x) + c sin(rho x) / rho for sigma = c."""
    rho = np.sqrt(complex(lam))
    return np.real(np.cos(rho * x) + c * x * np.sinc(rho * x / np.pi))


def step_delta(lam, H=0.0):
    """Delta of the step sigma = 0 on [0, pi/2), 1 on [pi/2, pi], by matching
    the free solutions at pi/2, where y' jumps by y(pi/2).
    """
    lam = complex(lam)
    rho = np.sqrt(lam)
    a = np.pi / 2
    L = np.pi - a

    def S(t):
        return t * np.sinc(rho * t / np.pi)

    y_a = np.cos(rho * a)
    dy_a = -lam * S(a) + y_a
    y_pi = y_a * np.cos(rho * L) + dy_a * S(L)
    dy_pi = -lam * y_a * S(L) + dy_a * np.cos(rho * L)
    # y^[1] = y' - y on the right half.
    return float(np.real(dy_pi - y_pi + H * y_pi))
