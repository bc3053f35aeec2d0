"""Independent oracles for the frozen reference values in ``frozen_values.json``.

Run ``python tests/oracles.py`` to regenerate the file. Nothing here imports
the package: every value comes from closed forms or from mpmath at 40 digits.
"""

import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40


def central_difference_exp(t=1, h=mp.mpf("1e-3")):
    # metric speed of u_t = e^{-t} from the symmetric difference quotient
    return abs(mp.e ** (-(t + h)) - mp.e ** (-(t - h))) / (2 * h)


def semicircle_chords(n=1001):
    pts = [(mp.cos(mp.pi * k / (n - 1)), mp.sin(mp.pi * k / (n - 1))) for k in range(n)]
    return mp.fsum(mp.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2) for a, b in zip(pts, pts[1:]))


def discrete_entropy(M):
    # midpoint quantiles of N(0,1), entropy -(1/M) sum log(M (q_{j+1} - q_j))
    q = [mp.sqrt(2) * mp.erfinv(2 * (j + mp.mpf(1) / 2) / M - 1) for j in range(M)]
    return -mp.fsum(mp.log(M * (b - a)) for a, b in zip(q, q[1:])) / M


def golden(fn, a, b, iters=200):
    g = (mp.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    for _ in range(iters):
        if fn(c) < fn(d):
            b = d
        else:
            a = c
        c, d = b - g * (b - a), a + g * (b - a)
    return fn((a + b) / 2)


def my_quadratic(tau=1, x=1):
    return golden(lambda y: y * y / 2 + (y - x) ** 2 / (2 * tau), -5, 5)


def my_abs(tau=mp.mpf("0.5"), x=1):
    # piecewise: minimize separately on y <= 0 and y >= 0
    left = golden(lambda y: -y + (y - x) ** 2 / (2 * tau), -5, 0)
    right = golden(lambda y: y + (y - x) ** 2 / (2 * tau), 0, 5)
    return min(left, right)


def ekeland_radius(x, tau, eta):
    # largest offset delta of c = x/(1+tau) + delta keeping
    # Psi(c) <= Psi(z) + eta/2 |x-c| |z-c| for all z; bisection on the
    # limiting condition z -> c of the expanded quadratic inequality
    k = (1 + tau) / (2 * tau)
    ystar = x / (1 + tau)

    def ok(delta):
        D = abs(x - (ystar + delta))
        return 2 * k * delta <= eta * D / 2

    lo, hi = mp.mpf(0), mp.mpf(x)
    for _ in range(200):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


def neg_sqrt_flow(t=1):
    # u' = 1/(2 sqrt u), u(0) = 0: integrate numerically with mpmath odefun
    # started just off the singular point using the exact small-time form
    t0 = mp.mpf("1e-6")
    u_start = (mp.mpf(3) / 4 * t0) ** (mp.mpf(2) / 3)
    sol = mp.odefun(lambda s, u: 1 / (2 * mp.sqrt(u)), t0, u_start)
    return sol(t)


def main():
    tau, x, eta = mp.mpf("0.5"), mp.mpf(1), mp.mpf(1)
    values = {
        "metric_derivative_exp_t1_h1e-3": central_difference_exp(),
        "semicircle_length_1001": semicircle_chords(),
        "entropy_gaussian_continuum": -mp.log(2 * mp.pi * mp.e) / 2,
        "entropy_gaussian_M256": discrete_entropy(256),
        "entropy_gaussian_M2048": discrete_entropy(2048),
        "moreau_yosida_quadratic_tau1_x1": my_quadratic(),
        "moreau_yosida_abs_tau0.5_x1": my_abs(),
        "ekeland_radius_x1_tau0.5_eta1": ekeland_radius(x, tau, eta),
        "neg_sqrt_flow_t1": neg_sqrt_flow(),
        "exp_primitive_-2_1": (1 - mp.e ** -2) / 2,
        "exp_primitive_1_1": mp.e - 1,
    }
    out = {k: float(v) for k, v in values.items()}
    path = Path(__file__).with_name("frozen_values.json")
    path.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    for k, v in out.items():
        print(f"{k}: {v!r}")


if __name__ == "__main__":
    main()
