"""High-precision reference for the exponential field p = 1, q = e^{2x}.

With t = e^x the equation -u'' - e^{2x} u = z u becomes Bessel's equation
of order nu = i sqrt(z), and the solution with a e^{i Xi} asymptotics
(a = e^{-x/2}, Xi = e^x - 1) is

    f_z(x) = sqrt(pi/2) exp(i (nu pi/2 + pi/4 - 1)) H^(1)_nu(e^x).

Evaluated with mpmath at 30 digits; written without importing lcspec.
"""

import mpmath

SAMPLE_X = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.5]


def jost_reference(z, x):
    with mpmath.workdps(30):
        z = mpmath.mpc(z)
        nu = 1j * mpmath.sqrt(z)
        pref = mpmath.sqrt(mpmath.pi / 2) * mpmath.exp(1j * (nu * mpmath.pi / 2 + mpmath.pi / 4 - 1))
        t = mpmath.exp(mpmath.mpf(x))
        f = pref * mpmath.hankel1(nu, t)
        # derivative in x: d/dx H_nu(e^x) = e^x H_nu'(e^x)
        df = pref * t * mpmath.diff(lambda s: mpmath.hankel1(nu, s), t)
        return complex(f), complex(df)


def table(zs=(1, 1j)):
    return {str(complex(z)): [(x,) + jost_reference(z, x) for x in SAMPLE_X] for z in zs}


if __name__ == "__main__":
    for key, rows in table().items():
        print(key)
        for r in rows:
            print("   ", repr(r))
