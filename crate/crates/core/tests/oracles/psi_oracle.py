#!/usr/bin/env python3
"""Reference values of the synthetic benchmark field at 50 digits.

psi = 0.1 sin(50x + 2 pi t/T) + atan(-0.1 / (2x - sin(5y + 2 pi t/T)))

Writes ../data/psi_goldens.csv: x,y,t,period,psi
"""

from pathlib import Path

import mpmath as mp

mp.mp.dps = 50

POINTS = [
    (0.25, 0.25, 0.0, 50.0),
    (0.5, 0.5, 0.0, 50.0),
    (0.0, 0.2, 0.0, 50.0),
    (1.0, 1.0, 0.0, 50.0),
    (0.1, 0.9, 12.5, 50.0),
    (0.75, 0.3, 37.0, 50.0),
    (0.33, 0.66, 3.0, 7.0),
    (0.02, 0.01, 1.0, 10.0),
]


def psi(x, y, t, period):
    x, y, t, period = map(mp.mpf, (x, y, t, period))
    phase = 2 * mp.pi * t / period
    den = 2 * x - mp.sin(5 * y + phase)
    return mp.mpf("0.1") * mp.sin(50 * x + phase) + mp.atan(mp.mpf("-0.1") / den)


def main():
    out = Path(__file__).resolve().parent.parent / "data" / "psi_goldens.csv"
    out.parent.mkdir(exist_ok=True)
    with open(out, "w") as fh:
        fh.write("x,y,t,period,psi\n")
        for x, y, t, p in POINTS:
            fh.write(f"{x!r},{y!r},{t!r},{p!r},{mp.nstr(psi(x, y, t, p), 20)}\n")


if __name__ == "__main__":
    main()
