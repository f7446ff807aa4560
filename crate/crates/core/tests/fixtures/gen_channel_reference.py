"""Regenerates channel_reference.csv with 50-digit arithmetic.

    python3 gen_channel_reference.py > channel_reference.csv
"""
import random

from mpmath import mp, mpf, exp, log10, pi

mp.dps = 50

A, B = mpf("9.61"), mpf("0.16")
D_LOS, D_NLOS = mpf(1), mpf(20)
FC = mpf("2e9")
C = mpf("299792458")

rng = random.Random(20240611)
print("d,theta,p_los,mean_loss")
for _ in range(10000):
    d = rng.uniform(1.0, 10000.0)
    theta = rng.uniform(0.01, 90.0)
    # exact binary values of the doubles
    dm, tm = mpf(d), mpf(theta)
    p = 1 / (1 + A * exp(-B * (tm - A)))
    fs = 20 * log10(4 * pi * FC * dm / C)
    mean = p * (fs + D_LOS) + (1 - p) * (fs + D_NLOS)
    print(f"{d!r},{theta!r},{mp.nstr(p, 25)},{mp.nstr(mean, 25)}")
