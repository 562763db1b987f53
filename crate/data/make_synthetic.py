"""Generates synthetic_male.csv: a Heligman-Pollard male mortality curve on
ages 0..100 with binomial noise, exposures shaped like a regional male
population (including a birth-cohort dip at ages 60-62)."""
import numpy as np

rng = np.random.default_rng(2008)
age = np.arange(101)
A, B, C, D, E, F, G, H = 6e-4, 0.02, 0.12, 7e-4, 12.0, 20.0, 4e-5, 1.105
x = np.maximum(age, 0.5)
odds = A ** ((age + B) ** C) + D * np.exp(-E * (np.log(x) - np.log(F)) ** 2) + G * H ** age
q = odds / (1 + odds)

ex = 26000 * np.exp(-((age / 88.0) ** 5)) * (1 - 0.002 * age)
ex[60:63] *= 0.6
ex = np.maximum(np.round(ex), 120).astype(int)

deaths = rng.binomial(ex, q)
assert (deaths > 0).all() and (deaths < ex).all()
with open("synthetic_male.csv", "w") as f:
    f.write("age,qx,ex\n")
    for a, d, e in zip(age, deaths, ex):
        f.write(f"{a},{d / e:.8g},{e}\n")
