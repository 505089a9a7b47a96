"""
How the two tip-selection strategies shape the tangle
=====================================================

Attach a few thousand transactions under each strategy and compare tip
counts, confirmation and the spread of cumulative weights.
"""
import numpy as np

from deamarket import H, Ledger, UniformTips, WeightedWalk

addr = H(b"demo")
for name, selector in [("uniform", UniformTips()), ("weighted", WeightedWalk(alpha=0.01))]:
    # latency 4: a new transaction only sees what was inserted 4 steps ago
    led = Ledger(difficulty=6, tip_selector=selector, seed=3, latency=4, milestone_interval=50)
    for _ in range(2000):
        led.attach(["DEMO"], addr)
    stats = led.stats()
    sample = list(led.transactions)[::100]
    weights = np.array([led.cumulative_weight(h) for h in sample])
    print(f"{name:>8}: {stats['transactions']} txs, {stats['tips']} tips, "
          f"{stats['confirmed_fraction']:.3f} confirmed, weight quartiles {np.percentile(weights, [25, 50, 75])}")
