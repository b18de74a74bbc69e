"""
Even split versus MI-maximizing allocation
==========================================

Two ways to divide a rendering budget: hand everyone the same share, or
water-fill so that users whose channel converts rendering into more MI
get more of it.
"""

from slicing4meta.qoe import QoEParams, UserSession, even_allocation, mi_max_allocation, total_mi
from slicing4meta.rng import Rng

params = QoEParams()
rng = Rng(7)
users = [
    UserSession.create(f"u{i}", rate=rng.choice([50, 100, 200, 400]), bep=0.001,
                       n_objects=rng.randint(1, 56), params=params)
    for i in range(12)
]
budget = 1500.0

even = even_allocation(budget, users)
best = mi_max_allocation(budget, users, params)

print(f"{'user':>5} {'rate':>5} {'demand':>7} {'even':>8} {'mimax':>8}")
for u, e, b in zip(users, even, best):
    print(f"{u.id:>5} {u.rate:5.0f} {u.demand:7.0f} {e:8.1f} {b:8.1f}")

# Even allocation wastes capacity on users already past their demand; the
# optimizer moves it to users still below theirs.
print(f"total MI  even={total_mi(users, even, params):.4f}  mimax={total_mi(users, best, params):.4f}")
