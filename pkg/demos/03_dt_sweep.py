"""
Choosing the filter window without ground truth
===============================================

Sweep the filter window, measure the scaling exponent of what the filter
calls noise, and take the smallest window at which that noise looks random
(alpha within epsilon of 0.5). The ground truth is only used afterwards to
show what the choice costs and gains.
"""

from evdfa import Scene, make_scene, select_optimal_dt, sweep
from evdfa.analysis import plot_data

scene = make_scene(Scene())
table = sweep(scene, [500, 1000, 2000, 4000, 8000, 16000], truth=scene.labels)

for r in table.rows:
    print(f"dt={r.dt:>6}  snr={r.metrics.snr_db:6.2f} dB  "
          f"alpha_noise={r.alpha_noise.alpha:.3f}  alpha_clean={r.alpha_clean.alpha:.3f}  "
          f"recall={r.confusion.recall:.3f}  {r.wall_time:.0f} ms")

choice = select_optimal_dt(table, epsilon=0.02)
print(choice.rationale)

# %%
# Columns for a summary figure: dt, SNR in dB and both exponents.

print(plot_data(table, "sweep-summary")["summary"])
