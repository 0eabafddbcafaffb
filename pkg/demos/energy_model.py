"""
Annual energy and carbon accounting for stored images
======================================================

Walks the storage-power model over a small photo collection and a
fleet-scale projection.
"""

from greenstore.energy import projection, savings_report

MB = 2**20

# A 428 MB photo collection archived down to 38.7 MB.  The model charges
# a constant power draw per terabyte held on disk for a full year.
# 1e-3 kWh is one watt-hour, a convenient scale at collection size.
for arch in ("distributed", "centralized"):
    rep = savings_report(428 * MB, 38.7 * MB, architecture=arch)
    print(f"{arch:>12}: {rep.initial_kwh * 1e3:8.4f} Wh -> {rep.final_kwh * 1e3:7.4f} Wh, "
          f"saves {rep.savings_kwh * 1e3:.4f} Wh/yr and {rep.carbon_saved_g:.3f} g CO2/yr")

# Desk-side disks draw 2.55 W per terabyte; data-centre storage charges
# 11.55 W per terabyte once cooling and redundancy are counted, so the
# same shrink saves about 4.5x the energy there.
d = savings_report(428 * MB, 38.7 * MB, architecture="distributed")
c = savings_report(428 * MB, 38.7 * MB, architecture="centralized")
print(f"centralized/distributed savings ratio: {c.savings_kwh / d.savings_kwh:.4f}")

# What if a 10 TB archive shrinks by 70 percent?
p = projection(10.0, 0.70)
print(f"10 TB at 70% compression saves {p.savings_kwh_distributed:.3f} kWh/yr "
      f"({p.carbon_saved_kg_distributed:.3f} kg CO2/yr) on desk-side storage")
print(f"and {p.savings_kwh_centralized:.3f} kWh/yr "
      f"({p.carbon_saved_kg_centralized:.3f} kg CO2/yr) in a data centre")

# A greener grid shrinks the carbon line but not the energy line.
greener = projection(10.0, 0.70, carbon_g_per_kwh=120.0)
print(f"same projection on a 120 g/kWh grid: "
      f"{greener.carbon_saved_kg_centralized:.3f} kg CO2/yr centralized")
