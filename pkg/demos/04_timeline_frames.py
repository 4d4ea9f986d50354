"""
Watching a history accumulate month by month
============================================

The timeline animation is a sequence of cumulative windows, one per
month, all starting at the month of the first event. Filtering the map
by each window shows the footprint growing.
"""

from demo_corpus import ensure_dataset

from tracemap.store import DatasetView

dataset, config = ensure_dataset()
view = DatasetView(dataset)

frames = view.frames(step="month")
print(f"{len(frames)} monthly frames from "
      f"{frames[0].start:%Y-%m} to {frames[-1].end:%Y-%m}")

# Every frame shares the same start; only the end advances. That makes
# the animation cumulative: month 10 contains everything month 9 did.
assert all(f.start == frames[0].start for f in frames)

print("\n  frame        events  bar")
step = max(1, len(frames) // 12)
for i in range(0, len(frames), step):
    window = frames[i]
    count = len(view.visible_rows(window=window))
    print(f"  {window.end:%Y-%m}  {count:8d}  {'#' * (count // 5)}")

# Density is recomputed per window and memoized, so scrubbing back and
# forth in a UI only pays for each month once.
mid = frames[len(frames) // 2]
grid = view.density_for(mid)
print(f"\ndensity at {mid.end:%Y-%m}: {grid.resolution}x{grid.resolution} grid, "
      f"mass {grid.total_mass():.1f} "
      f"(= events seen so far, up to kernel truncation)")

full = view.density_for()
print(f"density at the end:        mass {full.total_mass():.1f}")
