"""
Viewport queries: points, labels, and a summary
===============================================

The map is explored through viewport queries, the same operations the
HTTP API exposes. A viewport is a bbox in layout coordinates plus an
optional time window; everything here answers against a DatasetView.
"""

from demo_corpus import ensure_dataset

from tracemap.mapview import Bbox
from tracemap.store import DatasetView

dataset, config = ensure_dataset()
view = DatasetView(dataset)

extent = view.full_extent()
print(f"full extent: {extent}")

# Zoom into the lower-left quadrant.
quadrant = Bbox(extent.minx, extent.miny,
                (extent.minx + extent.maxx) / 2,
                (extent.miny + extent.maxy) / 2)
rows = view.visible_rows(quadrant)
print(f"\nlower-left quadrant holds {len(rows)} of {len(view.events)} events")
for i in rows[:5]:
    e = view.events[int(i)]
    x, y = view.positions[int(i)]
    print(f"  ({x:6.2f}, {y:6.2f})  {e.title}")

# Labels are placed greedily by topic rank; boxes that would overlap an
# already placed label are dropped. Higher zoom admits deeper topics and
# shrinks the boxes, so more fit.
for zoom in (0, 1, 2):
    placed = view.labels_for(extent, zoom)
    print(f"\nzoom {zoom}: {len(placed)} labels placed")
    for p in placed[:4]:
        print(f"  {p.label:24s} anchor ({p.anchor[0]:.2f}, {p.anchor[1]:.2f})")

# The one-paragraph summary samples visible events deterministically
# (fixed seed, stable order) and reports the dominant topics.
text = view.summary_for(quadrant, window=None, seed=7)
print(f"\nsummary of the quadrant:\n  {text}")

# Density contours for the whole map: five quantile levels by default.
levels, rings = view.contours_for()
print(f"\ncontours at {len(levels)} levels:",
      ", ".join(str(len(r)) for r in rings), "polylines per level")

# Every point can be looked up by event id, which is how the UI sidebar
# resolves a click.
first = view.events[0]
detail = view.point_detail(first.event_id)
print(f"\npoint detail for {first.event_id}: "
      f"{detail['title']!r} kind={detail['kind']}")
