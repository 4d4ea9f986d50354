"""
Exporting the map as a static picture
=====================================

The SVG export is the whole map in one self-contained file: density
contours underneath, points colored by interaction kind, and the
broadest topic labels on top. The JSON export carries the same content
for other tools.
"""

import json
import os

from demo_corpus import HERE, ensure_dataset

from tracemap.cli import export_obj, render_svg
from tracemap.events import KIND_STYLES
from tracemap.store import DatasetView

dataset, config = ensure_dataset()
view = DatasetView(dataset)

svg = render_svg(view)
out_svg = os.path.join(HERE, "demo_data", "map.svg")
with open(out_svg, "w", encoding="utf-8") as fh:
    fh.write(svg)
print(f"wrote {out_svg} ({len(svg) / 1024:.0f} KiB)")

# The kind colors are fixed across every surface (SVG, API, UI) so a
# pink dot always means a plain watch.
print("\nkind colors:")
for kind, style in KIND_STYLES.items():
    marker = "present" if any(e.kind is kind for e in dataset.events) else "-"
    print(f"  {kind.value:21s} {style.color_hex}  {marker}")

# The JSON artifact: manifest, every point with title and timestamp,
# contour polylines, and the zoom-0 labels.
obj = export_obj(view)
out_json = os.path.join(HERE, "demo_data", "map.json")
with open(out_json, "w", encoding="utf-8") as fh:
    json.dump(obj, fh)
print(f"\nwrote {out_json}: {len(obj['points'])} points, "
      f"{len(obj['contours']['levels'])} contour levels, "
      f"{len(obj['labels'])} labels")

# Both artifacts are also available from the command line:
#   tracemap export --config <cfg> --dataset <id> --format svg --output map.svg
