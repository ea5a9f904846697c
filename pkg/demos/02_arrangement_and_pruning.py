"""Build an arrangement from detected lines and prune it to rooms.

Shows the two-stage region story: the raw arrangement over-decomposes
the plan because detected lines are unbounded, then distance-map
pruning merges everything that is not separated by a wall or doorway.
Writes before/after face renderings to demo_out/.
"""

from pathlib import Path

from mapalign.arrangement import build_arrangement, prune, serialize_arrangement
from mapalign.config import PipelineConfig
from mapalign.pipeline import interpret_map
from mapalign.render import render_faces
from mapalign.synthetic import nested_plan, save_pgm

OUT = Path(__file__).parent / "demo_out"
OUT.mkdir(exist_ok=True)

# nested splits: one wall spans only half the building, so its detected
# (infinite) line cuts through rooms it has no business cutting
image, rooms = nested_plan(seed=9, size=300)
path = OUT / "nested.pgm"
save_pgm(image, path)

interp = interpret_map(path, PipelineConfig())
pre = interp.arrangement_pre
post = interp.arrangement

print(f"ground truth rooms: {len(rooms)}")
print(f"arrangement before pruning: {len(pre.faces)} faces "
      f"({len(pre.prime.vertices)} vertices, {len(pre.prime.edges)} edges)")
print(f"after pruning:              {len(post.faces)} faces "
      f"({len(post.prime.vertices)} vertices, {len(post.prime.edges)} edges)")

for i, face in enumerate(post.faces):
    print(f"  region {i}: area {face.area:8.0f} px^2, center ({face.centroid[0]:.0f}, {face.centroid[1]:.0f})")

render_faces(pre, OUT / "faces_before.png")
render_faces(post, OUT / "faces_after.png")
(OUT / "arrangement.txt").write_text(serialize_arrangement(post))
print(f"\nwrote {OUT / 'faces_before.png'}, {OUT / 'faces_after.png'}, {OUT / 'arrangement.txt'}")
