"""From a pixel oracle to a point cloud and back.

The Sierpinski triangle is only ever asked "is this pixel near you?".
We rasterize it, extract a certified cloud, rebuild an oracle from the
cloud, and count how often the two oracles disagree.

    python demos/sierpinski_roundtrip.py [n]
"""

import sys

import numpy as np

from compreal.dyadic import Box
from compreal.sets import ifs_attractor, raster, sierpinski
from compreal.weak import cloud_from_oracle, oracle_cloud_generator, oracle_from_cloud

n = int(sys.argv[1]) if len(sys.argv) > 1 else 5
tri = ifs_attractor(sierpinski())
box = Box([(0, 1), (0, 1)])

grid = raster(tri, box, n)
bits = np.asarray(grid.bits)
for row in bits[:: max(1, len(bits) // 32)]:
    print("".join("#" if b else "." for b in row[:: max(1, len(row) // 64)]))

cloud = cloud_from_oracle(tri, box, n)
print(f"\ncloud at n={n}: {len(cloud.coords)} points on the 2^{cloud.exp} grid")

again = oracle_from_cloud(oracle_cloud_generator(tri, box), box)
back = np.asarray(raster(again, box, n).bits)
print("pixels lit:", int(bits.sum()), "original,", int(back.sum()), "round trip;",
      "disagreements:", int((bits != back).sum()))
# disagreements are allowed only where dist(p, S) lies in (2^-n, 2 2^-n]
