"""Euler characteristic as a signed cell count.

Open cells of dimension d count (-1)^d, so closed boxes give 1, open
intervals give -1, and a ring with a hole gives 0.
"""

from hadwiger import GridRegion, SimplicialSet, euler_characteristic, region_boolean

closed = GridRegion.closed_box([0, 0], [3, 3])
hole = GridRegion.open_box([1, 1], [2, 2])
ring = region_boolean(closed, hole, "difference")
interval = GridRegion.open_box([0], [1])
square = SimplicialSet.from_simplices([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2], [0, 2, 3]])

for name, obj in [("closed square", closed), ("ring", ring), ("open interval", interval), ("triangulated square", square)]:
    print(f"chi({name}) = {euler_characteristic(obj)}")
