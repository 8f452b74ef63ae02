#!/usr/bin/env python3
"""Convert the Natural Earth 1:110m admin-0 country shapefile into the
boundary file read by encyclink::geo::BoundarySet.

Natural Earth data is in the public domain. The low-resolution shapefile is
the one bundled with geopandas < 1.0 (geopandas/datasets/naturalearth_lowres).

usage: make_boundaries.py <naturalearth_lowres.shp> <out.json>
"""
import json
import sys

import pycountry
import shapefile
from shapely.geometry import shape

# ISO alpha-3 codes that pycountry does not know, or that Natural Earth marks -99.
OVERRIDES = {
    "Kosovo": "XK",
    "N. Cyprus": "XN",
    "Somaliland": "XS",
}


def alpha2(iso_a3, name):
    if name in OVERRIDES:
        return OVERRIDES[name]
    c = pycountry.countries.get(alpha_3=iso_a3)
    if c is None:
        raise SystemExit(f"no alpha-2 for {iso_a3} ({name})")
    return c.alpha_2


def main():
    src, out = sys.argv[1], sys.argv[2]
    reader = shapefile.Reader(src)
    countries = []
    for sr in reader.shapeRecords():
        rec = sr.record
        geom = shape(sr.shape.__geo_interface__)
        c = geom.centroid
        parts = list(sr.shape.parts) + [len(sr.shape.points)]
        rings = []
        for a, b in zip(parts[:-1], parts[1:]):
            rings.append([[round(x, 6), round(y, 6)] for x, y in sr.shape.points[a:b]])
        countries.append({
            "code": alpha2(rec["iso_a3"], rec["name"]),
            "name": rec["name"],
            "continent": rec["continent"],
            "centroid": [round(c.y, 6), round(c.x, 6)],
            "rings": rings,
        })
    countries.sort(key=lambda c: c["code"])
    doc = {
        "format": "encyclink-boundaries",
        "version": 1,
        "source": "Natural Earth 1:110m Admin 0 Countries (public domain), via geopandas naturalearth_lowres",
        "coordinate_order": "rings are [lon, lat]; centroid is [lat, lon]",
        "countries": countries,
    }
    with open(out, "w", encoding="utf-8") as f:
        json.dump(doc, f, ensure_ascii=False, separators=(",", ":"))
        f.write("\n")


if __name__ == "__main__":
    main()
