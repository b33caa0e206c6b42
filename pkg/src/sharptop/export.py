"""File outputs: atomic writes, VTK legacy grids, OBJ interfaces, CSV logs."""

import csv
import io
import json
import os
import tempfile

import numpy as np


def atomic_write_text(path, text):
    """Write via temp file + rename so interrupted runs leave no torn files."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp_", text=True)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    atomic_write_text(path, buf.getvalue())


def write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_vtk_unstructured(path, points, tets, cell_data=None,
                           point_data=None, title="sharptop grid"):
    """VTK legacy ASCII 3.0 unstructured grid of tetrahedra."""
    points = np.asarray(points, float)
    tets = np.asarray(tets, int)
    out = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {len(points)} double",
    ]
    out += ["%.17g %.17g %.17g" % tuple(p) for p in points]
    out.append(f"CELLS {len(tets)} {5 * len(tets)}")
    out += ["4 %d %d %d %d" % tuple(t) for t in tets]
    out.append(f"CELL_TYPES {len(tets)}")
    out += ["10"] * len(tets)
    if cell_data:
        out.append(f"CELL_DATA {len(tets)}")
        for name, values in cell_data.items():
            out.append(f"SCALARS {name} double 1")
            out.append("LOOKUP_TABLE default")
            out += ["%.17g" % v for v in np.asarray(values, float)]
    if point_data:
        out.append(f"POINT_DATA {len(points)}")
        for name, values in point_data.items():
            out.append(f"SCALARS {name} double 1")
            out.append("LOOKUP_TABLE default")
            out += ["%.17g" % v for v in np.asarray(values, float)]
    atomic_write_text(path, "\n".join(out) + "\n")


def write_vtk_surface(path, vertices, faces, point_data=None,
                      title="sharptop interface"):
    """VTK legacy ASCII triangle surface with per-vertex scalars."""
    vertices = np.asarray(vertices, float)
    faces = np.asarray(faces, int)
    out = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {len(vertices)} double",
    ]
    out += ["%.17g %.17g %.17g" % tuple(p) for p in vertices]
    out.append(f"CELLS {len(faces)} {4 * len(faces)}")
    out += ["3 %d %d %d" % tuple(f) for f in faces]
    out.append(f"CELL_TYPES {len(faces)}")
    out += ["5"] * len(faces)
    if point_data:
        out.append(f"POINT_DATA {len(vertices)}")
        for name, values in point_data.items():
            out.append(f"SCALARS {name} double 1")
            out.append("LOOKUP_TABLE default")
            out += ["%.17g" % v for v in np.asarray(values, float)]
    atomic_write_text(path, "\n".join(out) + "\n")


def write_obj(path, vertices, faces, face_normals=None):
    """Wavefront OBJ triangle mesh; one normal per face when given."""
    vertices = np.asarray(vertices, float)
    faces = np.asarray(faces, int)
    out = []
    for v in vertices:
        out.append("v %.17g %.17g %.17g" % tuple(v))
    if face_normals is not None:
        for n in np.asarray(face_normals, float):
            out.append("vn %.17g %.17g %.17g" % tuple(n))
        for fi, f in enumerate(faces):
            a, b, c = (int(i) + 1 for i in f)
            out.append(f"f {a}//{fi+1} {b}//{fi+1} {c}//{fi+1}")
    else:
        for f in faces:
            out.append("f %d %d %d" % tuple(int(i) + 1 for i in f))
    atomic_write_text(path, "\n".join(out) + "\n")
