"""CSV and raw binary persistence for sinograms, images, and curves.

CSV layout: a header line naming the grid fields, a line with their values,
then the row-major payload (one grid row per line).  Raw layout: an 8-value
little-endian float64 header followed by the row-major payload; header slot
0 is a format tag, slot 1 the payload kind (0 sinogram, 1 image).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .operators import Image, ImageGrid
from .sampling import DataGrid, Sinogram
from .theory import TheoryCurve

RAW_TAG = 7355.0
KIND_SINOGRAM = 0.0
KIND_IMAGE = 1.0


def write_sinogram_csv(path, sino: Sinogram):
    g = sino.grid
    with open(path, "w") as fh:
        fh.write("n_alpha,n_rho,rho_min,rho_max\n")
        fh.write(f"{g.n_alpha},{g.n_rho},{g.rho_min!r},{g.rho_max!r}\n")
        np.savetxt(fh, sino.values, delimiter=",")


def read_sinogram_csv(path) -> Sinogram:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != ["n_alpha", "n_rho", "rho_min", "rho_max"]:
            raise ValueError(f"not a sinogram CSV: {path}")
        fields = fh.readline().strip().split(",")
        grid = DataGrid(int(fields[0]), int(fields[1]), float(fields[2]), float(fields[3]))
        values = np.loadtxt(fh, delimiter=",").reshape(grid.n_alpha, grid.n_rho)
    return Sinogram(grid, values)


def write_sinogram_raw(path, sino: Sinogram):
    g = sino.grid
    header = np.array(
        [RAW_TAG, KIND_SINOGRAM, g.n_alpha, g.n_rho, g.rho_min, g.rho_max, 0.0, 0.0]
    )
    with open(path, "wb") as fh:
        fh.write(header.astype("<f8").tobytes())
        fh.write(sino.values.astype("<f8").tobytes())


def read_sinogram_raw(path) -> Sinogram:
    blob = np.fromfile(path, dtype="<f8")
    if blob[0] != RAW_TAG or blob[1] != KIND_SINOGRAM:
        raise ValueError(f"not a raw sinogram: {path}")
    grid = DataGrid(int(blob[2]), int(blob[3]), float(blob[4]), float(blob[5]))
    values = blob[8:].reshape(grid.n_alpha, grid.n_rho)
    return Sinogram(grid, values)


def write_image_csv(path, img: Image):
    g = img.grid
    with open(path, "w") as fh:
        fh.write("n,x_lo,x_hi,y_lo,y_hi\n")
        fh.write(f"{g.n},{g.x_lo!r},{g.x_hi!r},{g.y_lo!r},{g.y_hi!r}\n")
        np.savetxt(fh, img.values, delimiter=",")


def read_image_csv(path) -> Image:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != ["n", "x_lo", "x_hi", "y_lo", "y_hi"]:
            raise ValueError(f"not an image CSV: {path}")
        fields = fh.readline().strip().split(",")
        grid = ImageGrid(float(fields[1]), float(fields[2]), float(fields[3]), float(fields[4]), n=int(fields[0]))
        values = np.loadtxt(fh, delimiter=",").reshape(grid.n, grid.n)
    return Image(grid, values)


def write_image_raw(path, img: Image):
    g = img.grid
    header = np.array([RAW_TAG, KIND_IMAGE, g.n, g.x_lo, g.x_hi, g.y_lo, g.y_hi, 0.0])
    with open(path, "wb") as fh:
        fh.write(header.astype("<f8").tobytes())
        fh.write(img.values.astype("<f8").tobytes())


def read_image_raw(path) -> Image:
    blob = np.fromfile(path, dtype="<f8")
    if blob[0] != RAW_TAG or blob[1] != KIND_IMAGE:
        raise ValueError(f"not a raw image: {path}")
    grid = ImageGrid(float(blob[3]), float(blob[4]), float(blob[5]), float(blob[6]), n=int(blob[2]))
    return Image(grid, blob[8:].reshape(grid.n, grid.n))


def write_curve_csv(path, curve: TheoryCurve, labels=("abscissa", "value")):
    with open(path, "w") as fh:
        fh.write(f"# {curve.meaning}\n")
        fh.write(",".join(labels) + "\n")
        np.savetxt(fh, np.column_stack([curve.abscissae, curve.values]), delimiter=",")


def write_json(path, payload: dict):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())
