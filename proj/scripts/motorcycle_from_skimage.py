#!/usr/bin/env python3
"""Write scikit-image's bundled Middlebury 2014 Motorcycle pair in the 2014
directory layout (im0.png, im1.png, disp0GT.pfm, calib.txt) so that
`mrfgs run <dir> --vintage 2014 --full` can read it.

The bundled copy is already a quarter of the original resolution, so use
`--full` rather than `--quarter` unless an even smaller run is wanted.
"""

import argparse
import math
import pathlib
import sys

import numpy as np
from skimage import data, io


def write_pfm(path: pathlib.Path, disp: np.ndarray) -> None:
    h, w = disp.shape
    with open(path, "wb") as f:
        f.write(f"Pf\n{w} {h}\n-1.0\n".encode("ascii"))
        f.write(np.flipud(disp).astype("<f4").tobytes())


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("out", type=pathlib.Path, help="output directory")
    args = parser.parse_args()

    left, right, disp = data.stereo_motorcycle()
    args.out.mkdir(parents=True, exist_ok=True)
    io.imsave(args.out / "im0.png", left, check_contrast=False)
    io.imsave(args.out / "im1.png", right, check_contrast=False)
    write_pfm(args.out / "disp0GT.pfm", disp.astype(np.float32))

    finite = disp[np.isfinite(disp)]
    ndisp = int(math.ceil(float(finite.max()))) + 1
    h, w = disp.shape
    (args.out / "calib.txt").write_text(f"width={w}\nheight={h}\nndisp={ndisp}\n")
    print(f"wrote {args.out} ({w}x{h}, ndisp={ndisp}, {int((~np.isfinite(disp)).sum())} invalid GT pixels)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
