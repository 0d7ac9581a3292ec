"""Write a set of example input files for the command-line tool.

    python3 scripts/make_cli_examples.py OUTDIR

Creates kernel, sample, series, colligation, operator and window files that
exercise every subcommand; see the README for the commands that use them.
"""
import argparse
from pathlib import Path

import numpy as np

from schurkit import jsonio
from schurkit.kernels import CPKernelSample
from schurkit.realization import Colligation
from schurkit.sampling import random_contraction_window, random_disk_points


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("outdir")
    args = parser.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(0)

    def write(name, obj):
        (out / name).write_text(jsonio.dumps(obj))

    write("constant_kernel.json", {"setting": "disk", "points": [0, [0.5, 0], [0, -0.3]], "block_dim": 1,
                                   "blocks": [[[[1]]] * 3] * 3})
    write("transpose_cp.json", jsonio.encode_cp_kernel_sample(
        CPKernelSample.from_function(lambda p, q, a: a.T, [0], 2, 2)))
    pts = random_disk_points(rng, 12, 0.9)
    write("identity_samples.json", {"points": [jsonio.encode_point(z) for z in pts],
                                    "values": [jsonio.encode_complex(z) for z in pts]})
    write("large_constant_samples.json", {"points": [0, [0.5, 0], [0, 0.5]], "values": [1.5, 1.5, 1.5]})
    write("free_series.json", {"d": 2, "terms": [{"word": [1], "coeff": [[0.6]]}, {"word": [2, 1], "coeff": [[0.3]]}]})
    write("window.json", {"T": jsonio.encode_window(random_contraction_window(rng, 6))})
    r = np.sqrt(0.75)
    write("blaschke.json", jsonio.encode_colligation(
        Colligation(np.array([[0.5]]), np.array([[r]]), np.array([[r]]), np.array([[-0.5]]))))
    write("origin.json", {"points": [0, [0.3, 0.1]]})
    write("z_squared.json", {"d": 1, "terms": [{"word": [1, 1], "coeff": [[1]]}]})
    write("nilpotent.json", {"blocks": [[[0, 0.9], [0, 0]]]})
    write("unit_tuple.json", {"blocks": [[[1.0]]]})
    print(f"wrote {len(list(out.glob('*.json')))} files to {out}")


if __name__ == "__main__":
    main()
