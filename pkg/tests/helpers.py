"""Shared builders for the test suite."""

import contextlib
import io

import svdpert as sp


def geometric_spectrum(p, top=3.0, ratio=0.65):
    """Descending spectrum with a wide leading gap ((1-ratio) relative)."""
    return tuple(top * ratio**j for j in range(p))


def make_instance(n, p, seed, ratio=0.65):
    """Seeded (X, E_dir) pair with a well-separated spectrum."""
    spec = sp.SpectrumSpec(
        n=n, p=p, singular_values=geometric_spectrum(p, ratio=ratio), seed=seed
    )
    X = sp.matrix_with_spectrum(spec)
    E = sp.perturbation_direction(n, p, (seed + 500) % 2**64)
    return X, E


def run_cli(argv):
    """Run the CLI in process; returns (exit_code, stdout, stderr)."""
    from svdpert.cli import main

    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        try:
            code = main(argv)
        except SystemExit as exc:  # argparse usage failures
            code = exc.code if exc.code is not None else 0
    return code, out.getvalue(), err.getvalue()


def parse_kv(stdout):
    """Parse a key:value output block into a dict of strings."""
    block = {}
    for line in stdout.splitlines():
        if ": " in line:
            key, val = line.split(": ", 1)
            block[key] = val
        elif line.endswith(":"):
            block[line[:-1]] = ""
    return block
