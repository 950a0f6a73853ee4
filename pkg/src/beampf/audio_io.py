"""WAV and text-matrix file I/O.

Integer PCM (16/24/32 bit) and 32/64-bit float RIFF WAV are accepted on
input and normalized to float64 in [-1, 1); output is always 32-bit float.
Matrices are exported as comma-separated text with a one-line dimension
header so they can be inspected with any toolchain.
"""

import numpy as np
from scipy.io import wavfile


def read_wav(path):
    """Read a WAV file as (float64 array [samples x channels], sample_rate)."""
    sample_rate, data = wavfile.read(path)
    if data.ndim == 1:
        data = data[:, None]
    if data.dtype in (np.float32, np.float64):
        out = data.astype(np.float64)
    elif data.dtype == np.int16:
        out = data.astype(np.float64) / 2.0**15
    elif data.dtype == np.int32:
        # scipy aligns 24-bit PCM into the high bytes of int32, so one scale fits both
        out = data.astype(np.float64) / 2.0**31
    else:
        raise ValueError(f"unsupported WAV sample format {data.dtype} in {path}")
    return out, int(sample_rate)


def write_wav(path, data, sample_rate):
    """Write float32 WAV; accepts [samples] or [samples x channels]."""
    data = np.asarray(data, dtype=np.float32)
    if data.ndim == 2 and data.shape[1] == 1:
        data = data[:, 0]
    wavfile.write(path, int(sample_rate), data)


def write_text_matrix(path, matrix, label=""):
    """Comma-separated matrix, one row per line, after a '# rows cols label' header."""
    matrix = np.atleast_2d(np.asarray(matrix))
    with open(path, "w") as fh:
        fh.write(f"# {matrix.shape[0]} {matrix.shape[1]} {label}".rstrip() + "\n")
        for row in matrix:
            fh.write(",".join(f"{v:.8g}" for v in row) + "\n")


def read_text_matrix(path):
    """Inverse of :func:`write_text_matrix`; the header is validated against the body."""
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing '# rows cols' header")
        parts = header[1:].split()
        rows, cols = int(parts[0]), int(parts[1])
        matrix = np.array([[float(v) for v in line.split(",")] for line in fh if line.strip()])
    if matrix.shape != (rows, cols):
        raise ValueError(f"{path}: header says {(rows, cols)}, body is {matrix.shape}")
    return matrix
