"""
On-disk formats shared by every command.

SRBD binary arrays: the 4-byte magic ``SRBD``, then unsigned 32-bit
little-endian format version, element type code (f64=1, f32=2) and rank,
then ``rank`` unsigned 64-bit dims, then the row-major little-endian
payload.

Tabular exports are CSV with a header row; configs and reports are JSON.
"""
import csv
import json
import logging
from pathlib import Path

import numpy as np

from core.exceptions import ArtifactIOError

logger = logging.getLogger(__name__)

MAGIC = b'SRBD'
FORMAT_VERSION = 1
DTYPE_CODES = {
    np.dtype('<f8'): 1,
    np.dtype('<f4'): 2,
}
CODE_DTYPES = {code: dtype for dtype, code in DTYPE_CODES.items()}


def write_array(path, array):
    array = np.asarray(array)
    dtype = array.dtype.newbyteorder('<')
    if dtype not in DTYPE_CODES:
        raise ArtifactIOError(f'Unsupported element type {array.dtype} for {path}.')
    header = np.array(
        [FORMAT_VERSION, DTYPE_CODES[dtype], array.ndim], dtype='<u4')
    dims = np.array(array.shape, dtype='<u8')
    payload = np.ascontiguousarray(array, dtype=dtype)
    with open(path, 'wb') as stream:
        stream.write(MAGIC)
        stream.write(header.tobytes())
        stream.write(dims.tobytes())
        stream.write(payload.tobytes())


def read_array(path):
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ArtifactIOError(f'Cannot read {path}: {exc}') from exc

    if len(raw) < 16 or raw[:4] != MAGIC:
        raise ArtifactIOError(f'{path} is not an SRBD file.')
    version, code, rank = (
        int(value) for value in np.frombuffer(raw, dtype='<u4', count=3, offset=4))
    if version != FORMAT_VERSION:
        raise ArtifactIOError(f'{path} has unsupported format version {version}.')
    if code not in CODE_DTYPES:
        raise ArtifactIOError(f'{path} has unknown element type code {code}.')

    dims_offset = 16
    shape = tuple(int(dim) for dim in np.frombuffer(
        raw, dtype='<u8', count=rank, offset=dims_offset))
    payload_offset = dims_offset + 8 * rank
    dtype = CODE_DTYPES[code]
    count = int(np.prod(shape, dtype=np.int64))
    if len(raw) - payload_offset != count * dtype.itemsize:
        raise ArtifactIOError(f'{path} payload size does not match its header.')
    return np.frombuffer(raw, dtype=dtype, count=count, offset=payload_offset) \
        .reshape(shape).copy()


def write_json(path, payload):
    with open(path, 'w') as stream:
        json.dump(payload, stream, indent=2, sort_keys=True)
        stream.write('\n')


def read_json(path):
    try:
        with open(path) as stream:
            return json.load(stream)
    except OSError as exc:
        raise ArtifactIOError(f'Cannot read {path}: {exc}') from exc
    except json.JSONDecodeError as exc:
        raise ArtifactIOError(f'{path} is not valid JSON: {exc}') from exc


def write_csv(path, header, rows):
    with open(path, 'w', newline='') as stream:
        writer = csv.writer(stream)
        writer.writerow(header)
        writer.writerows(rows)
    logger.debug('Wrote %s', path)


def field_rows(values, xi, tau):
    """``xi,tau,value`` triples of an M_x x M_t matrix, row-major."""
    for j, x in enumerate(xi):
        for k, t in enumerate(tau):
            yield repr(float(x)), repr(float(t)), repr(float(values[j, k]))
