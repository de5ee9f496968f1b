'''
This module contains the writers of the output files: CSV tables,
16-bit PGM maps, JSON summaries and the run manifest. Every file is written
to a temporary name and moved into place, so readers never see partial files.
'''
import hashlib
import json
import os

import numpy as np

def _atomicWrite(path, data):
    path = str(path)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)
    return path

def formatNumber(value):
    '''
    Text of a number in CSV files, floats use repr
    '''
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))

def writeCSV(path, header, rows):
    '''
    UTF-8 CSV with a header row

    :arg header: column names

    :arg rows: iterable of tuples of numbers
    '''
    lines = [",".join(header)]
    lines += [",".join(formatNumber(v) for v in row) for row in rows]
    return _atomicWrite(path, ("\n".join(lines)+"\n").encode("utf-8"))

def readCSV(path):
    '''
    Header and float rows of a CSV written by writeCSV
    '''
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        rows = [tuple(float(v) for v in line.strip().split(",")) for line in f if line.strip()]
    return header, rows

def writeMapCSV(path, values):
    '''
    Map as CSV with columns x_index, y_index, value
    '''
    values = np.asarray(values)
    rows = [(ix, iy, values[iy, ix]) for iy in range(values.shape[0])
            for ix in range(values.shape[1])]
    return writeCSV(path, ("x_index", "y_index", "value"), rows)

def writePGM(path, values, xRange, yRange, unit="rad/um"):
    '''
    Binary 16-bit PGM (P5, big-endian, maxval 65535) of a non-negative map
    indexed [y, x]. The first image row is the largest y. A comment line
    records the axis ranges and the value of the white level.

    :arg xRange: (lo, hi) of the x axis

    :arg yRange: (lo, hi) of the y axis
    '''
    values = np.asarray(values, dtype=float)
    scale = float(np.max(values)) if values.size and np.max(values) > 0 else 1.0
    pixels = np.clip(np.rint(values/scale*65535), 0, 65535).astype(">u2")[::-1, :]
    height, width = values.shape
    header = "P5\n# qx=[{!r},{!r}] qy=[{!r},{!r}] unit={} scale={!r}\n{} {}\n65535\n".format(
        float(xRange[0]), float(xRange[1]), float(yRange[0]), float(yRange[1]), unit, scale,
        width, height)
    return _atomicWrite(path, header.encode("ascii")+pixels.tobytes())

def readPGM(path):
    '''
    (pixels indexed [y, x] with y increasing, comment) of a file written by writePGM
    '''
    with open(path, "rb") as f:
        data = f.read()
    fields = []
    comment = None
    position = 0
    while len(fields) < 4:
        end = data.index(b"\n", position)
        line = data[position:end].decode("ascii")
        position = end+1
        if line.startswith("#"):
            comment = line[1:].strip()
        else:
            fields += line.split()
    width, height = int(fields[1]), int(fields[2])
    pixels = np.frombuffer(data[position:], dtype=">u2").reshape(height, width)
    return pixels[::-1, :].astype(int), comment

def _jsonDefault(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError("not JSON serializable: {!r}".format(value))

def writeJSON(path, payload):
    '''
    JSON with sorted keys and two-space indent, nan is written as null
    '''
    text = json.dumps(_finite(payload), sort_keys=True, indent=2, default=_jsonDefault)
    return _atomicWrite(path, (text+"\n").encode("utf-8"))

def _finite(value):
    if isinstance(value, np.ndarray):
        return _finite(value.tolist())
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    if isinstance(value, (float, np.floating)) and not np.isfinite(value):
        return None
    return value

def sha256(path):
    '''
    Hex SHA-256 of a file
    '''
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()

def configHash(text):
    '''
    Hex SHA-256 of a serialized configuration
    '''
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
