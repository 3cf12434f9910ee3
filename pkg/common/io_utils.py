import csv
import io
import json
import logging
import math
import os
import tempfile
from pathlib import Path

import yaml

logger = logging.getLogger(__name__)


def make_dir(dir_path):
    if not Path(dir_path).exists():
        logger.info(f"Making directory: {dir_path}")
        Path(dir_path).mkdir(parents=True, exist_ok=True)


def _atomic_write(text, filename):
    # write next to the target so os.replace stays on one filesystem
    path = Path(filename)
    make_dir(path.parent)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def load_json(filename):
    with Path(filename).open("rb") as f:
        return json.load(f)


def _json_safe(value):
    # NaN and inf have no JSON spelling; they are written as null
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def save_json(data, filename, save_pretty=True, sort_keys=False):
    data = _json_safe(data)
    if save_pretty:
        text = json.dumps(data, indent=4, sort_keys=sort_keys, allow_nan=False)
    else:
        text = json.dumps(data, sort_keys=sort_keys, allow_nan=False)
    return _atomic_write(text + "\n", filename)


def load_yaml(filename):
    with Path(filename).open("r") as f:
        return yaml.load(f, Loader=yaml.SafeLoader)


def save_yaml(data, filename):
    return _atomic_write(yaml.dump(data, default_flow_style=False), filename)


def _fmt(value):
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, float):
        return repr(value)
    return value


def load_csv(filename, delimiter=","):
    """Read a headed csv file into a column dict; returns (contents, column names)."""
    with Path(filename).open("r", newline="", encoding="utf-8") as f:
        reader = csv.reader(f, delimiter=delimiter)
        idx2key = next(reader, None)
        if idx2key is None:
            return {}, []
        idx2key = [key.strip() for key in idx2key]
        contents = {key: [] for key in idx2key}
        for row in reader:
            if not row:
                continue
            for c_idx, col in enumerate(row):
                contents[idx2key[c_idx]].append(col)
    return contents, idx2key


def save_csv(data, filename, cols=None, delimiter=","):
    """Write either a column dict or a list of row dicts."""
    assert cols is not None, "Must have column names for dumping csv files."
    if isinstance(data, dict):
        num_entries = len(data[cols[0]]) if cols else 0
        rows = [{key: data[key][l_idx] for key in cols} for l_idx in range(num_entries)]
    else:
        rows = list(data)
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_fmt(row[key]) for key in cols])
    return _atomic_write(buf.getvalue(), filename)
