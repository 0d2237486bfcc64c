"""
Plain-text files for factor networks, sigmoid networks and datasets.

Factor network:
    factornet <bayes|markov> <num_vars>
    factor <var ids ...> : <2**k values, last variable fastest>

Sigmoid network:
    mlp <n0-n1-...> <bernoulli|categorical>
    weights <i>            followed by one line per row
    biases <i>             followed by one line of values

Dataset: CSV with header x0,...,x{n-1},y[,p_true].

Floats are written with %.17g so that a file read back reproduces the
same doubles.
"""

import csv
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from models.dataset import Dataset
from models.errors import DataFormatError, StructureError
from models.factor_net import Factor, FactorNet, NetKind
from models.mlp import Mlp, OutputKind

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def fmt(value: float) -> str:
    return "%.17g" % value


def _write_lines(path: PathLike, lines: Iterable[str]):
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="\n") as f:
            for line in lines:
                f.write(line + "\n")
    except (IOError, OSError) as e:
        raise IOError(f"Failed to write to {path}: {str(e)}")


def _read_lines(path: PathLike) -> List[str]:
    try:
        with open(path) as f:
            return f.read().splitlines()
    except (IOError, OSError) as e:
        raise IOError(f"Failed to read {path}: {str(e)}")


def _floats(path: PathLike, number: int, tokens: Sequence[str]) -> List[float]:
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise DataFormatError(str(path), number, f"expected numbers, got '{' '.join(tokens)}'")


def write_factor_net(net: FactorNet, path: PathLike):
    """Write a FactorNet in the factornet text format."""
    lines = [f"factornet {net.kind.value} {net.num_vars}"]
    for factor in net.factors:
        ids = " ".join(str(v) for v in factor.scope)
        values = " ".join(fmt(v) for v in factor.flat())
        lines.append(f"factor {ids} : {values}")
    _write_lines(path, lines)


def read_factor_net(path: PathLike) -> FactorNet:
    """
    Parse a factornet text file.

    Raises:
        DataFormatError: With the 1-based line of the first malformed entry
    """
    lines = _read_lines(path)
    if not lines:
        raise DataFormatError(str(path), 1, "empty file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "factornet" or head[1] not in ("bayes", "markov") or not head[2].isdigit():
        raise DataFormatError(str(path), 1, "expected 'factornet <bayes|markov> <num_vars>'")
    factors = []
    for number, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        if not tokens:
            continue
        if tokens[0] != "factor" or ":" not in tokens:
            raise DataFormatError(str(path), number, "expected 'factor <ids> : <values>'")
        split = tokens.index(":")
        try:
            scope = [int(t) for t in tokens[1:split]]
        except ValueError:
            raise DataFormatError(str(path), number, "variable ids must be integers")
        try:
            factors.append(Factor(scope, _floats(path, number, tokens[split + 1:])))
        except StructureError as e:
            raise DataFormatError(str(path), number, str(e))
    try:
        return FactorNet(int(head[2]), factors, NetKind(head[1]))
    except StructureError as e:
        raise DataFormatError(str(path), 1, str(e))


def write_mlp(mlp: Mlp, path: PathLike):
    """Write a network in the mlp text format."""
    dims = "-".join(str(n) for n in mlp.layer_dims)
    lines = [f"mlp {dims} {mlp.output_kind.value}"]
    for i, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        lines.append(f"weights {i}")
        lines.extend(" ".join(fmt(v) for v in row) for row in w)
        lines.append(f"biases {i}")
        lines.append(" ".join(fmt(v) for v in b))
    _write_lines(path, lines)


def read_mlp(path: PathLike) -> Mlp:
    """Parse an mlp text file."""
    lines = [(n, line.split()) for n, line in enumerate(_read_lines(path), start=1) if line.strip()]
    if not lines:
        raise DataFormatError(str(path), 1, "empty file")
    number, head = lines[0]
    try:
        if len(head) != 3 or head[0] != "mlp":
            raise ValueError
        dims = [int(n) for n in head[1].split("-")]
        kind = OutputKind(head[2])
    except ValueError:
        raise DataFormatError(str(path), number, "expected 'mlp <n0-n1-...> <bernoulli|categorical>'")

    weights, biases, cursor = [], [], 1
    for i in range(len(dims) - 1):
        if cursor >= len(lines) or lines[cursor][1] != ["weights", str(i)]:
            at = lines[cursor][0] if cursor < len(lines) else lines[-1][0] + 1
            raise DataFormatError(str(path), at, f"expected 'weights {i}'")
        rows = lines[cursor + 1:cursor + 1 + dims[i + 1]]
        if len(rows) != dims[i + 1]:
            raise DataFormatError(str(path), lines[-1][0] + 1, f"layer {i} needs {dims[i + 1]} weight rows")
        block = []
        for n, tokens in rows:
            values = _floats(path, n, tokens)
            if len(values) != dims[i]:
                raise DataFormatError(str(path), n, f"weight row needs {dims[i]} values, got {len(values)}")
            block.append(values)
        cursor += 1 + dims[i + 1]
        if cursor + 1 >= len(lines) or lines[cursor][1] != ["biases", str(i)]:
            at = lines[cursor][0] if cursor < len(lines) else lines[-1][0] + 1
            raise DataFormatError(str(path), at, f"expected 'biases {i}' and one line of values")
        n, tokens = lines[cursor + 1]
        bias = _floats(path, n, tokens)
        if len(bias) != dims[i + 1]:
            raise DataFormatError(str(path), n, f"biases need {dims[i + 1]} values, got {len(bias)}")
        weights.append(block)
        biases.append(bias)
        cursor += 2
    if cursor != len(lines):
        raise DataFormatError(str(path), lines[cursor][0], "unexpected trailing content")
    try:
        return Mlp(dims, weights, biases, kind)
    except StructureError as e:
        raise DataFormatError(str(path), 1, str(e))


def write_dataset(dataset: Dataset, path: PathLike):
    """Write a dataset CSV; p_true is included when known."""
    header = [f"x{i}" for i in range(dataset.num_features)] + ["y"]
    if dataset.p_true is not None:
        header.append("p_true")
    lines = [",".join(header)]
    for i in range(len(dataset)):
        fields = [fmt(v) for v in dataset.X[i]] + [str(int(dataset.y[i]))]
        if dataset.p_true is not None:
            fields.append(fmt(dataset.p_true[i]))
        lines.append(",".join(fields))
    _write_lines(path, lines)


def read_dataset(path: PathLike, name: Optional[str] = None) -> Dataset:
    """
    Parse a dataset CSV written by write_dataset.

    Raises:
        DataFormatError: Bad header, wrong field count or a non-numeric field,
            with the 1-based line number
    """
    lines = _read_lines(path)
    if not lines:
        raise DataFormatError(str(path), 1, "empty file")
    header = lines[0].strip().split(",")
    has_truth = header[-1] == "p_true"
    features = header[:-2] if has_truth else header[:-1]
    label = header[-2] if has_truth else header[-1]
    if label != "y" or features != [f"x{i}" for i in range(len(features))] or not features:
        raise DataFormatError(str(path), 1, "expected header x0,...,x{n-1},y[,p_true]")
    X, y, truth = [], [], []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.strip().split(",")
        if len(fields) != len(header):
            raise DataFormatError(str(path), number, f"expected {len(header)} fields, got {len(fields)}")
        values = _floats(path, number, fields)
        if values[len(features)] not in (0.0, 1.0):
            raise DataFormatError(str(path), number, f"label must be 0 or 1, got {fields[len(features)]}")
        X.append(values[:len(features)])
        y.append(int(values[len(features)]))
        if has_truth:
            truth.append(values[-1])
    if not X:
        raise DataFormatError(str(path), len(lines) + 1, "no data rows")
    try:
        return Dataset(np.array(X), np.array(y), np.array(truth) if has_truth else None,
                       name or Path(path).stem)
    except StructureError as e:
        raise DataFormatError(str(path), 2, str(e))


def load_labeled_csv(path: PathLike, label_column: str, positive: Optional[str] = None,
                     name: Optional[str] = None) -> Dataset:
    """
    Ingest an arbitrary binary-label CSV with a header row.

    Every other column is min-max scaled to [0, 1] (constant columns map
    to 0). The label is 1 where it equals `positive` (default: the larger
    of the two distinct label values).

    Args:
        path: CSV file
        label_column: Name of the label column
        positive: Label value mapped to 1
        name: Dataset name, defaults to the file stem

    Returns:
        Dataset without p_true
    """
    try:
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
    except (IOError, OSError) as e:
        raise IOError(f"Failed to read {path}: {str(e)}")
    if not rows:
        raise DataFormatError(str(path), 1, "empty file")
    header = [h.strip() for h in rows[0]]
    if label_column not in header:
        raise DataFormatError(str(path), 1, f"no column named '{label_column}'")
    label_at = header.index(label_column)
    raw_labels, features = [], []
    for number, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataFormatError(str(path), number, f"expected {len(header)} fields, got {len(row)}")
        raw_labels.append(row[label_at].strip())
        features.append(_floats(path, number, [v for j, v in enumerate(row) if j != label_at]))
    distinct = sorted(set(raw_labels), key=_label_key)
    if len(distinct) > 2:
        raise DataFormatError(str(path), 1, f"label column has {len(distinct)} values, expected 2")
    positive = distinct[-1] if positive is None else positive
    X = np.array(features, dtype=float)
    low, high = X.min(axis=0), X.max(axis=0)
    span = np.where(high > low, high - low, 1.0)
    X = (X - low) / span
    y = np.array([1 if v == positive else 0 for v in raw_labels])
    logger.info("loaded %d rows with %d features from %s", len(y), X.shape[1], path)
    return Dataset(X, y, None, name or Path(path).stem)


def _label_key(value: str) -> Tuple[int, Union[float, str]]:
    try:
        return 0, float(value)
    except ValueError:
        return 1, value


def write_rows(path: PathLike, columns: Sequence[str], rows: Iterable[Dict[str, object]]):
    """CSV with a fixed column order; floats are written in their shortest exact form."""
    def _cell(value) -> str:
        if isinstance(value, (float, np.floating)):
            return repr(float(value))
        return str(value)

    lines = [",".join(columns)]
    lines.extend(",".join(_cell(row.get(c, "")) for c in columns) for row in rows)
    _write_lines(path, lines)


def read_rows(path: PathLike) -> List[Dict[str, str]]:
    """Rows of a headed CSV as dictionaries of strings."""
    try:
        with open(path, newline="") as f:
            return list(csv.DictReader(f))
    except (IOError, OSError) as e:
        raise IOError(f"Failed to read {path}: {str(e)}")
