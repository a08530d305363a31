"""Readers and writers for the command-line file formats.

BAF input is either one value per line, or a tab-separated table whose
header contains a ``baf`` column and optionally ``chrom`` and ``pos``.
Blank lines and lines starting with ``#`` are ignored in both.
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np
import numpy.typing as npt

from .cusum import Label, Segment, Segmentation
from .model import SNAP_EPS, FloatArray, MixtureModel
from .simulate import LabeledSequence, ResamplePool


class InputError(ValueError):
    """Malformed input file; the message names the file and line."""


@dataclass
class BafInput:
    baf: FloatArray
    chrom: list[str] | None = None
    pos: npt.NDArray[np.int64] | None = None

    def chromosome_slices(self) -> list[tuple[str | None, slice]]:
        """Contiguous row ranges per chromosome, in file order."""
        n = self.baf.size
        if self.chrom is None:
            return [(None, slice(0, n))]
        out: list[tuple[str | None, slice]] = []
        start = 0
        for i in range(1, n + 1):
            if i == n or self.chrom[i] != self.chrom[start]:
                out.append((self.chrom[start], slice(start, i)))
                start = i
        return out


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _data_lines(fh: TextIO) -> Iterable[tuple[int, str]]:
    for lineno, raw in enumerate(fh, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line


def _parse_float(text: str, where: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise InputError(f"{where}: cannot parse {text!r} as a number") from None
    if not np.isfinite(v):
        raise InputError(f"{where}: non-finite value {text!r}")
    return v


def read_baf(path: str | Path, snap_eps: float = SNAP_EPS) -> BafInput:
    """Parse a BAF input file, validating range and position order."""
    name = str(path)
    with open(path, encoding="utf-8") as fh:
        lines = list(_data_lines(fh))
    if not lines:
        raise InputError(f"{name}: no data")

    first = lines[0][1].split("\t")
    has_header = "baf" in [c.strip().lower() for c in first]
    values: list[float] = []
    chrom: list[str] | None = None
    pos: list[int] | None = None

    if has_header:
        cols = [c.strip().lower() for c in first]
        i_baf = cols.index("baf")
        i_chrom = cols.index("chrom") if "chrom" in cols else None
        i_pos = cols.index("pos") if "pos" in cols else None
        chrom = [] if i_chrom is not None else None
        pos = [] if i_pos is not None else None
        for lineno, line in lines[1:]:
            where = f"{name}:{lineno}"
            fields = line.split("\t")
            if len(fields) != len(cols):
                raise InputError(f"{where}: expected {len(cols)} columns, found {len(fields)}")
            values.append(_parse_float(fields[i_baf], where))
            if chrom is not None:
                chrom.append(fields[i_chrom].strip())
            if pos is not None:
                try:
                    pos.append(int(fields[i_pos]))
                except ValueError:
                    raise InputError(f"{where}: bad position {fields[i_pos]!r}") from None
            _check_range(values[-1], where, snap_eps)
    else:
        for lineno, line in lines:
            where = f"{name}:{lineno}"
            values.append(_parse_float(line.strip(), where))
            _check_range(values[-1], where, snap_eps)

    if not values:
        raise InputError(f"{name}: no data rows")
    if pos is not None:
        _check_positions(name, chrom, pos, lines[1:])
    return BafInput(
        baf=np.array(values, dtype=np.float64),
        chrom=chrom,
        pos=None if pos is None else np.array(pos, dtype=np.int64),
    )


def _check_range(v: float, where: str, snap_eps: float) -> None:
    if v < -snap_eps or v > 1.0 + snap_eps:
        raise InputError(f"{where}: BAF value {v!r} outside [0, 1]")


def _check_positions(name: str, chrom: list[str] | None, pos: list[int], lines: list) -> None:
    seen: set[str] = set()
    for i in range(len(pos)):
        c = chrom[i] if chrom is not None else ""
        if i == 0 or (chrom is not None and chrom[i] != chrom[i - 1]):
            if c in seen:
                raise InputError(f"{name}:{lines[i][0]}: chromosome {c!r} is not contiguous")
            seen.add(c)
            continue
        if pos[i] <= pos[i - 1]:
            raise InputError(f"{name}:{lines[i][0]}: positions must strictly increase within a chromosome")


def read_model(path: str | Path) -> MixtureModel:
    try:
        return MixtureModel.from_json(Path(path).read_text(encoding="utf-8"))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def write_model(model: MixtureModel) -> str:
    return model.to_json() + "\n"


def _fmt(v: float) -> str:
    return repr(float(v))


SEGMENT_HEADER = ("start", "end", "label", "n_obs")


def format_segments(parts: list[tuple[str | None, int, Segmentation]]) -> str:
    """Segmentation TSV; ``parts`` holds (chrom, row offset, segmentation)."""
    with_chrom = any(c is not None for c, _, _ in parts)
    buf = io.StringIO()
    header = (("chrom",) if with_chrom else ()) + SEGMENT_HEADER
    buf.write("\t".join(header) + "\n")
    for chrom, offset, seg in parts:
        for s in seg.segments:
            row = [str(s.start + offset), str(s.end + offset), str(s.label), str(s.n_obs)]
            if with_chrom:
                row.insert(0, chrom or "")
            buf.write("\t".join(row) + "\n")
    return buf.getvalue()


def read_segment_labels(path: str | Path) -> npt.NDArray[np.int8]:
    """Per-observation 0/1 labels from a segmentation TSV (must cover 0..n-1)."""
    name = str(path)
    with open(path, encoding="utf-8") as fh:
        lines = list(_data_lines(fh))
    if not lines:
        raise InputError(f"{name}: empty segmentation")
    cols = lines[0][1].split("\t")
    try:
        i_s, i_e, i_l = cols.index("start"), cols.index("end"), cols.index("label")
    except ValueError:
        raise InputError(f"{name}:{lines[0][0]}: header must contain start, end, label") from None
    segs: list[Segment] = []
    for lineno, line in lines[1:]:
        f = line.split("\t")
        try:
            segs.append(Segment(int(f[i_s]), int(f[i_e]), Label.parse(f[i_l])))
        except (ValueError, IndexError) as exc:
            raise InputError(f"{name}:{lineno}: {exc}") from None
    segs.sort(key=lambda s: s.start)
    expect = 0
    for s in segs:
        if s.start != expect:
            raise InputError(f"{name}: segments do not tile the sequence at index {expect}")
        expect = s.end + 1
    out = np.zeros(expect, dtype=np.int8)
    for s in segs:
        out[s.start : s.end + 1] = int(s.label)
    return out


def read_gold(path: str | Path) -> npt.NDArray[np.int8]:
    """Per-observation labels from a TSV with ``index`` and ``label`` (or ``truth``) columns."""
    name = str(path)
    with open(path, encoding="utf-8") as fh:
        lines = list(_data_lines(fh))
    if not lines:
        raise InputError(f"{name}: empty label file")
    cols = [c.strip().lower() for c in lines[0][1].split("\t")]
    if "index" not in cols or not ({"label", "truth"} & set(cols)):
        raise InputError(f"{name}:{lines[0][0]}: header must contain index and label")
    i_idx = cols.index("index")
    i_lab = cols.index("label") if "label" in cols else cols.index("truth")
    labels: dict[int, int] = {}
    for lineno, line in lines[1:]:
        f = line.split("\t")
        try:
            idx = int(f[i_idx])
            lab = int(Label.parse(f[i_lab]))
        except (ValueError, IndexError) as exc:
            raise InputError(f"{name}:{lineno}: {exc}") from None
        if idx in labels:
            raise InputError(f"{name}:{lineno}: duplicate index {idx}")
        labels[idx] = lab
    n = len(labels)
    if set(labels) != set(range(n)):
        raise InputError(f"{name}: indices must cover 0..{n - 1} exactly")
    return np.array([labels[i] for i in range(n)], dtype=np.int8)


def format_labeled(seq: LabeledSequence) -> str:
    buf = io.StringIO()
    buf.write("index\tbaf\ttruth\n")
    for i, (b, t) in enumerate(zip(seq.baf, seq.truth)):
        buf.write(f"{i}\t{_fmt(b)}\t{int(t)}\n")
    return buf.getvalue()


def format_track(baf: BafInput, tbaf: FloatArray, labels: npt.NDArray[np.int8]) -> str:
    """Plot-ready per-observation table of BAF, tBAF and called label."""
    buf = io.StringIO()
    extra = []
    if baf.chrom is not None:
        extra.append("chrom")
    if baf.pos is not None:
        extra.append("pos")
    buf.write("\t".join(["index", *extra, "baf", "tbaf", "label"]) + "\n")
    for i in range(baf.baf.size):
        row = [str(i)]
        if baf.chrom is not None:
            row.append(baf.chrom[i])
        if baf.pos is not None:
            row.append(str(int(baf.pos[i])))
        row += [_fmt(baf.baf[i]), _fmt(tbaf[i]), str(Label(int(labels[i])))]
        buf.write("\t".join(row) + "\n")
    return buf.getvalue()


def read_pool(path: str | Path) -> ResamplePool:
    """Resampling pool: TSV with ``population`` (NonLOH/LOH) and ``baf`` columns."""
    name = str(path)
    with open(path, encoding="utf-8") as fh:
        lines = list(_data_lines(fh))
    if not lines:
        raise InputError(f"{name}: empty pool file")
    cols = [c.strip().lower() for c in lines[0][1].split("\t")]
    if "population" not in cols or "baf" not in cols:
        raise InputError(f"{name}:{lines[0][0]}: header must contain population and baf")
    i_pop, i_baf = cols.index("population"), cols.index("baf")
    pools: dict[Label, list[float]] = {Label.NON_LOH: [], Label.LOH: []}
    for lineno, line in lines[1:]:
        where = f"{name}:{lineno}"
        f = line.split("\t")
        try:
            pop = Label.parse(f[i_pop])
        except (ValueError, IndexError) as exc:
            raise InputError(f"{where}: {exc}") from None
        v = _parse_float(f[i_baf], where)
        _check_range(v, where, SNAP_EPS)
        pools[pop].append(min(max(v, 0.0), 1.0))
    try:
        return ResamplePool(non_loh=np.array(pools[Label.NON_LOH]), loh=np.array(pools[Label.LOH]))
    except ValueError as exc:
        raise InputError(f"{name}: {exc}") from exc

