"""Convert the LaTeX tabular blocks of an Adams-chart appendix into TSV tables.

One-off maintenance script.  Each ``table`` environment whose label looks like
``Table:S122`` or ``Table:Cnu126`` becomes ``<label>.tsv`` with a small header:

    # chart: S0
    # stem: 122
    # region: 0 25
    s<TAB>element<TAB>d<TAB>value

The ``d`` column holds ``d2``, ``d3^-1``, ``Permanent`` or is empty.
"""

from __future__ import annotations

import re
import sys
from pathlib import Path

LABEL_RE = re.compile(r"\\label\{Table:(S|Cnu)(\d+)(?:\.(\d+))?\}")
CAPTION_RE = re.compile(r"\\caption\{(.*)\}")
MULTIROW_RE = re.compile(r"\\multirow\{\d+\}\{\*\}\{([\d-]+)\}")
DR_RE = re.compile(r"\$d_\{(\d+)\}(\^\{-1\})?\$")


def _strip_math(cell: str) -> str:
    cell = cell.strip()
    if cell.startswith("$") and cell.endswith("$"):
        cell = cell[1:-1]
    return cell.strip()


def _caption_range(caption: str) -> tuple[int, int]:
    m = re.search(r"\$(\d+)\s*\\le\s*s\s*\\le\s*(\d+)\$", caption)
    if m:
        return int(m.group(1)), int(m.group(2))
    m = re.search(r"\$s\s*\\le\s*(\d+)\$", caption)
    if m:
        return 0, int(m.group(1))
    raise ValueError(f"no filtration range in caption: {caption!r}")


def convert_block(block: list[str]) -> tuple[str, str]:
    text = "\n".join(block)
    label = LABEL_RE.search(text)
    caption = CAPTION_RE.search(text)
    if not label or not caption:
        raise ValueError("table block without label/caption")
    kind, stem = label.group(1), int(label.group(2))
    chart = "S0" if kind == "S" else "Cnu"
    lo, hi = _caption_range(caption.group(1))
    name = f"{'S' if kind == 'S' else 'Cnu'}{stem}" + (f".{label.group(3)}" if label.group(3) else "")
    out = [f"# chart: {chart}", f"# stem: {stem}", f"# region: {lo} {hi}", "s\telement\td\tvalue"]
    current_s = None
    for line in block:
        if "&" not in line or "Elements" in line:
            continue
        body = line.split("\\\\")[0]
        cells = body.split("&")
        first = cells[0]
        m = MULTIROW_RE.search(first)
        if m:
            current_s = m.group(1)
        if "multicolumn" in body:
            continue
        if len(cells) != 4:
            raise ValueError(f"unexpected row: {line!r}")
        element = _strip_math(cells[1])
        dcell = cells[2].strip()
        value = _strip_math(cells[3])
        if dcell:
            dm = DR_RE.fullmatch(dcell)
            if not dm:
                raise ValueError(f"bad d_r cell: {dcell!r}")
            d = f"d{dm.group(1)}" + ("^-1" if dm.group(2) else "")
        elif value == "Permanent":
            d, value = "Permanent", ""
        else:
            raise ValueError(f"row without d_r: {line!r}")
        value = value.replace("\\text{possibly }", "possibly ")
        out.append("\t".join([current_s, element, d, value]))
    return name, "\n".join(out) + "\n"


def main(argv: list[str]) -> int:
    src, dest = Path(argv[1]), Path(argv[2])
    lines = src.read_text(encoding="utf-8").splitlines()
    block: list[str] | None = None
    for line in lines:
        if line.strip().startswith("\\begin{table}"):
            block = []
        elif line.strip().startswith("\\end{table}") and block is not None:
            if any(LABEL_RE.search(b) for b in block):
                name, tsv = convert_block(block)
                (dest / f"{name}.tsv").write_text(tsv, encoding="utf-8")
                print(name)
            block = None
        elif block is not None:
            block.append(line)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
