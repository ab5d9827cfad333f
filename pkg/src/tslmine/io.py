"""JSONL persistence for logs, traces and corpora."""
from __future__ import annotations

import json
import re
from pathlib import Path


def dump_log(rows) -> str:
    return "".join(json.dumps(r) + "\n" for r in rows)


def write_log(path, rows) -> None:
    Path(path).write_text(dump_log(rows))


def read_log(path) -> list[dict]:
    rows = []
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        row = json.loads(line)
        if not isinstance(row, dict):
            raise ValueError(f"{path}:{n}: expected a JSON object per line")
        rows.append(row)
    return rows


def _index(p: Path) -> tuple:
    m = re.search(r"(\d+)$", p.stem)
    return (int(m.group(1)) if m else -1, p.name)


def write_corpus(directory, positives, negatives, outcomes=None) -> list[Path]:
    """One JSONL file per log; ``outcomes`` (one per negative) goes to ``outcomes.json``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    out = []
    for label, logs in (("positive", positives), ("negative", negatives)):
        for i, rows in enumerate(logs):
            p = d / f"{label}_{i}.jsonl"
            write_log(p, rows)
            out.append(p)
    if outcomes is not None:
        if len(outcomes) != len(negatives):
            raise ValueError("one outcome per negative log")
        p = d / "outcomes.json"
        p.write_text(json.dumps({f"negative_{i}": o for i, o in enumerate(outcomes)},
                                indent=1, sort_keys=True) + "\n")
        out.append(p)
    return out


def read_outcomes(directory, n_negatives: int) -> list | None:
    """Per-negative outcome labels, or None when the corpus has none."""
    p = Path(directory) / "outcomes.json"
    if not p.exists():
        return None
    data = json.loads(p.read_text())
    return [data.get(f"negative_{i}") for i in range(n_negatives)]


def read_corpus(directory) -> tuple[list[list[dict]], list[list[dict]]]:
    """``positive_*.jsonl`` and ``negative_*.jsonl`` in numeric order."""
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"no corpus directory {d}")
    pos = [read_log(p) for p in sorted(d.glob("positive_*.jsonl"), key=_index)]
    neg = [read_log(p) for p in sorted(d.glob("negative_*.jsonl"), key=_index)]
    return pos, neg


def write_traces(path, traces) -> None:
    """One JSON line per trace: a list of positions, each a sorted list of term strings."""
    from .syntax import format_term

    with open(path, "w") as fh:
        for tr in traces:
            steps = [sorted(format_term(t) for t in step) for step in tr.steps]
            fh.write(json.dumps(steps) + "\n")


def read_traces(path, signature=None):
    from .logic import Atom, Trace
    from .syntax import parse_formula

    traces = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        steps = []
        for step in json.loads(line):
            terms = set()
            for text in step:
                f = parse_formula(text, signature)
                if not isinstance(f, Atom):
                    raise ValueError(f"{text!r} is not a term")
                terms.add(f.term)
            steps.append(frozenset(terms))
        traces.append(Trace(tuple(steps)))
    return traces
