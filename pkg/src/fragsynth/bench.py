"""Benchmark sweeps over a grid of (task, variant, seed) cells.

Each cell runs one search and becomes one CSV row.  Rows are appended
and flushed as soon as their cell finishes, so an interrupted sweep
keeps everything it already measured, and a cell that fails to load or
crashes is recorded as a row with status ``error`` instead of aborting
the rest of the grid.

In budget mode (a fixed candidate count per cell) the rows carry no
wall-clock fields, so two runs of the same sweep write byte-identical
files.  In timeout mode the elapsed seconds and candidates-per-second
columns are filled in.
"""
from __future__ import annotations

import csv
import io
from collections.abc import Callable, Iterable, Sequence
from pathlib import Path

from .lang import size_of
from .search import SearchConfig, SearchResult, VARIANTS, synthesize
from .task import TaskError, TaskSpec, load_task

__all__ = ["CSV_COLUMNS", "run_cell", "run_bench", "summary_table",
           "load_rows"]

CSV_COLUMNS = ("task", "variant", "seed", "status", "solved", "time_sec",
               "candidates", "solution_size", "programs_evaluated",
               "programs_skipped", "pps", "resolutions_tried",
               "resolutions_ok", "remembered_max", "fragments_max")


def _row_from_result(task_name: str, variant: str, seed: int,
                     result: SearchResult, budget_mode: bool) -> dict:
    st = result.stats
    solved = result.solved
    return {
        "task": task_name,
        "variant": variant,
        "seed": seed,
        "status": result.status,
        "solved": int(solved),
        "time_sec": "" if budget_mode else f"{st.elapsed_sec:.2f}",
        "candidates": st.candidates,
        "solution_size": size_of(result.solution) if solved else "",
        "programs_evaluated": st.programs_evaluated,
        "programs_skipped": st.programs_skipped,
        "pps": "" if budget_mode else f"{st.pps:.0f}",
        "resolutions_tried": st.resolutions_tried,
        "resolutions_ok": st.resolutions_ok,
        "remembered_max": st.remembered_max,
        "fragments_max": st.fragments_max,
    }


def _error_row(task_name: str, variant: str, seed: int) -> dict:
    row = {name: "" for name in CSV_COLUMNS}
    row.update(task=task_name, variant=variant, seed=seed,
               status="error", solved=0)
    return row


def run_cell(task: TaskSpec, variant: str, seed: int, *,
             budget_candidates: int | None = None,
             timeout_sec: float | None = None,
             max_size: int = 40) -> tuple[dict, SearchResult | None]:
    """Run one search cell; return its CSV row and the raw result."""
    cfg = SearchConfig(variant=variant, seed=seed,
                       budget_candidates=budget_candidates,
                       timeout_sec=timeout_sec, max_size=max_size)
    try:
        result = synthesize(task, cfg)
    except Exception:
        return _error_row(task.name, variant, seed), None
    return (_row_from_result(task.name, variant, seed, result,
                             cfg.budget_mode), result)


class _CsvSink:
    """Append rows to a CSV file, writing the header only when the file
    starts empty, and flushing after every row."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fresh = not (self.path.exists() and self.path.stat().st_size > 0)
        self._fh = open(self.path, "a", newline="")
        self._writer = csv.DictWriter(self._fh, fieldnames=CSV_COLUMNS,
                                      lineterminator="\n")
        if fresh:
            self._writer.writeheader()
            self._fh.flush()

    def write(self, row: dict) -> None:
        self._writer.writerow(row)
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def _load_tasks(tasks: str | Path | Iterable[str | Path],
                ) -> list[tuple[str, TaskSpec | None]]:
    """Resolve a task directory or explicit file list into (name, spec)
    pairs, sorted by name; specs that fail to load come back as None."""
    if isinstance(tasks, (str, Path)) and Path(tasks).is_dir():
        paths = sorted(Path(tasks).glob("*.json"))
    else:
        paths = [Path(p) for p in tasks]  # type: ignore[union-attr]
    out: list[tuple[str, TaskSpec | None]] = []
    for path in paths:
        try:
            out.append((path.stem, load_task(path)))
        except (TaskError, OSError):
            out.append((path.stem, None))
    out.sort(key=lambda pair: pair[0])
    return out


def run_bench(tasks: str | Path | Iterable[str | Path],
              variants: Sequence[str], seeds: Sequence[int], *,
              budget_candidates: int | None = None,
              timeout_sec: float | None = None,
              max_size: int = 40,
              out_path: str | Path,
              log: Callable[[str], None] | None = None) -> list[dict]:
    """Sweep every (task, variant, seed) cell into ``out_path``.

    ``tasks`` is a directory of ``*.json`` task files or an iterable of
    file paths.  Returns the rows written by this call, in order.
    """
    for v in variants:
        if v not in VARIANTS:
            raise ValueError(f"unknown variant {v!r}")
    sink = _CsvSink(out_path)
    rows = []
    try:
        for name, spec in _load_tasks(tasks):
            for variant in variants:
                for seed in seeds:
                    if spec is None:
                        row = _error_row(name, variant, seed)
                    else:
                        row, _ = run_cell(
                            spec, variant, seed,
                            budget_candidates=budget_candidates,
                            timeout_sec=timeout_sec, max_size=max_size)
                    sink.write(row)
                    rows.append(row)
                    if log is not None:
                        log(f"{name:>16s} {variant:>9s} seed={seed:<3d} "
                            f"{row['status']:>7s} "
                            f"candidates={row['candidates']}")
    finally:
        sink.close()
    return rows


def load_rows(path: str | Path) -> list[dict]:
    """Read back a results CSV written by :func:`run_bench`."""
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def summary_table(rows: Iterable[dict]) -> str:
    """Per-variant totals: cells run, tasks solved, errors."""
    cells: dict[str, int] = {}
    solved: dict[str, set[str]] = {}
    attempted: dict[str, set[str]] = {}
    errors: dict[str, int] = {}
    for row in rows:
        v = row["variant"]
        cells[v] = cells.get(v, 0) + 1
        attempted.setdefault(v, set()).add(row["task"])
        if str(row["solved"]) == "1":
            solved.setdefault(v, set()).add(row["task"])
        if row["status"] == "error":
            errors[v] = errors.get(v, 0) + 1
    buf = io.StringIO()
    buf.write(f"{'variant':>9s} {'cells':>6s} {'tasks':>6s} "
              f"{'solved':>7s} {'errors':>7s}\n")
    for v in sorted(cells):
        buf.write(f"{v:>9s} {cells[v]:>6d} {len(attempted[v]):>6d} "
                  f"{len(solved.get(v, set())):>7d} "
                  f"{errors.get(v, 0):>7d}\n")
    return buf.getvalue().rstrip("\n")
