from __future__ import annotations
import csv
import io
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

from ..core.errors import DataError


def rows_to_csv(rows: Iterable[Dict], fieldnames: List[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: row.get(k, "") for k in fieldnames})
    return buf.getvalue()


def write_rows(csv_path: str | Path, rows: Iterable[Dict], fieldnames: List[str]) -> Path:
    """Overwrites `csv_path` with a header plus one line per row ("\\n" line endings)."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(rows_to_csv(rows, fieldnames), encoding="utf-8")
    return csv_path

def read_rows(csv_path: str | Path, required: Sequence[str] = ()) -> List[Dict[str, str]]:
    """Rows keyed by header name. Raises DataError when the file or a `required` column is missing."""
    csv_path = Path(csv_path)
    if not csv_path.exists():
        raise DataError(f"file not found: {csv_path}")

    # utf-8-sig drops a leading BOM
    with csv_path.open("r", newline="", encoding="utf-8-sig") as f:
        reader = csv.DictReader(f)
        header = [(k or "").strip().lstrip("\ufeff") for k in reader.fieldnames or []]
        missing = [c for c in required if c not in header]
        if missing:
            raise DataError(f"{csv_path.name}: missing column(s) {', '.join(missing)}")
        reader.fieldnames = header
        return [{k: v for k, v in row.items() if k} for row in reader]
