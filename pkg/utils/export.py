"""
CSV and JSON export with run metadata
"""
import csv
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Sequence

TABLE_COLUMNS = ["configuration", "state", "mean_hb", "mean_holevo", "err_estimate", "evaluations"]


def timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def metadata_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def write_json(path, rows: List[Dict], metadata: Dict) -> Path:
    """UTF-8 JSON with sorted keys: {"metadata": ..., "rows": [...]}"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"metadata": metadata, "rows": rows}, f, indent=2, sort_keys=True, ensure_ascii=False, default=str)
    return path


def write_csv(path, rows: List[Dict], metadata: Dict, columns: Sequence[str] = None) -> Path:
    """RFC-4180 CSV; metadata goes to a sibling <name>.meta.json"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = list(columns or (rows[0].keys() if rows else []))
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=columns, extrasaction="ignore", lineterminator="\r\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in columns})
    with open(metadata_path(path), "w", encoding="utf-8") as f:
        json.dump(metadata, f, indent=2, sort_keys=True, ensure_ascii=False, default=str)
    return path


def write_rows(path, rows: List[Dict], metadata: Dict, fmt: str = "csv", columns: Sequence[str] = None) -> Path:
    if fmt == "json":
        return write_json(path, rows, metadata)
    return write_csv(path, rows, metadata, columns)
