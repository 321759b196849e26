import csv
import io
import json
import os
import time
from typing import Any, Dict, List, Optional

import numpy as np


def to_jsonable(value: Any) -> Any:
    """Complex numbers become [re, im]; numpy containers become lists"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if np.isfinite(value) else str(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if hasattr(value, 'to_dict'):
        return to_jsonable(value.to_dict())
    return value


class ResultStore:
    """Writes one command result as JSON, optionally with a CSV table of its rows"""

    def __init__(self, out_path: Optional[str] = None, fmt: str = 'json'):
        if fmt not in ('json', 'csv'):
            raise ValueError(f"unknown output format '{fmt}'")
        self.out_path = out_path
        self.fmt = fmt

    def _write(self, path: str, text: str, max_retries: int = 3):
        """Write via a temporary file with retry on transient OS errors"""
        tmp = f"{path}.tmp"
        for attempt in range(max_retries):
            try:
                directory = os.path.dirname(path)
                if directory:
                    os.makedirs(directory, exist_ok=True)
                with open(tmp, 'w', newline='') as f:
                    f.write(text)
                os.replace(tmp, path)
                return
            except OSError:
                if attempt < max_retries - 1:
                    time.sleep(0.1 * (2 ** attempt))
                    continue
                raise

    @staticmethod
    def render_json(result: Dict[str, Any]) -> str:
        return json.dumps(to_jsonable(result), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @staticmethod
    def render_csv(rows: List[Dict[str, Any]]) -> str:
        """One row per record; complex cells are split into _re/_im columns"""
        flat_rows = []
        for row in rows:
            flat = {}
            for key, value in sorted(to_jsonable(row).items()):
                if isinstance(value, list) and len(value) == 2 and all(isinstance(v, float) for v in value):
                    flat[f"{key}_re"], flat[f"{key}_im"] = value
                elif isinstance(value, (list, dict)):
                    flat[key] = json.dumps(value, sort_keys=True)
                else:
                    flat[key] = value
            flat_rows.append(flat)
        columns = sorted({k for row in flat_rows for k in row})
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in flat_rows:
            writer.writerow(row)
        return buffer.getvalue()

    def save(self, result: Dict[str, Any], rows: Optional[List[Dict[str, Any]]] = None) -> Optional[str]:
        """Persist a result; returns the path written, or None when printing only"""
        text = self.render_json(result)
        if self.out_path is None:
            return None
        if self.fmt == 'csv':
            base, _ = os.path.splitext(self.out_path)
            self._write(f"{base}.json", text)
            csv_path = self.out_path if self.out_path.endswith('.csv') else f"{base}.csv"
            self._write(csv_path, self.render_csv(rows or []))
            return csv_path
        self._write(self.out_path, text)
        return self.out_path

    def load(self, path: Optional[str] = None) -> Any:
        """Decoded JSON of an earlier result (or any JSON file); None when it does not exist"""
        path = path or self.out_path
        if not path or not os.path.exists(path):
            return None
        with open(path, 'r') as f:
            return json.load(f)
