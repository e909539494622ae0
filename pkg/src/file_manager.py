"""
Manages JSON, Excel, CSV and LP-text file operations, including reading and writing.
This module provides a `FileManager` class that makes sure the output directory exists
and writes sweep results as a CSV table plus a JSON metadata sidecar. CSV output is
the canonical, byte-deterministic artifact; Excel is an optional convenience copy.
"""

import json # For JSON file handling
import logging # Diagnostics stream
import math # NaN/inf handling in metadata
import os # For file and directory operations
from typing import Any, Dict, Optional # Type hints for documentation

import pandas as pd # For DataFrame manipulation

from analyzer import SweepAnalyzer # Sweep rows to DataFrame
from config import CSV_COLUMNS, FLOAT_FORMAT, METADATA_SUFFIX, OUTPUT_DIR, TOOL_VERSION

logger = logging.getLogger(__name__)


def _json_safe(value: Any) -> Any:
    """Replace non-finite floats (not valid JSON) with None, recursively"""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


class FileManager:
    """Manages file read and write operations"""

    def __init__(self, output_dir: str = OUTPUT_DIR):
        """Initialize the file manager and ensure the output directory exists"""
        self.output_dir = output_dir
        os.makedirs(self.output_dir, exist_ok=True) # Create output directory if it doesn't exist

    def _filepath(self, filename: str, directory: Optional[str]) -> str:
        directory = directory or self.output_dir
        os.makedirs(directory, exist_ok=True)
        return os.path.join(directory, filename) # Build complete file path

    def save_json(self, data: Any, filename: str, directory: Optional[str] = None) -> str:
        """Save data in JSON format with sorted keys; returns the path written"""
        filepath = self._filepath(filename, directory)
        with open(filepath, 'w', encoding='utf-8', newline='\n') as f: # Open file in write mode
            json.dump(_json_safe(data), f, indent=4, ensure_ascii=False, sort_keys=True)
            f.write('\n')
        logger.info("JSON saved in %s", filepath)
        return filepath

    @staticmethod
    def load_json(filepath: str) -> Dict[str, Any]:
        """Load data from a JSON file"""
        with open(filepath, 'r', encoding='utf-8') as f: # Open file in read mode
            return json.load(f)

    def save_text(self, text: str, filename: str, directory: Optional[str] = None) -> str:
        """Save plain text (LP dumps); returns the path written"""
        filepath = self._filepath(filename, directory)
        with open(filepath, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        return filepath

    def save_dataframe_csv(self, df: pd.DataFrame, filename: str, directory: Optional[str] = None) -> str:
        """Save a DataFrame in CSV format, floats with 17 significant digits"""
        filepath = self._filepath(filename, directory)
        # fixed float format and line ending keep reruns byte-identical
        df.to_csv(filepath, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        logger.info("CSV saved in %s", filepath)
        return filepath

    def save_dataframe_excel(self, df: pd.DataFrame, filename: str, directory: Optional[str] = None) -> str:
        """Save a DataFrame in Excel format"""
        filepath = self._filepath(filename, directory)
        df.to_excel(filepath, index=False, engine='openpyxl') # Save DataFrame in Excel format
        logger.info("Excel saved in %s", filepath)
        return filepath

    def write_results(self, result, filename: str, metadata: Dict[str, Any],
                      directory: Optional[str] = None, excel: bool = False) -> str:
        """
        Write a SweepResult as CSV plus its metadata sidecar

        Args:
            result: SweepResult to write
            filename: CSV file name; the sidecar is <filename>.meta.json
            metadata: run metadata (seed, config hash) merged with the result's own

        Returns:
            Path of the CSV file
        """
        df = SweepAnalyzer(result.rows).to_dataframe() if result.rows else pd.DataFrame(columns=CSV_COLUMNS)
        csv_path = self.save_dataframe_csv(df, filename, directory)
        sidecar = {
            "tool_version": TOOL_VERSION,
            "sweep": result.kind,
            "rows": len(result.rows),
            **metadata,
            **result.metadata,
            "savings": result.savings.to_dict(),
            "failed_rows": {f"{r.key}/{r.policy}": r.message or r.status for r in result.failed_rows},
        }
        self.save_json(sidecar, filename + METADATA_SUFFIX, directory)
        if excel:
            self.save_dataframe_excel(df, os.path.splitext(filename)[0] + ".xlsx", directory)
        return csv_path
