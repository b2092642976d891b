"""
Record generation pipeline: synthetic patient records plus their marginal summary.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Optional, Tuple

from ..core.rng import StreamFamily
from ..models.schemas import PatientRecord, PopulationSpec
from ..services.population import format_summary, generate_records, records_to_csv, summarize_records

logger = logging.getLogger(__name__)

RECORDS_FILE = "records.csv"


def generate_dataset(n: int, seed: int, spec: Optional[PopulationSpec] = None) -> List[PatientRecord]:
    streams = StreamFamily(seed, 0)
    return generate_records(n, streams.stream("population"), spec, label_stream=streams.stream("labels"))


def run_datagen(
    n: int, seed: int, out_path: str | Path, spec: Optional[PopulationSpec] = None
) -> Tuple[List[PatientRecord], str]:
    """Writes the records CSV and returns the records with a printable summary."""
    records = generate_dataset(n, seed, spec)
    path = records_to_csv(records, out_path)
    logger.info("wrote %d records to %s", len(records), path)
    return records, format_summary(summarize_records(records))
