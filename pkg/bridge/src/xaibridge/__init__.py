"""Exporter for the rule-aggregation pipeline: boosted-tree black box plus
score-based local explainers, emitting the exchange-format files."""

__version__ = "0.1.0"

from .schema import BridgeError, Schema, load_schema
from .export import ExportJob, run_export

__all__ = ["BridgeError", "Schema", "load_schema", "ExportJob", "run_export"]
