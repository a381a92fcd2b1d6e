"""Extractive summarization by sentence ranking plus hidden-structure filtering."""

from .cluster import ClusterModel, ClusterTrainConfig, FilterConfig
from .config import PipelineConfig
from .oracle import OracleConfig, OracleLabel
from .rank import RankModel, RankTrainConfig, SentenceRanking, Triplet
from .rouge import RougeScore
from .textproc import Document, Sentence

__version__ = "0.1.0"

__all__ = [
    "ClusterModel",
    "ClusterTrainConfig",
    "Document",
    "FilterConfig",
    "OracleConfig",
    "OracleLabel",
    "PipelineConfig",
    "RankModel",
    "RankTrainConfig",
    "RougeScore",
    "SentenceRanking",
    "Sentence",
    "Triplet",
]
