from .dataset_service import DatasetService
from .clustering_service import ClusteringService
from .evaluation_service import EvaluationService
from .microaggregation_service import MicroaggregationService
from .benchmark_service import BenchmarkService
