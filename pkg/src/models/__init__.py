from .attribute_schema import Attribute, AttributeSchema
from .microdata import Microdata, ColumnStats
from .cluster_model import FuzzinessParams, ClusterModel, PartitionSelection
from .partition import Partition
from .anonymization import AnonymizationConfig, AnonymizedResult, SubMicrodata
from .evaluation_report import DbrlResult, EvaluationReport
from .sweep import SweepSpec, SweepRow
from .synthetic import SyntheticSpec, SyntheticMicrodata
