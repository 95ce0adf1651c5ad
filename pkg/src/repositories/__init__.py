from .microdata_repository import MicrodataRepository
from .report_repository import ReportRepository
