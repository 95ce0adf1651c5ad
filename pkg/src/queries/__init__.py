from .evaluation_query import EvaluationQuery
