from graphene import ObjectType, Schema

from src.mutations import AnonymizeMicrodata
from src.queries import EvaluationQuery


class Query(EvaluationQuery, ObjectType):
    pass


class Mutation(ObjectType):
    anonymize_microdata = AnonymizeMicrodata.Field(
        description="Masks a CSV table with the chosen method; returns the masked CSV and its groups.",
    )


# auto_camelcase=True (default): GraphQL API uses camelCase (anonymizeMicrodata, schemaJson, kMax, etc.)
schema = Schema(query=Query, mutation=Mutation, auto_camelcase=True)
