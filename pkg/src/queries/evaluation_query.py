from graphene import Boolean, Field, Int, ObjectType, String

from src.repositories.microdata_repository import MicrodataRepository
from src.services.dataset_service import DatasetService
from src.services.evaluation_service import EvaluationService
from src.types import (
    AttributeType,
    ColumnStatsType,
    DbrlType,
    EvaluationReportType,
    InspectionType,
)


class EvaluationQuery(ObjectType):
    evaluate = Field(
        EvaluationReportType,
        original=String(required=True, description="Original table as CSV text"),
        masked=String(required=True, description="Masked table as CSV text"),
        schema_json=String(required=True, description="Schema JSON"),
        k=Int(required=False, description="Report whether k-anonymity holds for this k"),
        structure_json=String(required=False, description="Structure JSON of the run (groups and classes)"),
        encode_categorical=Boolean(default_value=False),
    )
    inspect = Field(
        InspectionType,
        table=String(required=True, description="Table as CSV text"),
        schema_json=String(required=True, description="Schema JSON"),
        encode_categorical=Boolean(default_value=False),
    )

    def resolve_evaluate(self, info, original, masked, schema_json, k=None, structure_json=None, encode_categorical=False):
        """
        Resolver for the privacy and utility measures of a masked table.
        """
        schema = MicrodataRepository.parse_schema_text(schema_json)
        original_md, _ = MicrodataRepository.parse_table_text(original, schema, encode_categorical=encode_categorical)
        masked_md, _ = MicrodataRepository.parse_table_text(
            masked, schema, allow_missing_identifiers=True, encode_categorical=encode_categorical
        )
        partition = class_labels = scope = None
        if structure_json:
            partition, class_labels, scope = MicrodataRepository.parse_structure_text(structure_json, original_md.n)
        report = EvaluationService.evaluate(
            original_md, masked_md, partition=partition, class_labels=class_labels, k=k, scope=scope
        )
        data = report.to_dict()
        dbrl = DbrlType(**report.dbrl.to_dict(), **report.dbrl.percentages())
        return EvaluationReportType(
            n=data["n"],
            il=data["il"],
            il_normalized=data["il_normalized"],
            dbrl=dbrl,
            sse_per_group=data["sse_per_group"],
            min_sse=data["min_sse"],
            k_anonymous_at=data["k_anonymous_at"],
            k_requested=data["k_requested"],
            k_holds=data["k_holds"],
            diversity_ok=data["diversity_ok"],
        )

    def resolve_inspect(self, info, table, schema_json, encode_categorical=False):
        """
        Resolver for the shape and statistics of a table.
        """
        schema = MicrodataRepository.parse_schema_text(schema_json)
        microdata, _ = MicrodataRepository.parse_table_text(table, schema, encode_categorical=encode_categorical)
        stats = DatasetService.column_stats(microdata)
        return InspectionType(
            n=microdata.n,
            m=microdata.m,
            attributes=[AttributeType(**attribute.to_dict()) for attribute in schema.attributes],
            stats=[ColumnStatsType(name=name, **values) for name, values in stats.to_dict().items()],
            constant_columns=stats.constant_columns(),
        )
