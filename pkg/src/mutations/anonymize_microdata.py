import json

from graphene import Boolean, Field, Float, Int, Mutation, String

from src.models.anonymization import AnonymizationConfig
from src.models.cluster_model import FuzzinessParams
from src.repositories.microdata_repository import MicrodataRepository
from src.services import EvaluationService, MicroaggregationService
from src.types import AnonymizationType, SubMicrodataType
from src.utils.constants import DEFAULT_SEED, ETA, INIT_FARTHEST, M_FUZZ, MAX_ITER, NORMALIZE_STRICT, TOL
from src.utils.helpers import count_range


class AnonymizeMicrodata(Mutation):
    class Arguments:
        table = String(required=True)
        schema_json = String(required=True)
        method = String(required=True)
        k = Int(required=True)
        groups_count = Int(required=False)
        seed = Int(default_value=DEFAULT_SEED)
        m_fuzz = Float(default_value=M_FUZZ)
        eta = Float(default_value=ETA)
        tol = Float(default_value=TOL)
        max_iter = Int(default_value=MAX_ITER)
        init = String(default_value=INIT_FARTHEST)
        c_min = Int(required=False)
        c_max = Int(required=False)
        conf_c_min = Int(required=False)
        conf_c_max = Int(required=False)
        normalize = String(default_value=NORMALIZE_STRICT)
        encode_categorical = Boolean(default_value=False)

    result = Field(lambda: AnonymizationType)

    def mutate(
        self,
        info,
        table,
        schema_json,
        method,
        k,
        groups_count=None,
        seed=DEFAULT_SEED,
        m_fuzz=M_FUZZ,
        eta=ETA,
        tol=TOL,
        max_iter=MAX_ITER,
        init=INIT_FARTHEST,
        c_min=None,
        c_max=None,
        conf_c_min=None,
        conf_c_max=None,
        normalize=NORMALIZE_STRICT,
        encode_categorical=False,
    ):
        schema = MicrodataRepository.parse_schema_text(schema_json)
        microdata, _ = MicrodataRepository.parse_table_text(table, schema, encode_categorical=encode_categorical)
        config = AnonymizationConfig(
            method,
            k,
            fuzz=FuzzinessParams(m_fuzz=m_fuzz, eta=eta, max_iter=max_iter, tol=tol, seed=seed, init=init),
            c_range=count_range(c_min, c_max),
            conf_c_range=count_range(conf_c_min, conf_c_max),
            groups_count=groups_count,
            normalize=normalize,
        )
        result = MicroaggregationService.anonymize(microdata, config)
        anonymization = AnonymizationType(
            method=method,
            k=config.k,
            k_max=EvaluationService.k_anonymity_check(result.masked)["k_max"],
            masked=MicrodataRepository.table_text(result.masked),
            labels=result.partition.labels.tolist(),
            subs=[SubMicrodataType(**sub.to_dict()) for sub in result.sub_structure],
            structure_json=json.dumps(result.to_dict()),
        )
        return AnonymizeMicrodata(result=anonymization)
