from graphene import Boolean, Field, Float, Int, List, ObjectType, String


class AttributeType(ObjectType):
    """
    A column of a microdata table.

    Attributes:
        - `name`: The column header.
        - `role`: identifier, quasi_identifier or confidential.
    """

    name = String(required=True)
    role = String(required=True)

    def __init__(self, **kwargs):
        for key, value in kwargs.items():
            setattr(self, key, value)


class ColumnStatsType(ObjectType):
    """
    Descriptive statistics of one attribute, in native units.
    """

    name = String(required=True)
    min = Float()
    max = Float()
    mean = Float()
    std = Float()

    def __init__(self, **kwargs):
        for key, value in kwargs.items():
            setattr(self, key, value)


class InspectionType(ObjectType):
    """
    Shape, roles and statistics of a microdata table.

    Attributes:
        - `n`: Number of records.
        - `m`: Number of attributes.
        - `attributes`: The schema, in column order.
        - `stats`: Per-attribute statistics.
        - `constant_columns`: Attributes that strict normalization rejects.
    """

    n = Int(required=True)
    m = Int(required=True)
    attributes = List(AttributeType)
    stats = List(ColumnStatsType)
    constant_columns = List(String)

    def __init__(self, **kwargs):
        for key, value in kwargs.items():
            setattr(self, key, value)


class DbrlType(ObjectType):
    """
    Distance-based record linkage counts and their share of the records.
    """

    linked = Int()
    second_nearest = Int()
    not_linked = Int()
    expected_matches = Float()
    linked_pct = Float()
    second_nearest_pct = Float()
    expected_matches_pct = Float()

    def __init__(self, **kwargs):
        for key, value in kwargs.items():
            setattr(self, key, value)


class EvaluationReportType(ObjectType):
    """
    Privacy and utility measures of a masked release.

    Attributes:
        - `n`: Number of records.
        - `il`: Information loss summed over records.
        - `il_normalized`: il * 100 / n.
        - `dbrl`: Record linkage results over the quasi-identifiers.
        - `sse_per_group`: Confidential-attribute SSE of every group.
        - `min_sse`: Smallest group SSE.
        - `k_anonymous_at`: Smallest set of records sharing masked quasi-identifiers.
        - `k_requested`: The k asked about (optional).
        - `k_holds`: Whether k-anonymity holds for k_requested (optional).
        - `diversity_ok`: Whether every group spans the classes of its scope (optional).
    """

    n = Int(required=True)
    il = Float()
    il_normalized = Float()
    dbrl = Field(DbrlType)
    sse_per_group = List(Float)
    min_sse = Float()
    k_anonymous_at = Int()
    k_requested = Int(required=False)
    k_holds = Boolean(required=False)
    diversity_ok = Boolean(required=False)

    def __init__(self, **kwargs):
        for key, value in kwargs.items():
            setattr(self, key, value)


class SubMicrodataType(ObjectType):
    """
    One quasi-identifier block of an hm_pfsom run.
    """

    index = Int()
    size = Int()
    cs = Int()
    class_sizes = List(Int)
    k_effective = Int()
    groups = Int()

    def __init__(self, **kwargs):
        for key, value in kwargs.items():
            setattr(self, key, value)


class AnonymizationType(ObjectType):
    """
    Result of an anonymization run.

    Attributes:
        - `method`: The method used.
        - `k`: The privacy parameter.
        - `k_max`: Smallest set of records sharing masked quasi-identifiers.
        - `masked`: Masked table as CSV text, identifier columns removed.
        - `labels`: Group of every record.
        - `subs`: Sub-microdata structure (hm_pfsom only).
        - `structure_json`: Structure file contents; evaluate accepts it back.
    """

    method = String(required=True)
    k = Int(required=True)
    k_max = Int()
    masked = String()
    labels = List(Int)
    subs = List(SubMicrodataType)
    structure_json = String()

    def __init__(self, **kwargs):
        for key, value in kwargs.items():
            setattr(self, key, value)
