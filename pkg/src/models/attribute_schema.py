from src.utils.constants import (
    ROLES,
    ROLE_CONFIDENTIAL,
    ROLE_IDENTIFIER,
    ROLE_QUASI_IDENTIFIER,
)
from src.utils.errors import RoleAbsentError, SchemaMismatchError


class Attribute:
    """
    A single column of a microdata table.

    Attributes:
        - `name`    The column header.
        - `role`    One of identifier, quasi_identifier, confidential.
    """

    def __init__(self, name, role):
        if role not in ROLES:
            raise SchemaMismatchError(
                f"Attribute {name!r} has unknown role {role!r}; expected one of {', '.join(ROLES)}."
            )
        self.name = str(name)
        self.role = role

    def to_dict(self):
        return {"name": self.name, "role": self.role}

    @staticmethod
    def from_dict(data):
        return Attribute(name=data.get("name"), role=data.get("role"))

    def __eq__(self, other):
        return isinstance(other, Attribute) and (self.name, self.role) == (other.name, other.role)

    def __repr__(self):
        return f"Attribute({self.name!r}, {self.role!r})"


class AttributeSchema:
    """
    Ordered attribute list with roles; the role sets partition the columns.

    Attributes:
        - `attributes`  Ordered list of Attribute.

    A schema used for anonymization needs at least one quasi-identifier and one
    confidential attribute; `require_anonymizable` is False only for reduced
    schemas such as a single projected role.
    """

    def __init__(self, attributes, require_anonymizable=True):
        self.attributes = list(attributes)
        names = self.names
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise SchemaMismatchError(f"Duplicate attribute names in schema: {duplicates}")
        if not self.attributes:
            raise SchemaMismatchError("Schema has no attributes.")
        if require_anonymizable:
            if not self.has_role(ROLE_QUASI_IDENTIFIER):
                raise SchemaMismatchError("Schema needs at least one quasi_identifier attribute.")
            if not self.has_role(ROLE_CONFIDENTIAL):
                raise SchemaMismatchError("Schema needs at least one confidential attribute.")

    @property
    def names(self):
        return [attribute.name for attribute in self.attributes]

    @property
    def m(self):
        return len(self.attributes)

    def has_role(self, role):
        return any(attribute.role == role for attribute in self.attributes)

    def indices(self, role):
        """
        Column positions holding `role`, in schema order.
        """
        if role not in ROLES:
            raise RoleAbsentError(f"Unknown role {role!r}.")
        found = [i for i, attribute in enumerate(self.attributes) if attribute.role == role]
        if not found:
            raise RoleAbsentError(f"Schema has no {role} attributes.")
        return found

    def names_with_role(self, role):
        return [self.attributes[i].name for i in self.indices(role)]

    def in_order(self, names):
        """
        The same attributes arranged in the order of `names`.
        """
        by_name = {attribute.name: attribute for attribute in self.attributes}
        return AttributeSchema([by_name[name] for name in names])

    def without_role(self, role):
        """
        The schema minus every attribute with `role`.
        """
        return AttributeSchema(
            [attribute for attribute in self.attributes if attribute.role != role],
            require_anonymizable=role not in (ROLE_QUASI_IDENTIFIER, ROLE_CONFIDENTIAL),
        )

    def release_schema(self):
        """
        Schema of a released (masked) table: identifiers are not published.
        """
        if not self.has_role(ROLE_IDENTIFIER):
            return self
        return self.without_role(ROLE_IDENTIFIER)

    def to_dict(self):
        return {"attributes": [attribute.to_dict() for attribute in self.attributes]}

    @staticmethod
    def from_dict(data):
        """
        Builds a schema from {"attributes": [{"name": ..., "role": ...}, ...]}.
        """
        if not isinstance(data, dict) or not isinstance(data.get("attributes"), list):
            raise SchemaMismatchError('Schema must be a JSON object with an "attributes" list.')
        return AttributeSchema([Attribute.from_dict(item) for item in data["attributes"]])

    def __eq__(self, other):
        return isinstance(other, AttributeSchema) and self.attributes == other.attributes

    def __repr__(self):
        return f"AttributeSchema({self.attributes!r})"
