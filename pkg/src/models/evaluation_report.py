class DbrlResult:
    """
    Distance-based record linkage counts.

    Attributes:
        - `linked`              Masked records whose unique nearest original is their source.
        - `second_nearest`      Records whose source is the unique second-nearest original.
        - `not_linked`          The rest.
        - `expected_matches`    Tie-share estimate: sum over records of 1/|argmin set| when
                                the source is in the argmin set.
    """

    def __init__(self, linked, second_nearest, not_linked, expected_matches):
        self.linked = int(linked)
        self.second_nearest = int(second_nearest)
        self.not_linked = int(not_linked)
        self.expected_matches = float(expected_matches)

    @property
    def n(self):
        return self.linked + self.second_nearest + self.not_linked

    def percentages(self):
        n = self.n
        return {
            "linked_pct": 100.0 * self.linked / n,
            "second_nearest_pct": 100.0 * self.second_nearest / n,
            "expected_matches_pct": 100.0 * self.expected_matches / n,
        }

    def to_dict(self):
        return {
            "linked": self.linked,
            "second_nearest": self.second_nearest,
            "not_linked": self.not_linked,
            "expected_matches": self.expected_matches,
        }


class EvaluationReport:
    """
    Privacy and utility measures for an (original, masked) pair.

    Attributes:
        - `n`               Number of records.
        - `il`              Information loss summed over records.
        - `il_normalized`   il * 100 / n.
        - `dbrl`            DbrlResult over the quasi-identifiers.
        - `sse_per_group`   Confidential-attribute SSE of every group.
        - `min_sse`         Smallest group SSE.
        - `k_anonymous_at`  Smallest equivalence class of masked quasi-identifiers.
        - `k_requested`     k the verdict was asked for (optional).
        - `k_holds`         Whether k-anonymity holds for k_requested (optional).
        - `diversity_ok`    Every group spans all confidential classes of its scope
                            (None when no class labels were given).
    """

    def __init__(
        self,
        n,
        il,
        il_normalized,
        dbrl,
        sse_per_group,
        min_sse,
        k_anonymous_at,
        k_requested=None,
        k_holds=None,
        diversity_ok=None,
    ):
        self.n = int(n)
        self.il = float(il)
        self.il_normalized = float(il_normalized)
        self.dbrl = dbrl
        self.sse_per_group = [float(value) for value in sse_per_group]
        self.min_sse = float(min_sse)
        self.k_anonymous_at = int(k_anonymous_at)
        self.k_requested = k_requested
        self.k_holds = k_holds
        self.diversity_ok = diversity_ok

    def to_dict(self):
        """
        Flat JSON object; field order is the order of the human-readable table.
        """
        data = {
            "n": self.n,
            "il": self.il,
            "il_normalized": self.il_normalized,
        }
        data.update(self.dbrl.to_dict())
        data.update(self.dbrl.percentages())
        data.update(
            {
                "sse_per_group": self.sse_per_group,
                "min_sse": self.min_sse,
                "k_anonymous_at": self.k_anonymous_at,
                "k_requested": self.k_requested,
                "k_holds": self.k_holds,
                "diversity_ok": self.diversity_ok,
            }
        )
        return data
