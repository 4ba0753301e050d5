"""Exception hierarchy. Every error carries a machine-readable code for the CLI."""


class SaddleGraphError(Exception):
    """Base class; `code` is the stable machine-parsable identifier."""

    code = "error"

    def __init__(self, detail=""):
        super().__init__(detail)
        self.detail = detail


class ParseError(SaddleGraphError):
    code = "parse_error"


class FieldMismatch(SaddleGraphError):
    code = "field_mismatch"


class SingularMatrix(SaddleGraphError):
    code = "singular_matrix"


class GluingMismatch(SaddleGraphError):
    code = "gluing_mismatch"


class NonConvexPolygon(SaddleGraphError):
    code = "non_convex_polygon"


class Disconnected(SaddleGraphError):
    code = "disconnected"


class BadConeAngle(SaddleGraphError):
    code = "bad_cone_angle"


class StratumError(SaddleGraphError):
    code = "stratum_error"


class UnknownName(SaddleGraphError):
    code = "unknown_name"


class DirectionLeavesField(SaddleGraphError):
    code = "direction_leaves_field"


class NoHitWithinBudget(SaddleGraphError):
    code = "no_hit_within_budget"


class UnknownVertex(SaddleGraphError):
    code = "unknown_vertex"


class UnknownEdge(SaddleGraphError):
    code = "unknown_edge"


class UnknownFormat(SaddleGraphError):
    code = "unknown_format"


class SeedNotDisjoint(SaddleGraphError):
    code = "seed_not_disjoint"


class NotPairwiseDisjoint(SaddleGraphError):
    code = "not_pairwise_disjoint"


class AnchorInvalid(SaddleGraphError):
    code = "anchor_invalid"


class HypothesisViolated(SaddleGraphError):
    code = "hypothesis_violated"


class PreconditionViolated(SaddleGraphError):
    code = "precondition_violated"


class UnknownCylinderStatus(SaddleGraphError):
    code = "unknown_cylinder_status"


class BadGenerator(SaddleGraphError):
    code = "bad_generator"


class NoTriangleInTruncation(SaddleGraphError):
    code = "no_triangle_in_truncation"


class InternalGeometryError(SaddleGraphError):
    """Raised when an invariant the geometry guarantees is observed broken."""

    code = "internal_geometry_error"
