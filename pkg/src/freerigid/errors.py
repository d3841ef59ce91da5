"""Exception hierarchy. Every domain error carries a short machine code used by the CLI."""


class FreeGroupError(ValueError):
    code = "domain"


class InputError(FreeGroupError):
    code = "input"


class FiniteIndexError(FreeGroupError):
    code = "finite_index"


class NotAutomorphismError(FreeGroupError):
    code = "not_automorphism"


class NotTrainTrackError(FreeGroupError):
    code = "not_train_track"


class DepthExhaustedError(FreeGroupError):
    code = "depth_exhausted"


class UnboundedError(FreeGroupError):
    code = "unbounded"


class InsufficientDepthError(FreeGroupError):
    code = "insufficient_depth"


class ConnectorSearchError(FreeGroupError):
    code = "connector_search_failed"
