"""Exception hierarchy shared by every module."""


class DighError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(DighError, ValueError):
    pass


class DanglingNodeError(DighError):
    """A vertex has zero out-degree, so P = D^-1 W is undefined."""

    def __init__(self, vertices):
        self.vertices = list(vertices)
        super().__init__(
            f"{len(self.vertices)} vertex(es) with zero out-degree "
            f"(first: {self.vertices[:5]}); use google_matrix or rank_one_walk"
        )


class ConnectivityError(DighError):
    def __init__(self, n_components):
        self.n_components = n_components
        super().__init__(
            f"graph is not strongly connected ({n_components} components); "
            "restrict with largest_scc_subgraph or ergodicize with "
            "google_matrix / rank_one_walk"
        )


class ConvergenceError(DighError):
    def __init__(self, message, iterations):
        self.iterations = iterations
        super().__init__(f"{message} after {iterations} iterations")


class DegenerateStationaryError(DighError):
    pass


class NonDiagonalizableError(DighError):
    def __init__(self, residual, cond):
        self.residual = residual
        self.cond = cond
        super().__init__(
            f"operator is numerically non-diagonalizable: reconstruction "
            f"residual {residual:.3e}, eigenbasis condition number {cond:.3e}"
        )


class NoConjugatePairError(DighError):
    pass


class SingularModelError(DighError):
    pass


class SolverError(DighError):
    pass


class DesignInvalidError(DighError):
    pass


class EmptyBasisError(DighError):
    pass


class SingularTransformError(DighError):
    pass
