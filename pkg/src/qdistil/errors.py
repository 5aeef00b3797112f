"""Exception types raised by the distillation library."""


class QDistilError(Exception):
    """Base class for all library-specific errors."""


class NotPositive(QDistilError):
    """A matrix expected to be positive semidefinite has a genuinely negative eigenvalue."""


class NumericalBreakdown(QDistilError):
    """An eigenproblem produced values outside its guaranteed domain (complex/negative dust too large)."""


class ZeroSpectrum(QDistilError):
    """All concurrence eigenvalues vanish, so eigenvalue ratios are undefined."""


class BadWeights(QDistilError):
    """Bell-diagonal weights are negative or do not sum to one."""


class FilterAnnihilates(QDistilError):
    """A local filter leaves the state with (numerically) zero success probability."""


class ProductState(QDistilError):
    """The state is an uncorrelated product; no filtering normal form of interest exists."""


class NotLoMMReducible(QDistilError):
    """The state cannot be locally filtered to a Bell-diagonal form (rank-deficient class)."""


class NotEntangled(QDistilError):
    """An operation requiring entanglement was given a separable state."""


class FilterSearchFailed(QDistilError):
    """No candidate one-sided filter lifted the fully entangled fraction above 1/2."""


class ZeroProbability(QDistilError):
    """All post-selected measurement branches have (numerically) zero probability."""


class TargetUnreachable(QDistilError):
    """Repeated distillation plateaued below the requested fidelity."""


class DegenerateChannel(QDistilError):
    """Both parity sectors of the pumping channel have zero weight."""


class NotUnitary(QDistilError):
    """A requested unitary completion does not exist (matrix element larger than one)."""
