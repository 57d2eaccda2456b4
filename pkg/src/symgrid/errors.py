"""Exception types shared across the package.

Every failure mode is loud and specific; nothing falls back silently.
"""


class SymgridError(Exception):
    """Base class for all package errors."""


# -- field arithmetic ------------------------------------------------------

class NormTooLarge(SymgridError):
    """The S-free part of a norm exceeds the configured factoring bound."""


class NotSIntegral(SymgridError):
    """Element has denominators outside the allowed prime set S."""


class NotIntegralAtP(SymgridError):
    """Element has negative valuation at the reduction prime."""


class RamifiedPrime(SymgridError):
    """Prime divides a discriminant where an unramified prime is required."""


class ZeroElement(SymgridError):
    """The zero element was passed where a nonzero one is required."""


class FactorizationFailure(SymgridError):
    """No principal generator was found within the search bound."""


# -- local symbols ---------------------------------------------------------

class WildPlace(SymgridError):
    """Tame Hilbert symbol requested at a place dividing the order."""


class RootOfUnityMissing(SymgridError):
    """The local field does not contain enough roots of unity."""


class PrecisionExhausted(SymgridError):
    """The local solver's precision or node budget was exceeded."""


class NonUnitQuotient(SymgridError):
    """Grid quotients are required to be local units but are not."""


class WildSymbolUnavailable(SymgridError):
    """A wild Hilbert factor is needed but not computable for this field."""


# -- global symbols --------------------------------------------------------

class NotCoprime(SymgridError):
    """Arguments fail a coprimality precondition."""


class OrderMismatch(SymgridError):
    """The symbol order does not divide the residue field unit order."""


class SelfConjugatePrime(SymgridError):
    """Spin symbol of a prime equal to its conjugate is undefined."""


class NotCoprimeWithConjugate(SymgridError):
    """Half-spin symbol needs x coprime with its involution image."""


class BadD(SymgridError):
    """No valid relative discriminant representative coprime to the data."""


class CoprimalityViolated(SymgridError):
    """The gcd-adjusted ideals of a triple are not pairwise coprime."""


class UnsupportedCharacter(SymgridError):
    """Idele pairing supports only square-free Kummer characters."""


class ConditionsFail(SymgridError):
    """A triple does not satisfy the interlinking conditions."""


class GammaSearchExhausted(SymgridError):
    """Height-bounded search for a Heisenberg generator found nothing."""


class UnsupportedOrder(SymgridError):
    """Operation implemented only for order n = 2."""


# -- cochains --------------------------------------------------------------

class DegreeMismatch(SymgridError):
    """Cochain degrees or groups are incompatible."""


class BudgetExceeded(SymgridError):
    """Cohomology computation would exceed the configured size budget."""


class DependentCharacters(SymgridError):
    """Characters supplied to the group synthesis are linearly dependent."""


# -- grid combinatorics ----------------------------------------------------

class SizeTooSmall(SymgridError):
    """Difference operators need grid size at least 2."""


class CertificationImpossible(SymgridError):
    """Neither exhaustive nor sampled certification applies, or the
    exhaustive mode proved that no certifying function exists."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NoSolution(SymgridError):
    """The augmented-matrix solver hit an unreachable state (bug signal)."""


# -- prime search / grid building -----------------------------------------

class Exhausted(SymgridError):
    """Enumeration reached the norm bound without a witness."""

    def __init__(self, bound, message=""):
        super().__init__(message or f"search exhausted at norm bound {bound}")
        self.bound = bound


class IncompatibleTargets(SymgridError):
    """Search targets fail the reciprocity compatibility pre-check."""


class SearchExhausted(SymgridError):
    """Grid pipeline ran out of candidates; partial state is attached."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
