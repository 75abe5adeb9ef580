"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures to
process status without a lookup table of its own:

    10  input errors (missing/unparsable files, invalid specs or profiles)
    11  geometry errors (wrong causal character, vanishing curvature, ...)
    12  numerical errors (non-finite states, ill-conditioned fits)
"""


class HelixToolkitError(ValueError):
    exit_code = 12


class InputError(HelixToolkitError):
    exit_code = 10


class GeometryError(HelixToolkitError):
    exit_code = 11


class NumericalError(HelixToolkitError):
    exit_code = 12


# -- metric ------------------------------------------------------------------

class NullVector(GeometryError):
    pass


# -- numerics ----------------------------------------------------------------

class GridTooShort(InputError):
    pass


class NonUniformGrid(InputError):
    pass


class EmptyInput(InputError):
    pass


class NonFiniteState(NumericalError):
    def __init__(self, s, message=None):
        self.s = float(s)
        super().__init__(message or f"non-finite state encountered at s={self.s:.17g}")


# -- curves ------------------------------------------------------------------

class OutOfDomain(InputError):
    pass


class OrderUnsupported(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NonMonotoneParameter(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NotSpacelike(GeometryError):
    def __init__(self, character, s=None):
        self.character = character
        self.s = s
        where = "" if s is None else f" at s={s:.17g}"
        super().__init__(f"curve is {character.value}{where}; only spacelike curves are supported")


class NotUnitSpeed(GeometryError):
    pass


class CurvatureVanishes(GeometryError):
    def __init__(self, index, s=None, value=None):
        self.index = int(index)
        self.s = s
        self.value = value
        msg = f"curvature k{self.index} vanishes"
        if s is not None:
            msg += f" at s={s:.17g}"
        if value is not None:
            msg += f" (|k{self.index}|={value:.3g})"
        super().__init__(msg)


class SignFlip(GeometryError):
    def __init__(self, which, s):
        self.which = which
        self.s = s
        super().__init__(f"{which} changes sign at s={s:.17g}")


# -- helix analysis -----------------------------------------------------------

class IllConditioned(NumericalError):
    pass


class NonPositiveRatio(GeometryError):
    pass


class WrongEpsilon(GeometryError):
    pass


# -- synthesis ---------------------------------------------------------------

class SignatureRuleViolation(InputError):
    def __init__(self, eps1, eps2):
        self.eps1, self.eps2 = eps1, eps2
        super().__init__(
            f"signature rule violated: (eps1, eps2) = ({eps1:+d}, {eps2:+d}); "
            "eps1 = -1 requires eps2 = +1"
        )


class RatioSignViolation(InputError):
    pass


class NonPositiveD(InputError):
    pass
