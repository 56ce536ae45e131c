"""Exception hierarchy.

Every domain error derives from :class:`NsboxError` so the CLI can map them
to exit code 1 in one place.
"""


class NsboxError(Exception):
    pass


class InvalidBehaviour(NsboxError):
    """Attributes hold 0-based indices; messages print 1-based labels."""


class NegativeEntry(InvalidBehaviour):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__("negative entry {} at (a,b,x,y)={}".format(value, tuple(i + 1 for i in index)))


class NotNormalized(InvalidBehaviour):
    def __init__(self, x, y, total):
        self.x, self.y, self.total = x, y, total
        super().__init__(f"block (x,y)=({x + 1},{y + 1}) sums to {total}, not 1")


class SignalingAtoB(InvalidBehaviour):
    """Alice's marginal P(a|x) changes with Bob's input."""

    def __init__(self, a, x, y, y2):
        self.a, self.x, self.y, self.y2 = a, x, y, y2
        super().__init__(f"P(a={a + 1}|x={x + 1}) differs between y={y + 1} and y={y2 + 1}")


class SignalingBtoA(InvalidBehaviour):
    """Bob's marginal P(b|y) changes with Alice's input."""

    def __init__(self, b, x, x2, y):
        self.b, self.x, self.x2, self.y = b, x, x2, y
        super().__init__(f"P(b={b + 1}|y={y + 1}) differs between x={x + 1} and x={x2 + 1}")


class ShapeMismatch(NsboxError):
    pass


class SettingMismatch(NsboxError):
    pass


class OutOfAlphabet(NsboxError):
    pass


class BadK(NsboxError):
    pass


class BadSetting(NsboxError):
    pass


class WeightSum(NsboxError):
    pass


class CapExceeded(NsboxError):
    def __init__(self, what, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(f"{what}: {count} exceeds cap {cap}")


class NotLocal(NsboxError):
    pass


class NotViolating(NsboxError):
    pass


class NotBijective(NsboxError):
    pass


class BadRepresentative(NsboxError):
    pass


class BadProbability(NsboxError):
    pass


class SameOutput(NsboxError):
    pass


class EmptyInputs(NsboxError):
    pass


class BadSource(NsboxError):
    pass


class SupportInfeasible(NsboxError):
    pass


class CacheCorrupt(NsboxError):
    pass
