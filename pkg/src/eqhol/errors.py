"""Exception hierarchy shared by all modules."""


class KernelError(Exception):
    pass


class ParseError(KernelError):
    def __init__(self, message, line=None, col=None, source=None):
        self.line = line
        self.col = col
        self.source = source
        where = ""
        if line is not None:
            where = f"{source or '<input>'}:{line}:{col}: "
        super().__init__(where + message)
        self.message = message


class TypeCheckError(KernelError):
    pass


class UnifyError(TypeCheckError):
    pass


class FuelExhausted(KernelError):
    pass


class CapExceeded(KernelError):
    def __init__(self, ty, size, cap):
        self.ty = ty
        self.size = size
        self.cap = cap
        super().__init__(f"domain of type {ty} has {size} elements, cap is {cap}")


class TheoryError(KernelError):
    pass
