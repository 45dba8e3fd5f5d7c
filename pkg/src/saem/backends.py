class Backend:
    """
    Specifies the desired sparse factorization backend and any arguments
    passed to its constructor.

    ``Backend("superlu", permc_spec="COLAMD")`` selects SciPy's SuperLU with a
    different fill-reducing ordering; ``Backend("cholmod")`` selects
    scikit-sparse's CHOLMOD. ``"auto"`` picks CHOLMOD when it is installed.
    """

    def __init__(self, name, **kwargs):
        self.name = name
        self.kwargs = kwargs

    def __eq__(self, other):
        if not isinstance(other, Backend):
            return NotImplemented
        return self.name == other.name and self.kwargs == other.kwargs

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return "Backend(%r, **%r)" % (self.name, self.kwargs)
