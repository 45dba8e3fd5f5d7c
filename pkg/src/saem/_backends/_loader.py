from ..backends import Backend
from ..exceptions import BackendUnavailableError


class Loader:
    def __init__(self, name, loader, probe):
        self.name = name
        self.loader = loader
        self.probe = probe

    def __call__(self, *args, **kwargs):
        return self.loader(kwargs)

    def available(self):
        return self.probe()


def load_superlu_backend(kwargs):
    from .superlu_backend import SuperLUBackend

    return SuperLUBackend(**kwargs)


def load_cholmod_backend(kwargs):
    try:
        from .cholmod_backend import CholmodBackend
    except ImportError as e:
        raise BackendUnavailableError(
            "cholmod backend needs scikit-sparse (pip install saem[cholmod]): %s" % e
        )

    return CholmodBackend(**kwargs)


def _superlu_available():
    return True


def _cholmod_available():
    try:
        import sksparse.cholmod  # noqa: F401
    except ImportError:
        return False
    return True


def backend_directory():
    """
    We defer any heavy duty imports until the last minute.
    """
    loaders = [
        Loader(name="cholmod", loader=load_cholmod_backend, probe=_cholmod_available),
        Loader(name="superlu", loader=load_superlu_backend, probe=_superlu_available),
    ]
    return {loader.name: loader for loader in loaders}


def normalize_backend(backend):
    loaders_by_name = backend_directory()
    if backend is None:
        backend = Backend(name="auto")
    elif not isinstance(backend, Backend):
        backend = Backend(name=backend)

    if backend.name == "auto":
        # Preference order is the directory order; superlu is always there.
        for loader in loaders_by_name.values():
            if loader.available():
                return Backend(name=loader.name, **backend.kwargs)

    if backend.name not in loaders_by_name:
        raise ValueError("unknown backend specifier {}".format(backend.name))

    return backend


def load_backend(backend):
    loaders_by_name = backend_directory()
    loader = loaders_by_name[backend.name]
    return loader(**backend.kwargs)
