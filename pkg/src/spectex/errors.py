"""Exception types shared across the toolkit."""


class InputError(Exception):
    """Unusable user input: unreadable files, empty meshes, missing data."""


class NumericalError(Exception):
    """A numerical procedure failed: factorization breakdown, NaNs, divergence."""
