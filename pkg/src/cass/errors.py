class CassError(Exception):
    """Base class for every error the analysis system reports to its callers."""
