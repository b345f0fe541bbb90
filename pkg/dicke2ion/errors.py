class Dicke2IonError(Exception):
    exit_code = 1


class ConfigError(Dicke2IonError, ValueError):
    exit_code = 2


class NumericalError(Dicke2IonError, RuntimeError):
    exit_code = 3


class MemoryGuardError(ConfigError):
    exit_code = 4


class Dicke2IonWarning(UserWarning):
    pass
