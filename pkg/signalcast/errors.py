class SignalcastError(Exception):
    """Base error. `exit_code` is what the CLI returns when this escapes a command."""

    exit_code = 1

    def __init__(self, message):
        super().__init__(message)
        self.message = message


class ConfigError(SignalcastError):
    exit_code = 1


class DataError(SignalcastError):
    exit_code = 2


class DuplicateSensorError(DataError):
    def __init__(self, sensor_id):
        super().__init__(f"duplicate sensor id: {sensor_id!r}")
        self.sensor_id = sensor_id


class UnknownSensorError(DataError, KeyError):
    def __init__(self, sensor_id):
        super().__init__(f"unknown sensor id: {sensor_id!r}")
        self.sensor_id = sensor_id

    def __str__(self):
        return self.message


class TrainingDivergedError(SignalcastError):
    exit_code = 3
