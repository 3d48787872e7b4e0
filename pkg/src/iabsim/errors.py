"""Exception types raised by the simulator."""


class IABSimError(Exception):
    """Base class for every error raised by iabsim."""

    module = "iabsim"


class ConfigError(IABSimError, ValueError):
    """Invalid configuration value or malformed config file."""

    module = "config"

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class PlacementError(IABSimError):
    """Rejection sampling could not honour the minimum UE separation."""

    module = "scenario"


class DegenerateLinkError(IABSimError, ValueError):
    """Transmitter and receiver coincide, so no departure angle exists."""

    module = "channel"


class RankDeficientChannelError(IABSimError, ValueError):
    """Channel Gram matrix is singular or too badly conditioned for ZF."""

    module = "beamforming"


class InfeasiblePowerError(IABSimError, ValueError):
    """Donor power left for aerial users after the backhaul share is not positive."""

    module = "beamforming"


class ZeroPrecoderError(IABSimError, ValueError):
    """Precoder product is identically zero and cannot be power-normalised."""

    module = "beamforming"


class DegenerateRatesError(IABSimError, ValueError):
    """Rates passed to the bandwidth split are all zero."""

    module = "allocation"


class InfeasibleAllocationError(IABSimError):
    """No bandwidth split satisfies the backhaul constraint."""

    module = "allocation"
