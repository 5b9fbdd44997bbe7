from typing import Optional


class GaussianVideoError(Exception):
    """Base class for every error the codec raises on purpose."""


class ConfigError(GaussianVideoError, ValueError):
    pass


class ShapeMismatchError(GaussianVideoError, ValueError):
    pass


class NonFiniteError(GaussianVideoError, ValueError):
    """NaN/inf found in parameters or gradients; carries where it was found."""

    def __init__(
        self,
        message: str,
        group: Optional[str] = None,
        epoch: Optional[int] = None,
        frame: Optional[int] = None,
    ):
        self.message = message
        self.group = group
        self.epoch = epoch
        self.frame = frame
        context = []
        if group is not None:
            context.append(f"group={group}")
        if epoch is not None:
            context.append(f"epoch={epoch}")
        if frame is not None:
            context.append(f"frame={frame}")
        suffix = f" ({', '.join(context)})" if context else ""
        super().__init__(f"{message}{suffix}")

    def with_context(self, epoch: int, frame: int) -> "NonFiniteError":
        return NonFiniteError(self.message, group=self.group, epoch=epoch, frame=frame)


# Bitstream

class BitstreamError(GaussianVideoError, ValueError):
    pass


class BadMagicError(BitstreamError):
    pass


class VersionMismatchError(BitstreamError):
    pass


class TruncatedPayloadError(BitstreamError):
    pass


class ChecksumError(BitstreamError):
    pass


# Frame I/O

class FrameIOError(GaussianVideoError):
    pass


class EmptySourceError(FrameIOError):
    pass


class MixedDimensionsError(FrameIOError):
    pass


class UnreadableFrameError(FrameIOError):
    pass


class SizeMismatchError(FrameIOError):
    pass


class UnwritablePathError(FrameIOError):
    pass
