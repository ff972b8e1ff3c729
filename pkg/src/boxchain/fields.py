"""Custom Marshmallow fields and validators."""
from marshmallow import ValidationError, fields
from marshmallow.fields import Boolean, Float, Integer
from marshmallow.validate import Range
from more_itertools import always_iterable

from boxchain.boxes import CapacityDistribution
from boxchain.exceptions import BoxchainError
from boxchain.generic import pretty_exception
from boxchain.stochastics import IntensityFunction

__all__ = ("Boolean", "Float", "Integer", "Range")


def is_valid_capacity(value: str) -> bool:
    """Validate a box capacity distribution like ``uniform:4:8``."""
    try:
        CapacityDistribution.parse(value)
    except (BoxchainError, ValueError) as err:
        raise ValidationError(pretty_exception(err, "Invalid capacity distribution")) from err
    return True


def is_valid_profile(value: str) -> bool:
    """Validate an arrival profile; the empty string means a constant rate."""
    if not value.strip():
        return True
    try:
        IntensityFunction.parse(value)
    except (BoxchainError, ValueError) as err:
        raise ValidationError(pretty_exception(err, "Invalid arrival profile")) from err
    return True


class SpecString(fields.String):
    """A string field checked by a domain parser."""

    def __init__(self, parser, **kwargs):
        validate = list(always_iterable(kwargs.pop("validate", None)))
        validate.append(parser)
        super().__init__(validate=validate, **kwargs)


class Positive(fields.Float):
    """A float that must be strictly positive."""

    def __init__(self, **kwargs):
        validate = list(always_iterable(kwargs.pop("validate", None)))
        validate.append(Range(min=0, min_inclusive=False))
        super().__init__(validate=validate, **kwargs)


class NonNegative(fields.Float):
    """A float that must not be negative."""

    def __init__(self, **kwargs):
        validate = list(always_iterable(kwargs.pop("validate", None)))
        validate.append(Range(min=0))
        super().__init__(validate=validate, **kwargs)


class Count(fields.Integer):
    """A natural number."""

    def __init__(self, **kwargs):
        validate = list(always_iterable(kwargs.pop("validate", None)))
        validate.append(Range(min=0))
        super().__init__(strict=True, validate=validate, **kwargs)
