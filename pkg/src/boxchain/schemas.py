"""Marshmallow schemas."""
import re
from typing import Dict, Iterable, List

from marshmallow import Schema
from sortedcontainers import SortedDict

from boxchain import fields
from boxchain.constants import CONFIGURATION_DOCS


def flatten_marshmallow_errors(errors: Dict) -> str:
    """Flatten Marshmallow errors to a string."""
    return "\n".join(
        "{}: {}".format(field, " ".join(messages) if isinstance(messages, list) else str(messages))
        for field, messages in SortedDict(errors).items()
    )


def line_numbers(text: str, keys: Iterable[str]) -> Dict[str, int]:
    """Find the line where each key is assigned in a flat ``key = value`` document."""
    found = {}
    for number, line in enumerate(text.splitlines(), start=1):
        match = re.match(r"\s*([A-Za-z0-9_\-]+)\s*=", line)
        if match and match.group(1) in keys and match.group(1) not in found:
            found[match.group(1)] = number
    return found


def located_errors(file_name: str, text: str, errors: Dict) -> List[str]:
    """One ``file:line: key: message`` line per invalid key, sorted by line."""
    lines = line_numbers(text, errors.keys())
    located = []
    for key, messages in SortedDict(errors).items():
        message = " ".join(messages) if isinstance(messages, list) else str(messages)
        located.append((lines.get(key, 0), "{}:{}: {}: {}".format(file_name, lines.get(key, 0), key, message)))
    return [text for _, text in sorted(located)]


def help_message(sentence: str, help_page: str) -> str:
    """Show help with the documentation page on validation errors."""
    clean_sentence = sentence.strip(" .")
    return "{}. See {}.".format(clean_sentence, help_page)


class BaseBoxchainSchema(Schema):
    """Base schema for all others, with default error messages."""

    error_messages = {"unknown": help_message("Unknown configuration key", CONFIGURATION_DOCS)}


class ScenarioSchema(BaseBoxchainSchema):
    """Validation schema for the flat scenario files."""

    seed = fields.Count()
    horizon_sec = fields.Positive()
    tau_sec = fields.Positive()
    capacity = fields.SpecString(fields.is_valid_capacity)
    rate_guard_fraction = fields.Float(validate=fields.Range(min=0, max=1))
    min_fee = fields.Count()
    fee = fields.Count()

    honest_agents = fields.Count(validate=fields.Range(min=1))
    honest_rate_per_min = fields.NonNegative()
    lazy_agents = fields.Count()
    lazy_rate_per_min = fields.NonNegative()
    malicious_agents = fields.Count()
    malicious_rate_per_min = fields.NonNegative()
    malicious_burst_size = fields.Count(validate=fields.Range(min=2))
    malicious_standing = fields.Integer(strict=True)
    standing_threshold = fields.Integer(strict=True)
    arrival_profile = fields.SpecString(fields.is_valid_profile)

    reissue_stuck = fields.Boolean()
    reissue_delay_sec = fields.NonNegative()
    pow_delay_sec = fields.NonNegative()

    reward_primal_validation = fields.Count()
    reward_dual_validation = fields.Count()
    reward_boxer_job = fields.Count()
    reward_genesis_job = fields.Count()
    reward_abnormal_report = fields.Count()

    attack_trials = fields.Count()
    attack_genesis_share = fields.Float(validate=fields.Range(min=0, max=1))

