import hashlib
import json
from typing import Any


def canonical_hash(payload: Any) -> str:
    """SHA-256 of the sorted-key JSON dump of ``payload``."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()
