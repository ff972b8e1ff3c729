"""Type definitions."""
from pathlib import Path
from typing import Any, Dict, FrozenSet, Hashable, Tuple, Union

PathOrStr = Union[Path, str]
JsonDict = Dict[str, Any]
Element = Hashable
Edge = Tuple[Element, Element]
EdgeSet = FrozenSet[Edge]
TxId = int
AgentId = int
Digest = bytes
SpendKey = Tuple[AgentId, int]
