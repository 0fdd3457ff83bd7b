"""
Caches and JSON persistence.

The MRS cache is shared by every numerical module, so insertion is guarded by a
lock and is insert-once: the first value stored for a key wins.
"""

from pathlib import Path
from typing import Any, Dict, Hashable, List, Optional, Tuple, TypeVar
import json
import logging
import threading

V = TypeVar("V")


class InsertOnceCache:
    """
    Thread-safe dictionary with insert-once semantics.
    """

    def __init__(self, name: str):
        self.name = name
        self.logger = logging.getLogger(__name__)
        self._lock = threading.Lock()
        self._entries: Dict[Hashable, Any] = {}

    def get(self, key: Hashable) -> Optional[Any]:
        """Return the cached value or None."""
        return self._entries.get(key)

    def insert(self, key: Hashable, value: V) -> V:
        """
        Store value unless the key is present; return the stored value.
        """
        with self._lock:
            return self._entries.setdefault(key, value)

    def items(self) -> List[Tuple[Hashable, Any]]:
        """Snapshot of the (key, value) pairs."""
        with self._lock:
            return list(self._entries.items())

    def clear(self) -> None:
        """Drop every entry."""
        with self._lock:
            self._entries.clear()

    def __len__(self) -> int:
        return len(self._entries)


def write_json(path: Path, payload: Any) -> None:
    """
    Write JSON with sorted keys; floats use Python's round-trip repr.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        json.dump(payload, f, indent=1, sort_keys=True)
        f.write("\n")


def read_json(path: Path) -> Any:
    """Read a JSON document."""
    with open(Path(path), 'r') as f:
        return json.load(f)
