from .records import (
    AGENT_FOR_CATEGORY,
    AGENT_ROLES,
    CATEGORIES,
    DATA,
    ERROR_DICTIONARY,
    GRAMMAR,
    LongTermRecord,
    SEMANTIC,
    ShortTermRecord,
    dictionary_lookup,
)
from .manager import (
    LONG_TERM_TOP_K,
    MEMORY_COLLECTION,
    MemoryManager,
    MemoryViews,
    PROMOTE_SIMILARITY,
    SHORT_TERM_CAP,
)

__all__ = [
    "AGENT_FOR_CATEGORY",
    "AGENT_ROLES",
    "CATEGORIES",
    "DATA",
    "ERROR_DICTIONARY",
    "GRAMMAR",
    "LONG_TERM_TOP_K",
    "LongTermRecord",
    "MEMORY_COLLECTION",
    "MemoryManager",
    "MemoryViews",
    "PROMOTE_SIMILARITY",
    "SEMANTIC",
    "SHORT_TERM_CAP",
    "ShortTermRecord",
    "dictionary_lookup",
]
