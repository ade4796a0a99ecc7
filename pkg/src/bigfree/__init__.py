"""Transfinite words, infinite Nielsen products and presentations of
automorphism groups of free groups."""

from .freegroup import FreeWord, NielsenMove, nielsen_reduce, x
from .verdict import BudgetExceeded, Status, Verdict
from .words import (
    EMPTY,
    Affine,
    LetterTemplate,
    NielsenLetter,
    Order,
    Pattern,
    TransfiniteWord,
    Transposition,
    concat,
    invert,
    word,
)

__all__ = [
    "EMPTY",
    "Affine",
    "BudgetExceeded",
    "FreeWord",
    "LetterTemplate",
    "NielsenLetter",
    "NielsenMove",
    "Order",
    "Pattern",
    "Status",
    "TransfiniteWord",
    "Transposition",
    "Verdict",
    "concat",
    "invert",
    "nielsen_reduce",
    "word",
    "x",
]
