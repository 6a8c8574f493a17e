# app/oracle/preimages.py
"""
Наивная итерация оператора переноса перебором всех d^n прообразов точки.
Не использует матричное представление: эталон для thermo.transfer.
"""
from __future__ import annotations

import logging
import math
from itertools import product

from app.config import DEFAULT_TOLERANCES, Tolerances
from app.errors import DomainError, ResourceError
from app.models.potential import LocallyConstantPotential
from app.models.symbolic import Word

log = logging.getLogger(__name__)


def naive_transfer_power(
    potential: LocallyConstantPotential,
    u: LocallyConstantPotential,
    n: int,
    y: Word,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """
    L_A^n(u)(y) = Σ_{|w| = n} e^{S_n A(w·y)} u(w·y), S_n A — сумма Биркгофа
    A(w·y) + A(σ(w·y)) + ... + A(σ^{n-1}(w·y)), накапливаемая напрямую.

    Точка y задаётся словом длины не меньше m-1; результат не делится на λ^n.
    """
    if n < 1:
        raise DomainError(f"Число итераций должно быть >= 1, получено {n}")
    if u.alphabet != potential.alphabet:
        raise DomainError("Потенциал и функция заданы над разными алфавитами")
    alphabet = potential.alphabet
    alphabet.check_word(y)
    if len(y) < potential.depth - 1:
        raise DomainError(
            f"Точка задана словом длины {len(y)}, а потенциалу глубины {potential.depth} "
            f"нужно не меньше {potential.depth - 1}"
        )
    if u.depth > n + len(y):
        raise DomainError(f"Глубина функции {u.depth} больше длины прообраза {n + len(y)}")

    count = alphabet.d ** n
    if count > tolerances.preimage_cap:
        raise ResourceError(
            f"Перебор {alphabet.d}^{n} = {count} прообразов превышает лимит {tolerances.preimage_cap}"
        )

    terms = []
    for w in product(alphabet.symbols, repeat=n):
        point = w + y.symbols
        birkhoff = math.fsum(potential.value(point[k:]) for k in range(n))
        terms.append(math.exp(birkhoff) * u.value(point))

    total = math.fsum(terms)
    log.debug("naive_transfer_power: n=%d, y=%s, прообразов %d", n, y, count)
    return total
