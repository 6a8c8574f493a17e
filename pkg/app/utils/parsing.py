from __future__ import annotations
from typing import Optional, Tuple

from app.errors import ConfigError


def parse_word(text: str) -> Tuple[int, ...]:
    """
    Слово в конфиге и CSV пишется цифрами без разделителей: "121" -> (1, 2, 1).
    Пустая строка — пустое слово.
    """
    text = (text or "").strip()
    if not text.isdigit() and text:
        raise ConfigError(f"Слово должно состоять из цифр 1..9: {text!r}")
    symbols = tuple(int(ch) for ch in text)
    if any(s == 0 for s in symbols):
        raise ConfigError(f"Символ 0 недопустим, алфавит начинается с 1: {text!r}")
    return symbols


def parse_function_spec(spec: str) -> Tuple[Optional[int], Tuple[int, ...]]:
    """
    Разбирает спецификацию тестовой функции (индикатора):
    - 'one'            -> константа 1
    - 'cyl:12'         -> индикатор цилиндра [12]
    - 'x:1'            -> индикатор {x = 1}
    - 'x:1+cyl:12'     -> индикатор {x = 1} ∩ [12]
    Возвращает (x или None, слово).
    """
    spec = (spec or "").strip().lower()
    if spec == "one":
        return None, ()

    x: Optional[int] = None
    word: Tuple[int, ...] = ()
    seen = set()
    for part in spec.split("+"):
        key, sep, value = part.strip().partition(":")
        if not sep or key in seen:
            raise ConfigError(f"Некорректная спецификация функции: {spec!r}")
        seen.add(key)
        if key == "x":
            if not value.isdigit() or int(value) < 1:
                raise ConfigError(f"Некорректное значение x в {spec!r}")
            x = int(value)
        elif key == "cyl":
            word = parse_word(value)
        else:
            raise ConfigError(f"Неизвестный вид функции {key!r} в {spec!r}")
    return x, word
