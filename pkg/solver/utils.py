import re
import math


def parse_budget(txt):
    """
    Parses an evaluation budget written as a plain integer, a power ("2^24"),
    a float literal ("1e6") or with a decimal suffix ("16M").
    """
    if isinstance(txt, int):
        return txt

    txt = str(txt).strip().replace('_', '')
    m = re.match(r'^([0-9]+)\s*\^\s*([0-9]+)$', txt)
    if m:
        return int(m.group(1)) ** int(m.group(2))

    m = re.match(r'^([0-9]+(\.[0-9]+)?)\s*(K|M|G|T)?$', txt)
    if m:
        multipliers = ['K', 'M', 'G', 'T']
        mult = 1
        if m.group(3):
            mult = 10 ** (3 * (1 + multipliers.index(m.group(3))))
        return int(float(m.group(1)) * mult)

    try:
        value = float(txt)
    except ValueError:
        raise ValueError(f"Invalid budget: {txt}")
    if not math.isfinite(value) or value < 0 or value != int(value):
        raise ValueError(f"Invalid budget: {txt}")
    return int(value)


def parse_bool(value):
    if value in [True, 1, 'yes', 'on', 'enable', 'enabled']:
        return True
    if value in [False, 0, 'no', 'off', 'disable', 'disabled']:
        return False
    raise ValueError(f"Could not convert {value} to bool")


def sizes_from_probs(probs):
    """Deterministic delays 1/p; a zero probability never fits anywhere."""
    return [math.inf if p <= 0 else 1.0 / p for p in probs]
