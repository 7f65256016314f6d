"""Hand-built instances with known worst-case behaviour

Functions:
    - tightness_fixture: Instances on which the planners' guarantees are tight
    - greedy_trap_instance: Two arms on which the greedy baseline is
      arbitrarily bad
    - primes_from: Smallest primes at or above a bound
"""

import math

from recovering_bandits._utils import round_up_to_step
from recovering_bandits.instance import RecoveryInstance


def primes_from(start: int, count: int) -> list[int]:
    """The `count` smallest primes that are >= start"""
    primes = []
    candidate = max(2, start)
    while len(primes) < count:
        if all(candidate % p for p in range(2, math.isqrt(candidate) + 1)):
            primes.append(candidate)
        candidate += 1
    return primes


def tightness_fixture(kind: str, param: int) -> RecoveryInstance:
    """Instance on which a planner's approximation guarantee is (nearly) tight

    Parameters
    ----------
    kind : str
        'theorem2': param = K >= 2. K - 1 constant arms with reward
        1/sqrt(K ln K) and floor(sqrt(K / ln K)) arms paying p only after p
        periods, p the smallest primes at or above that count.
        'half_ratio': param = l >= 0. Arm 1 is constant 1 and arm 2 pays
        2^l + 1 only after 2^l + 1 periods, with K = 1.
    param : int
        K or l, see above

    Returns
    -------
    RecoveryInstance
        The fixture, with default_k set

    Raises
    ------
    ValueError
        If the kind is unknown or the parameter out of range
    """
    if kind == "theorem2":
        if param < 2:
            raise ValueError(f"theorem2 needs K >= 2, got {param}")
        k = param
        small = 1.0 / math.sqrt(k * math.log(k))
        n_big = math.floor(math.sqrt(k / math.log(k)))
        curves = [[small] for _ in range(k - 1)]
        curves += [_step_curve(p) for p in primes_from(n_big, n_big)]
        return _fixture(curves, default_k=k)

    if kind == "half_ratio":
        if param < 0:
            raise ValueError(f"half_ratio needs l >= 0, got {param}")
        recovery = 2**param + 1
        return _fixture([[1.0], _step_curve(recovery)], default_k=1)

    raise ValueError(f"Unknown fixture kind '{kind}', expected 'theorem2' or 'half_ratio'")


def greedy_trap_instance(small: float, big: float) -> RecoveryInstance:
    """Arm 1 always pays `small`, arm 2 pays 1 right after a pull and `big` otherwise

    With small < 1 < big the greedy baseline pulls arm 2 every period and
    earns 1 per period, while alternating the two arms earns about
    (big + small) / 2.
    """
    if not 0 <= small < 1 < big:
        raise ValueError(f"Expected 0 <= small < 1 < big, got small={small}, big={big}")
    return _fixture([[small], [1.0, big]], default_k=1)


def _step_curve(recovery: int) -> list[float]:
    """Reward `recovery` once `recovery` periods have passed, 0 before"""
    return [0.0] * (recovery - 1) + [float(recovery)]


def _fixture(curves: list[list[float]], default_k: int) -> RecoveryInstance:
    largest = max(max(curve) for curve in curves)
    return RecoveryInstance.new(curves, r_max=round_up_to_step(largest), default_k=default_k)
