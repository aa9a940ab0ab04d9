"""FX, FFX, double encryption and Even-Mansour over ideal primitives."""

from __future__ import annotations

from dataclasses import dataclass

from .primitives import IdealCipher, Permutation, RandomFunction


def _fits(value: int, width: int, what: str) -> None:
    if not 0 <= value < (1 << width):
        raise ValueError(f"{what}={value} does not fit in {width} bits")


@dataclass(frozen=True)
class FxKey:
    k1: int
    k2: int


@dataclass(frozen=True)
class DeKey:
    k1: int
    k2: int


@dataclass(frozen=True)
class FfxKey:
    k1: int
    k2: int


def _check_fx(E, key, x):
    _fits(key.k1, E.k, "k1")
    _fits(key.k2, E.n, "k2")
    _fits(x, E.n, "block")


def fx_enc(E: IdealCipher, key: FxKey, x: int) -> int:
    """E_{k1}(x ^ k2) ^ k2, one whitening key on both sides."""
    _check_fx(E, key, x)
    return E.enc(key.k1, x ^ key.k2) ^ key.k2


def fx_dec(E: IdealCipher, key: FxKey, y: int) -> int:
    _check_fx(E, key, y)
    return E.dec(key.k1, y ^ key.k2) ^ key.k2


def ffx_eval(H: RandomFunction, key: FfxKey, x: int) -> int:
    """H(k1, x ^ k2); no outer whitening."""
    _fits(key.k1, H.k, "k1")
    _fits(key.k2, H.n, "k2")
    _fits(x, H.n, "block")
    return H(key.k1, x ^ key.k2)


def de_enc(E: IdealCipher, key: DeKey, x: int) -> int:
    _fits(key.k1, E.k, "k1")
    _fits(key.k2, E.k, "k2")
    _fits(x, E.n, "block")
    return E.enc(key.k2, E.enc(key.k1, x))


def de_dec(E: IdealCipher, key: DeKey, y: int) -> int:
    _fits(key.k1, E.k, "k1")
    _fits(key.k2, E.k, "k2")
    _fits(y, E.n, "block")
    return E.dec(key.k1, E.dec(key.k2, y))


def em_enc(P: Permutation, k2: int, x: int) -> int:
    _fits(k2, P.width, "k2")
    _fits(x, P.width, "block")
    return P(x ^ k2) ^ k2


def em_dec(P: Permutation, k2: int, y: int) -> int:
    _fits(k2, P.width, "k2")
    _fits(y, P.width, "block")
    return P.inverse(y ^ k2) ^ k2


class KeyedConstruction:
    """Binds a construction, its key and an ideal primitive into one map.

    ``kind`` is one of ``fx``, ``ffx``, ``de``, ``em``.  ``em`` takes a
    one-key ideal cipher (k=0) so all four share the ``prim`` interface.
    """

    KINDS = ("fx", "ffx", "de", "em")

    def __init__(self, kind: str, prim, key):
        if kind not in self.KINDS:
            raise ValueError(f"unknown construction {kind!r}")
        self.kind, self.prim, self.key = kind, prim, key

    @property
    def invertible(self) -> bool:
        return self.kind != "ffx"

    def __call__(self, x: int) -> int:
        if self.kind == "fx":
            return fx_enc(self.prim, self.key, x)
        if self.kind == "ffx":
            return ffx_eval(self.prim, self.key, x)
        if self.kind == "de":
            return de_enc(self.prim, self.key, x)
        _fits(x, self.prim.n, "block")
        return self.prim.enc(0, x ^ self.key) ^ self.key

    def inverse(self, y: int) -> int:
        if self.kind == "fx":
            return fx_dec(self.prim, self.key, y)
        if self.kind == "de":
            return de_dec(self.prim, self.key, y)
        if self.kind == "em":
            _fits(y, self.prim.n, "block")
            return self.prim.dec(0, y ^ self.key) ^ self.key
        raise ValueError("FFX is not invertible")
