"""Named (p, q) parameter profiles.

Every profile has p prime, p = 2 (mod 3), q prime and q | p + 1. The two
larger ones came out of ``scripts/find_params.py``.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class Profile:
    name: str
    p: int
    q: int
    # prime for the Diffie-Hellman group when q itself is too small to use
    dh_prime: int | None = None

    @property
    def cofactor(self) -> int:
        return (self.p + 1) // self.q


TOY11 = Profile("toy11", 11, 3, dh_prime=1019)
TOY29 = Profile("toy29", 29, 5, dh_prime=1019)
TOY1019 = Profile("toy1019", 1019, 17, dh_prime=1019)
# q >= 2^31, so the DH group over Z_q* is used as-is
SIM34 = Profile("sim34", 12884902697, 2147483783)
BF256 = Profile(
    "bf256",
    57896044618658097711785492505805455563965980041874999405796075347877132544261,
    730750818665451459101842416358141509827967341699,
)

PROFILES = {prof.name: prof for prof in (TOY11, TOY29, TOY1019, SIM34, BF256)}
