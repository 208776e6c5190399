"""Hidden-multiplier encryption over multiplicative groups.

Submodules: ``numtheory`` (arithmetic), ``paramgen`` (certified primes and
platforms), ``scheme`` (multi-recipient encryption and signatures),
``threshold``, ``protocol`` (session simulator), ``analysis`` (order-oracle
attacks), ``formats`` (file records) and ``cli``.
"""

from .errors import HiddenMultError
from .scheme import Variant, decrypt, encode_message, encrypt, setup_dealer
from .threshold import threshold_decrypt, threshold_encrypt, threshold_setup

__version__ = "0.1.0"

__all__ = [
    "HiddenMultError",
    "Variant",
    "decrypt",
    "encode_message",
    "encrypt",
    "setup_dealer",
    "threshold_decrypt",
    "threshold_encrypt",
    "threshold_setup",
]
