"""Key generation: token Gen, server multi-reference Rep, helper data."""

from .hashing import fingerprint, hash128
from .helper import HelperData, load_helper, save_helper
from .protocol import (
    RecoveryResult,
    SecretKey,
    TokenOutput,
    fe_enroll,
    fe_reproduce,
    server_recover,
    token_generate,
)

__all__ = [
    'hash128', 'fingerprint', 'HelperData', 'save_helper', 'load_helper',
    'SecretKey', 'TokenOutput', 'RecoveryResult', 'token_generate',
    'server_recover', 'fe_enroll', 'fe_reproduce',
]
