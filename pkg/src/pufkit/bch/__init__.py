"""Binary BCH codes in syndrome (secure sketch) form."""

from .catalog import CodeParams, blocks_needed, decode_cost, default_catalog, encode_cost
from .codec import (
    BchCode,
    DecodeFailure,
    SyndromeBlock,
    build_code,
    decode_syndrome,
    encode_message,
    gen_syndrome,
)

__all__ = [
    'BchCode', 'SyndromeBlock', 'DecodeFailure', 'build_code', 'gen_syndrome',
    'decode_syndrome', 'encode_message', 'CodeParams', 'default_catalog',
    'blocks_needed', 'encode_cost', 'decode_cost',
]
