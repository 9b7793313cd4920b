"""Reduced IEC 61850-9-2 sampled values: codec, bit-rate budget and link simulation."""

from ._core import (
    Analyzer,
    Asdu,
    DatasetMember,
    DatasetSchema,
    RunConfig,
    SvError,
    SvFrame,
    decode_frame,
    decode_tlv,
    dissect,
    encode_frame,
    encode_tlv,
    from_engineering,
    load_config,
    pack_seq_data,
    parse_config,
    project_bitrate,
    publish,
    reference_schema,
    sample_interval,
    simulate,
    to_engineering,
    unpack_seq_data,
    validate_constraints,
)

__version__ = "0.1.0"
