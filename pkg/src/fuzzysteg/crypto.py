"""Payload protection: Argon2id key derivation, AES-256-GCM, wire framing.

The wire format is the exact concatenation ``salt || nonce || ciphertext ||
tag`` with no internal length prefixes; the total is always plaintext length
plus 44 bytes. Decryption failure is atomic: no plaintext ever escapes a bad
tag.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.argon2 import Argon2id

from .errors import AuthenticationError, KdfError, MalformedPayloadError
from .rng import SplitMix64

SALT_LEN = 16
NONCE_LEN = 12
TAG_LEN = 16
WIRE_OVERHEAD = SALT_LEN + NONCE_LEN + TAG_LEN  # 44 bytes


@dataclass(frozen=True)
class KdfParams:
    """Argon2id cost parameters (version 1.3, 32-byte output).

    Defaults are the production profile: t=3 passes, 64 MiB, 4 lanes.
    Benchmarks and tests may lower the costs; the wire format is unaffected
    because the parameters never travel with the payload.
    """

    time_cost: int = 3
    memory_kib: int = 64 * 1024
    parallelism: int = 4
    length: int = 32


DEFAULT_KDF = KdfParams()
#: Reduced-cost profile for tests and desk-scale benchmark runs.
FAST_KDF = KdfParams(time_cost=1, memory_kib=8 * 1024, parallelism=1)


@dataclass(frozen=True)
class WirePayload:
    salt: bytes
    nonce: bytes
    ciphertext: bytes
    tag: bytes

    def __post_init__(self):
        if len(self.salt) != SALT_LEN:
            raise ValueError(f"salt must be {SALT_LEN} bytes")
        if len(self.nonce) != NONCE_LEN:
            raise ValueError(f"nonce must be {NONCE_LEN} bytes")
        if len(self.tag) != TAG_LEN:
            raise ValueError(f"tag must be {TAG_LEN} bytes")


def _as_bytes(password) -> bytes:
    return password.encode("utf-8") if isinstance(password, str) else bytes(password)


def derive_key(password, salt: bytes, params: KdfParams = DEFAULT_KDF) -> bytes:
    """Argon2id (version 1.3) key of `params.length` bytes."""
    if len(salt) != SALT_LEN:
        raise ValueError(f"salt must be {SALT_LEN} bytes")
    try:
        kdf = Argon2id(
            salt=salt,
            length=params.length,
            iterations=params.time_cost,
            lanes=params.parallelism,
            memory_cost=params.memory_kib,
        )
        return kdf.derive(_as_bytes(password))
    except MemoryError as exc:
        raise KdfError(f"key derivation exhausted resources: {exc}") from exc


def seal(
    plaintext: bytes,
    password,
    params: KdfParams = DEFAULT_KDF,
    rng: SplitMix64 | None = None,
) -> WirePayload:
    """Encrypt under a fresh salt and nonce.

    `rng` defaults to OS entropy; passing a SplitMix64 makes the salt and
    nonce (and therefore the whole wire) reproducible, which the benchmark
    harness relies on. The salt is drawn first, then the nonce.
    """
    if rng is None:
        salt = secrets.token_bytes(SALT_LEN)
        nonce = secrets.token_bytes(NONCE_LEN)
    else:
        salt = rng.take_bytes(SALT_LEN)
        nonce = rng.take_bytes(NONCE_LEN)
    key = derive_key(password, salt, params)
    sealed = AESGCM(key).encrypt(nonce, bytes(plaintext), None)
    return WirePayload(
        salt=salt, nonce=nonce, ciphertext=sealed[:-TAG_LEN], tag=sealed[-TAG_LEN:]
    )


def open_payload(wp: WirePayload, password, params: KdfParams = DEFAULT_KDF) -> bytes:
    """Decrypt and authenticate; raises AuthenticationError on any mismatch.

    Wrong password, tampered ciphertext, and corrupted extraction are
    indistinguishable by design.
    """
    key = derive_key(password, wp.salt, params)
    try:
        return AESGCM(key).decrypt(wp.nonce, wp.ciphertext + wp.tag, None)
    except InvalidTag as exc:
        raise AuthenticationError("payload failed authentication") from exc


def serialize(wp: WirePayload) -> bytes:
    """salt || nonce || ciphertext || tag."""
    return wp.salt + wp.nonce + wp.ciphertext + wp.tag


def deserialize(data: bytes) -> WirePayload:
    """Inverse of serialize; ciphertext length is total minus 44."""
    if len(data) < WIRE_OVERHEAD:
        raise MalformedPayloadError(
            f"wire payload needs at least {WIRE_OVERHEAD} bytes, got {len(data)}"
        )
    return WirePayload(
        salt=data[:SALT_LEN],
        nonce=data[SALT_LEN : SALT_LEN + NONCE_LEN],
        ciphertext=data[SALT_LEN + NONCE_LEN : -TAG_LEN],
        tag=data[-TAG_LEN:],
    )
