# app/net/wire.py
import asyncio
import logging
import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Tuple, Union

from app.config import MAX_MESSAGE_SIZE
from app.exceptions import WireError

logger = logging.getLogger(__name__)

# Prefixo de tamanho: u32 little-endian com o número de bytes que o seguem
HEADER = struct.Struct("<I")
HEADER_SIZE = HEADER.size
KIND = struct.Struct("<B")
QUERY_HEAD = struct.Struct("<QI")
QUERY_PAIR = struct.Struct("<IQ")
COUNT = struct.Struct("<I")
U64 = struct.Struct("<Q")

U32_MAX = 2**32 - 1
U64_MAX = 2**64 - 1


class MessageKind(IntEnum):
    QUERY = 1
    ANSWER = 2
    ERROR = 3


@dataclass(frozen=True)
class QueryMessage:
    q: int
    coefficients: Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class AnswerMessage:
    values: Tuple[int, ...]


@dataclass(frozen=True)
class ErrorMessage:
    text: str


WireMessage = Union[QueryMessage, AnswerMessage, ErrorMessage]


def _check_range(value: int, limit: int, what: str) -> None:
    if not 0 <= value <= limit:
        raise WireError(f"{what} fora do intervalo: {value}")


def encode_payload(message: WireMessage) -> bytes:
    """Tipo (u8) seguido do corpo da mensagem, sem o prefixo de tamanho"""
    if isinstance(message, QueryMessage):
        _check_range(message.q, U64_MAX, "Módulo")
        _check_range(len(message.coefficients), U32_MAX, "Quantidade de coeficientes")
        parts = [KIND.pack(MessageKind.QUERY), QUERY_HEAD.pack(message.q, len(message.coefficients))]
        for file_index, coefficient in message.coefficients:
            _check_range(file_index, U32_MAX, "Índice de arquivo")
            if not 0 <= coefficient < message.q:
                raise WireError(f"Coeficiente {coefficient} fora de [0, {message.q})")
            parts.append(QUERY_PAIR.pack(file_index, coefficient))
        return b"".join(parts)
    if isinstance(message, AnswerMessage):
        _check_range(len(message.values), U32_MAX, "Comprimento da resposta")
        parts = [KIND.pack(MessageKind.ANSWER), COUNT.pack(len(message.values))]
        for value in message.values:
            _check_range(value, U64_MAX, "Símbolo")
            parts.append(U64.pack(value))
        return b"".join(parts)
    if isinstance(message, ErrorMessage):
        return KIND.pack(MessageKind.ERROR) + message.text.encode("utf-8")
    raise WireError(f"Tipo de mensagem desconhecido: {type(message).__name__}")


def encode_message(message: WireMessage) -> bytes:
    payload = encode_payload(message)
    return HEADER.pack(len(payload)) + payload


def decode_payload(payload: bytes) -> WireMessage:
    """
    Decodifica os bytes que seguem o prefixo de tamanho

    Raises:
        WireError: Tipo desconhecido, tamanho inconsistente ou coeficiente >= q
    """
    if len(payload) < KIND.size:
        raise WireError("Quadro vazio")
    (kind,) = KIND.unpack_from(payload, 0)
    body = payload[KIND.size:]
    if kind == MessageKind.QUERY:
        if len(body) < QUERY_HEAD.size:
            raise WireError("Consulta truncada")
        q, count = QUERY_HEAD.unpack_from(body, 0)
        if len(body) != QUERY_HEAD.size + count * QUERY_PAIR.size:
            raise WireError(f"Consulta com {count} pares e {len(body)} bytes")
        pairs = tuple(QUERY_PAIR.iter_unpack(body[QUERY_HEAD.size:]))
        if any(coefficient >= q for _, coefficient in pairs):
            raise WireError(f"Coeficiente fora de [0, {q})")
        return QueryMessage(q=q, coefficients=pairs)
    if kind == MessageKind.ANSWER:
        if len(body) < COUNT.size:
            raise WireError("Resposta truncada")
        (count,) = COUNT.unpack_from(body, 0)
        if len(body) != COUNT.size + count * U64.size:
            raise WireError(f"Resposta com {count} símbolos e {len(body)} bytes")
        return AnswerMessage(values=tuple(v for (v,) in U64.iter_unpack(body[COUNT.size:])))
    if kind == MessageKind.ERROR:
        try:
            return ErrorMessage(text=body.decode("utf-8"))
        except UnicodeDecodeError as e:
            raise WireError(f"Mensagem de erro não é UTF-8: {e}")
    raise WireError(f"Tipo de mensagem desconhecido: {kind}")


def decode_message(frame: bytes) -> WireMessage:
    """Decodifica um quadro completo (prefixo incluído)"""
    if len(frame) < HEADER_SIZE:
        raise WireError("Quadro menor que o prefixo")
    (length,) = HEADER.unpack_from(frame, 0)
    if len(frame) - HEADER_SIZE != length:
        raise WireError(f"Prefixo declara {length} bytes, quadro contém {len(frame) - HEADER_SIZE}")
    return decode_payload(frame[HEADER_SIZE:])


async def read_message(reader: asyncio.StreamReader, max_size: int = MAX_MESSAGE_SIZE) -> WireMessage:
    header = await reader.readexactly(HEADER_SIZE)
    (length,) = HEADER.unpack(header)
    if length > max_size:
        raise WireError(f"Mensagem grande demais: {length} bytes (máximo {max_size})")
    return decode_payload(await reader.readexactly(length))


async def write_message(writer: asyncio.StreamWriter, message: WireMessage) -> None:
    writer.write(encode_message(message))
    await writer.drain()


def query_from_row(q: int, row: dict) -> QueryMessage:
    return QueryMessage(q=q, coefficients=tuple(sorted((int(i), int(c) % q) for i, c in row.items())))