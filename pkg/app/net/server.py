# app/net/server.py
import asyncio
import logging
from collections import Counter
from typing import Optional

import numpy as np

from app.config import MAX_MESSAGE_SIZE, NET_HOST
from app.exceptions import ProtocolError, WireError
from app.models.storage import ServerContents
from app.net.wire import (
    AnswerMessage,
    ErrorMessage,
    QueryMessage,
    WireMessage,
    read_message,
    write_message,
)

logger = logging.getLogger(__name__)


def handle_query(contents: ServerContents, message: WireMessage) -> WireMessage:
    """
    Resposta de um servidor a uma mensagem já decodificada

    Uma consulta que repete um índice de arquivo é recusada com ERROR;
    os coeficientes não são somados.
    """
    if not isinstance(message, QueryMessage):
        return ErrorMessage(text=f"Esperada uma consulta, recebido {type(message).__name__}")
    if message.q != contents.field.q:
        return ErrorMessage(text=f"Módulo {message.q} difere do corpo do servidor ({contents.field.q})")
    counts = Counter(file_index for file_index, _ in message.coefficients)
    repeated = sorted(i for i, c in counts.items() if c > 1)
    if repeated:
        return ErrorMessage(text=f"Consulta repete os arquivos {repeated}")
    try:
        answer = contents.answer(dict(message.coefficients))
    except ProtocolError as e:
        return ErrorMessage(text=str(e))
    return AnswerMessage(values=tuple(int(v) for v in np.asarray(answer)))


class PirServer:
    """Um servidor de armazenamento atendendo consultas pelo protocolo binário"""

    def __init__(
        self,
        contents: ServerContents,
        host: str = NET_HOST,
        port: int = 0,
        max_message_size: int = MAX_MESSAGE_SIZE,
    ):
        self.contents = contents
        self.host = host
        self.port = port
        self.max_message_size = max_message_size
        self._server: Optional[asyncio.AbstractServer] = None

    @property
    def endpoint(self) -> str:
        return f"{self.host}:{self.port}"

    async def _handle_connection(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        peer = writer.get_extra_info("peername")
        try:
            while True:
                try:
                    message = await read_message(reader, self.max_message_size)
                except asyncio.IncompleteReadError:
                    break
                except WireError as e:
                    logger.warning(f"Servidor {self.contents.server}: quadro malformado de {peer}: {e}")
                    await write_message(writer, ErrorMessage(text=str(e)))
                    break
                reply = handle_query(self.contents, message)
                if isinstance(reply, ErrorMessage):
                    logger.warning(f"Servidor {self.contents.server}: {reply.text}")
                await write_message(writer, reply)
        except ConnectionError as e:
            logger.debug(f"Servidor {self.contents.server}: conexão com {peer} encerrada ({e})")
        finally:
            writer.close()
            try:
                await writer.wait_closed()
            except ConnectionError:
                pass

    async def start(self) -> None:
        self._server = await asyncio.start_server(self._handle_connection, self.host, self.port)
        self.port = self._server.sockets[0].getsockname()[1]
        logger.info(f"Servidor {self.contents.server} escutando em {self.endpoint} ({len(self.contents.files)} itens)")

    async def serve_forever(self) -> None:
        if self._server is None:
            await self.start()
        async with self._server:
            await self._server.serve_forever()

    async def close(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
            self._server = None


def run_server(contents: ServerContents, host: str, port: int) -> None:
    """Executa um servidor até ser interrompido"""
    server = PirServer(contents, host, port)
    try:
        asyncio.run(server.serve_forever())
    except KeyboardInterrupt:
        logger.info(f"Servidor {contents.server} encerrado")
