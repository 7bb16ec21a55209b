# app/exceptions.py
from typing import Optional


class PIRError(Exception):
    """Erro base de todo o pacote"""


class FieldError(PIRError, ValueError):
    """Módulo inválido ou operação indefinida no corpo finito"""


class GraphError(PIRError, ValueError):
    """Grafo, hiperaresta ou arquivo de grafo inválido"""


class DatasetError(PIRError, ValueError):
    """Conjunto de dados incompatível com o sistema de armazenamento"""


class ProtocolError(PIRError, ValueError):
    """Violação de pré-condição de um protocolo ou transcrição corrompida"""


class EnumerationBudgetExceeded(PIRError):
    """A enumeração exaustiva excederia o orçamento configurado"""

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"Enumeração recusada: {required} tuplas excedem o orçamento de {budget}"
        )


class PrivacyPreconditionError(PIRError, ValueError):
    """O conjunto de servidores não satisfaz a pré-condição do verificador"""


class WireError(PIRError):
    """Quadro binário malformado"""


class RetrievalError(PIRError):
    """Falha na recuperação em rede (servidor inacessível ou resposta ERROR)"""

    def __init__(self, message: str, server: Optional[int] = None):
        self.server = server
        super().__init__(message)
